"""State-space design tooling.

Covers the three design questions: is the cheapest state worth keeping at
all, which k states should a small space keep, and what does the cost limit
look like when states become arbitrarily dense along a frontier.  All subset
objectives use the fully dependent (worst-case) cost, whose decomposition
into pairwise utilities is what makes exact selection tractable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .bounds import conservative_resource, space_vectors
from .core import Envelope, OracleOutcome, StateSpace
from .errors import SpaceValidationError


@dataclass(frozen=True)
class SubsetPlan:
    """A chosen sub-space of size k, always keeping the largest state.

    ``chosen_ranks`` are 1-based indices into the parent space.  For greedy
    plans ``marginal_utility`` records the cost drop achieved by the step
    that produced this plan (``None`` for the single-state seed).
    """

    k: int
    chosen_ranks: tuple[int, ...]
    chosen_model_ids: tuple[str, ...]
    r_oracle: float
    r_ratio: float
    marginal_utility: float | None = None

    def __post_init__(self) -> None:
        if len(self.chosen_ranks) != self.k or len(self.chosen_model_ids) != self.k:
            raise SpaceValidationError(
                f"plan of size {self.k} lists {len(self.chosen_ranks)} ranks"
            )
        if any(b <= a for a, b in zip(self.chosen_ranks, self.chosen_ranks[1:])):
            raise SpaceValidationError(
                f"chosen ranks must be strictly increasing: {self.chosen_ranks}"
            )


@dataclass(frozen=True)
class SmallestStateCheck:
    """Outcome of the cheapest-state admissibility test.

    ``threshold`` is the largest cost the cheapest state may have and still
    beat a free random guesser (scaled by the second state's cost, the form
    the direct comparison proves).  ``threshold_from_largest`` is the variant
    scaled by the largest state's cost, reported for comparison; the two
    coincide for two-state spaces.
    """

    admissible: bool
    threshold: float
    threshold_from_largest: float
    r_oracle: float
    r_oracle_random_guess: float


def smallest_state_admissible(space: StateSpace) -> SmallestStateCheck:
    """Decide whether the cheapest state pays for itself.

    The cheapest state is admissible when keeping it yields a lower fully
    dependent cost than replacing it with a zero-cost random guesser over the
    task's classes.  Both costs are returned so the threshold verdict can be
    cross-checked against the direct comparison.
    """
    if space.num_classes is None:
        raise SpaceValidationError(
            "num_classes is required for the smallest-state admissibility test"
        )
    if len(space) < 2:
        raise SpaceValidationError(
            "the admissibility test needs at least two states"
        )
    resources, accuracies = space_vectors(space)
    guess = 1.0 / space.num_classes
    numer = accuracies[0] - guess
    denom = 1.0 - accuracies[-1] + accuracies[0]
    if denom > 0:
        threshold = resources[1] * numer / denom
        threshold_from_largest = resources[-1] * numer / denom
    else:
        # Only reachable when the cheapest state is never right and the
        # largest is always right; no positive cost is admissible then.
        threshold = -math.inf
        threshold_from_largest = -math.inf
    admissible = resources[0] < threshold
    r_oracle = conservative_resource(resources, accuracies)
    r_random = conservative_resource(
        (0.0,) + resources[1:], (guess,) + accuracies[1:]
    )
    return SmallestStateCheck(
        admissible=admissible,
        threshold=threshold,
        threshold_from_largest=threshold_from_largest,
        r_oracle=r_oracle,
        r_oracle_random_guess=r_random,
    )


def _plan(
    space: StateSpace,
    indices: Sequence[int],
    marginal_utility: float | None = None,
) -> SubsetPlan:
    resources, accuracies = space_vectors(space)
    sub_resources = [resources[i] for i in indices]
    sub_accuracies = [accuracies[i] for i in indices]
    r_oracle = conservative_resource(sub_resources, sub_accuracies)
    return SubsetPlan(
        k=len(indices),
        chosen_ranks=tuple(i + 1 for i in indices),
        chosen_model_ids=tuple(space.model_ids[i] for i in indices),
        r_oracle=r_oracle,
        r_ratio=resources[-1] / r_oracle,
        marginal_utility=marginal_utility,
    )


def optimal_subsets(space: StateSpace, k_max: int) -> list[SubsetPlan]:
    """Exact minimum-cost subsets for every size 1..k_max.

    The largest state is always kept, since dropping it would change the
    accuracy target.  The worst-case cost of a chain decomposes into a
    start-state term plus edge utilities that depend only on consecutive
    pairs, so a longest-chain table over (state, chain length) ending at the
    largest state is exact.  One table serves all sizes; O(N^2 * k_max).
    """
    n = len(space)
    if not 1 <= k_max <= n:
        raise SpaceValidationError(f"k must be in 1..{n}, got {k_max}")
    resources, accuracies = space_vectors(space)
    rn, an = resources[-1], accuracies[-1]
    neg = -math.inf
    # best[c][j]: max total edge utility of a chain of c states from j to the
    # last state; choice[c][j] the successor that achieves it.
    best = [[neg] * n for _ in range(k_max + 1)]
    choice = [[-1] * n for _ in range(k_max + 1)]
    best[1][n - 1] = 0.0
    for c in range(2, k_max + 1):
        for j in range(n - c, -1, -1):
            top, pick = neg, -1
            for m in range(j + 1, n):
                tail = best[c - 1][m]
                if tail == neg:
                    continue
                w = (accuracies[m] - accuracies[j]) * (rn - resources[m]) + tail
                if w > top:
                    top, pick = w, m
            best[c][j], choice[c][j] = top, pick
    plans: list[SubsetPlan] = []
    for k in range(1, k_max + 1):
        start, start_obj = -1, math.inf
        for s in range(n):
            if best[k][s] == neg:
                continue
            obj = (
                resources[s]
                + (an - accuracies[s]) * (rn - resources[s])
                - best[k][s]
            )
            if obj < start_obj:
                start, start_obj = s, obj
        indices = [start]
        cur = start
        for c in range(k, 1, -1):
            cur = choice[c][cur]
            indices.append(cur)
        plans.append(_plan(space, indices))
    return plans


def optimal_subset(space: StateSpace, k: int) -> SubsetPlan:
    """Exact minimum-cost subset of size k (largest state always kept)."""
    return optimal_subsets(space, k)[-1]


def greedy_growth(space: StateSpace, k_max: int) -> list[SubsetPlan]:
    """Grow nested subsets from the largest state, one best state at a time.

    Each step adds the state with the largest cost reduction; ties go to the
    lower-resource state, then the lexicographically smaller model id.  The
    resulting plans are nested and their cost never increases with size.
    """
    n = len(space)
    if not 1 <= k_max <= n:
        raise SpaceValidationError(f"k_max must be in 1..{n}, got {k_max}")
    resources, accuracies = space_vectors(space)

    chosen = {n - 1}
    current = [n - 1]
    plans = [_plan(space, current)]
    for _ in range(2, k_max + 1):
        best_idx, best_cost, best_key = -1, math.inf, None
        for j in range(n - 1):
            if j in chosen:
                continue
            candidate = sorted(current + [j])
            cost = conservative_resource(
                [resources[i] for i in candidate],
                [accuracies[i] for i in candidate],
            )
            key = (resources[j], space.model_ids[j])
            if cost < best_cost or (cost == best_cost and key < best_key):
                best_idx, best_cost, best_key = j, cost, key
        utility = plans[-1].r_oracle - best_cost
        chosen.add(best_idx)
        current = sorted(current + [best_idx])
        plans.append(_plan(space, current, marginal_utility=utility))
    return plans


def continuous_bound(envelope: Envelope) -> OracleOutcome:
    """Cost limit for an arbitrarily dense space along the frontier.

    The area under each straight segment is integrated in closed form
    (trapezoids), so the only error is ordinary floating-point rounding.
    Gain metrics are taken against the frontier's most expensive point.
    """
    pts = envelope.points
    r_low = pts[0][0]
    r_high, a_high = pts[-1]
    segments = [
        (pts[i + 1][0] - pts[i][0]) * (pts[i][1] + pts[i + 1][1]) * 0.5
        for i in range(len(pts) - 1)
    ]
    integral = math.fsum(segments)
    r_oracle = math.fsum([r_low, a_high * (r_high - r_low), -integral])
    return OracleOutcome(
        r_oracle=r_oracle,
        a_oracle=a_high,
        delta_r=r_high - r_oracle,
        delta_a=0.0,
        r_ratio=r_high / r_oracle,
        selection_freq=None,
    )


def pareto_staircase(points: Iterable[tuple[float, float]]) -> Envelope:
    """Upper-left frontier through scattered (resource, accuracy) points.

    Resource ties keep the best accuracy; points strictly below a cheaper
    one are dropped; survivors are joined by straight segments.  Flat runs
    are kept, so the most expensive surviving point still anchors the
    frontier's right end.
    """
    best_at: dict[float, float] = {}
    for r, a in points:
        r, a = float(r), float(a)
        if r not in best_at or a > best_at[r]:
            best_at[r] = a
    frontier: list[tuple[float, float]] = []
    for r in sorted(best_at):
        a = best_at[r]
        if frontier and a < frontier[-1][1]:
            continue
        frontier.append((r, a))
    if len(frontier) < 2:
        raise SpaceValidationError(
            "need at least two distinct frontier points to form an envelope"
        )
    return Envelope(tuple(frontier))
