"""Closed-form operating points for the ideal adaptive selector.

Four routes to the same quantity, ordered by how much dependency information
they consume: nested-failure probabilities (exact), a per-rank dependency
profile, a single constant dependency coefficient, and the fully dependent
worst case that needs nothing beyond per-model cost and accuracy.  All sums
use exact accumulation so spaces with thousands of states stay well below
1e-12 relative error.
"""

from __future__ import annotations

import math
from typing import Sequence

from .core import (
    ABS_TOL,
    AlphaProfile,
    ErrorCascade,
    OracleOutcome,
    StateSpace,
)
from .errors import CascadeConsistencyError, OracleBoundError, SpaceValidationError


def space_vectors(space: StateSpace) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Resources and accuracies of a space, re-checking the accuracy ordering.

    Spaces normally arrive through :func:`~oraclebound.core.validate_state_space`;
    this cheap re-check keeps hand-built spaces from silently producing junk.
    """
    resources = space.resources
    accuracies = space.accuracies()
    for i in range(1, len(accuracies)):
        if accuracies[i] < accuracies[i - 1] - ABS_TOL:
            raise SpaceValidationError(
                f"accuracies must be non-decreasing with resource; "
                f"{space.model_ids[i]!r} ({accuracies[i]}) follows "
                f"{space.model_ids[i - 1]!r} ({accuracies[i - 1]})"
            )
    return resources, accuracies


def selection_frequencies(cascade: ErrorCascade) -> tuple[float, ...]:
    """Per-state pick probabilities plus the trailing all-wrong fallback mass.

    The cheapest state is picked whenever it is correct; state i is picked
    when it is the first correct one; the fallback fires when nothing is.
    """
    p = cascade.p
    freq = [1.0 - p[0]]
    freq.extend(p[i - 1] - p[i] for i in range(1, len(p)))
    freq.append(p[-1])
    return tuple(freq)


def oracle_from_cascade(space: StateSpace, cascade: ErrorCascade) -> OracleOutcome:
    """Expected cost and accuracy given nested failure probabilities.

    Each state is charged by the probability that it is the cheapest correct
    one; instances no state solves fall back to the cheapest state, so its
    cost carries both the first and the last probability slot.
    """
    resources, _ = space_vectors(space)
    if len(cascade) != len(space):
        raise CascadeConsistencyError(
            f"cascade has {len(cascade)} entries for {len(space)} states"
        )
    p = cascade.p
    terms = [resources[0] * (1.0 - p[0] + p[-1])]
    terms.extend(resources[i] * (p[i - 1] - p[i]) for i in range(1, len(p)))
    r_oracle = math.fsum(terms)
    a_oracle = 1.0 - p[-1]
    return OracleOutcome.from_rates(
        space, r_oracle, a_oracle, selection_frequencies(cascade)
    )


def cascade_from_alpha_profile(
    space: StateSpace, profile: AlphaProfile
) -> ErrorCascade:
    """Nested-failure vector implied by accuracies plus dependency coefficients.

    The first entry is the cheapest model's error rate; each later entry is
    that rank's coefficient times its error rate.  A coefficient too large for
    the surrounding accuracies breaks the nesting and is reported, naming the
    first offending rank, rather than being clamped.
    """
    _, accuracies = space_vectors(space)
    if len(profile.values) != len(space) - 1:
        raise SpaceValidationError(
            f"profile covers ranks 2..{len(profile.values) + 1} but the space "
            f"has {len(space)} states"
        )
    undefined = profile.undefined_ranks
    if undefined:
        raise SpaceValidationError(
            f"alpha undefined for ranks: {', '.join(map(str, undefined))}"
        )
    p = [1.0 - accuracies[0]]
    for rank, alpha in profile.by_rank():
        value = alpha * (1.0 - accuracies[rank - 1])  # type: ignore[operator]
        if value > p[-1] + ABS_TOL:
            raise CascadeConsistencyError(
                f"alpha at rank {rank} implies nested-failure probability "
                f"{value}, above the preceding {p[-1]}; the profile is "
                f"inconsistent with the accuracies"
            )
        p.append(value)
    return ErrorCascade(tuple(p))


def oracle_from_alpha_profile(
    space: StateSpace, profile: AlphaProfile
) -> OracleOutcome:
    """Closed-form operating point from per-rank dependency coefficients.

    Equivalent to converting the profile into a nested-failure vector and
    using :func:`oracle_from_cascade`; the two routes agree to 1e-12 and the
    selection frequencies are filled from that conversion.
    """
    resources, accuracies = space_vectors(space)
    cascade = cascade_from_alpha_profile(space, profile)
    n = len(space)
    if n == 1:
        # No cross-model dependencies exist for a single state.
        return oracle_from_cascade(space, cascade)
    values = profile.values
    terms = [
        resources[0],
        (resources[1] - resources[0]) * (1.0 - accuracies[0]),
    ]
    terms.extend(
        values[i - 2] * (resources[i] - resources[i - 1]) * (1.0 - accuracies[i - 1])  # type: ignore[operator]
        for i in range(2, n)
    )
    terms.append(
        -values[n - 2] * (resources[-1] - resources[0]) * (1.0 - accuracies[-1])  # type: ignore[operator]
    )
    r_oracle = math.fsum(terms)
    a_oracle = 1.0 - values[n - 2] * (1.0 - accuracies[-1])  # type: ignore[operator]
    if __debug__:
        assert a_oracle >= accuracies[-1] - ABS_TOL
    return OracleOutcome.from_rates(
        space, r_oracle, a_oracle, selection_frequencies(cascade)
    )


def oracle_constant_alpha(space: StateSpace, alpha: float) -> OracleOutcome:
    """Operating point when every dependency coefficient equals ``alpha``.

    The rank-independent coefficient makes the achievable points a straight
    segment in ``alpha`` from the optimistic end (``alpha = 0``: perfect
    accuracy at the cost of the two cheapest states) to the conservative end
    (``alpha = 1``: accuracy pinned to the largest state).
    """
    if not math.isfinite(alpha) or not 0.0 <= alpha <= 1.0:
        raise SpaceValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    resources, accuracies = space_vectors(space)
    n = len(space)
    if n == 1 or alpha == 1.0:
        # A single state has no smaller models to resolve its errors, and at
        # alpha = 1 the formula reduces to the fully dependent one; delegating
        # keeps that identity exact in floating point.
        return oracle_conservative(space)
    bracket = math.fsum(
        [
            (resources[i] - resources[i - 1]) * (1.0 - accuracies[i - 1])
            for i in range(2, n)
        ]
        + [-(resources[-1] - resources[0]) * (1.0 - accuracies[-1])]
    )
    r_oracle = math.fsum(
        [
            resources[0],
            (resources[1] - resources[0]) * (1.0 - accuracies[0]),
            alpha * bracket,
        ]
    )
    a_oracle = 1.0 - alpha * (1.0 - accuracies[-1])
    if __debug__:
        assert a_oracle >= accuracies[-1] - ABS_TOL
    cascade = ErrorCascade(
        (1.0 - accuracies[0],)
        + tuple(alpha * (1.0 - accuracies[j]) for j in range(1, n))
    )
    return OracleOutcome.from_rates(
        space, r_oracle, a_oracle, selection_frequencies(cascade)
    )


def conservative_resource(
    resources: Sequence[float], accuracies: Sequence[float]
) -> float:
    """Expected cost under fully nested errors, from raw vectors.

    Kept separate from the state-space wrapper so design routines can price
    hypothetical states, including a zero-cost random-guess stand-in.
    """
    r1 = resources[0]
    terms = [float(r1)]
    terms.extend(
        (resources[i] - r1) * (accuracies[i] - accuracies[i - 1])
        for i in range(1, len(resources))
    )
    return math.fsum(terms)


def conservative_resource_rearranged(
    resources: Sequence[float], accuracies: Sequence[float]
) -> float:
    """Dynamic-range form of the fully nested cost.

    Endpoint terms minus the utility contributed by each intermediate state;
    algebraically identical to :func:`conservative_resource` and used to
    cross-check it.
    """
    r1, rn = resources[0], resources[-1]
    a1, an = accuracies[0], accuracies[-1]
    terms = [float(r1), (an - a1) * (rn - r1)]
    terms.extend(
        -(accuracies[i] - accuracies[i - 1]) * (rn - resources[i])
        for i in range(1, len(resources))
    )
    return math.fsum(terms)


def oracle_conservative(space: StateSpace) -> OracleOutcome:
    """Operating point assuming larger-model errors are never resolved by a
    smaller model: the worst case for cost, with accuracy pinned to the
    largest state.  Needs nothing beyond per-model cost and accuracy."""
    resources, accuracies = space_vectors(space)
    r_oracle = conservative_resource(resources, accuracies)
    if __debug__:
        alt = conservative_resource_rearranged(resources, accuracies)
        assert abs(r_oracle - alt) <= 1e-12 * max(1.0, resources[-1]), (r_oracle, alt)
    a_oracle = accuracies[-1]
    cascade = ErrorCascade(tuple(1.0 - a for a in accuracies))
    return OracleOutcome.from_rates(
        space, r_oracle, a_oracle, selection_frequencies(cascade)
    )


def gain_metrics(
    space: StateSpace, outcome: OracleOutcome
) -> tuple[float, float, float]:
    """Resource saving, accuracy gain, and speedup ratio versus always
    running the largest state."""
    if outcome.r_oracle <= 0:
        raise OracleBoundError(
            f"r_oracle must be positive, got {outcome.r_oracle!r}"
        )
    resources = space.resources
    accuracies = space.accuracies()
    delta_r = resources[-1] - outcome.r_oracle
    delta_a = outcome.a_oracle - accuracies[-1]
    return delta_r, delta_a, resources[-1] / outcome.r_oracle
