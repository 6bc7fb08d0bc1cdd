"""Domain types and validation for adaptive-inference opportunity analysis.

The central objects are a resource-ordered space of backbone classifiers and
a per-instance correctness matrix recorded over that space.  Every type is
immutable after construction and every operation downstream is a pure
function, so concurrent evaluation needs no coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from .errors import (
    CascadeConsistencyError,
    MatrixBuildError,
    OracleBoundError,
    SpaceValidationError,
)

#: Absolute tolerance for invariant comparisons on probabilities/accuracies.
ABS_TOL = 1e-9

Policy = Literal["reject", "prune_dominated"]


@dataclass(frozen=True)
class ModelState:
    """One backbone classifier: an id, its resource cost, and its accuracy.

    ``accuracy`` may be ``None`` while still unmeasured; every analysis
    operation requires it to be filled in first.  Resource units are
    caller-defined (GFLOPs by convention) and never converted.
    """

    model_id: str
    resource: float
    accuracy: float | None = None

    def __post_init__(self) -> None:
        if not self.model_id:
            raise SpaceValidationError("model_id must be a non-empty string")
        if not math.isfinite(self.resource) or self.resource <= 0:
            raise SpaceValidationError(
                f"model {self.model_id!r}: resource must be a positive real, "
                f"got {self.resource!r}"
            )
        if self.accuracy is not None and not (
            -ABS_TOL <= self.accuracy <= 1.0 + ABS_TOL
        ):
            raise SpaceValidationError(
                f"model {self.model_id!r}: accuracy must lie in [0, 1], "
                f"got {self.accuracy!r}"
            )


@dataclass(frozen=True)
class StateSpace:
    """Backbone states ordered by non-decreasing resource cost.

    Construction checks the resource ordering and id uniqueness; the
    accuracy ordering is the job of :func:`validate_state_space`, which is
    the sanctioned way to produce a space for analysis.  ``num_classes`` is
    only needed by the smallest-state admissibility test.
    """

    states: tuple[ModelState, ...]
    num_classes: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise SpaceValidationError("a state space needs at least one state")
        for prev, cur in zip(self.states, self.states[1:]):
            if cur.resource < prev.resource:
                raise SpaceValidationError(
                    f"states must be ordered by resource: {prev.model_id!r} "
                    f"({prev.resource}) precedes {cur.model_id!r} ({cur.resource})"
                )
        if self.num_classes is not None and self.num_classes < 2:
            raise SpaceValidationError(
                f"num_classes must be at least 2, got {self.num_classes}"
            )
        ids = [s.model_id for s in self.states]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise SpaceValidationError(f"duplicate model ids: {', '.join(dupes)}")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def model_ids(self) -> tuple[str, ...]:
        return tuple(s.model_id for s in self.states)

    @property
    def resources(self) -> tuple[float, ...]:
        return tuple(s.resource for s in self.states)

    def accuracies(self) -> tuple[float, ...]:
        """All accuracies, raising if any state is still unmeasured."""
        missing = [s.model_id for s in self.states if s.accuracy is None]
        if missing:
            raise SpaceValidationError(
                f"accuracy missing for: {', '.join(missing)}"
            )
        return tuple(s.accuracy for s in self.states)  # type: ignore[misc]


def validate_state_space(
    raw_states: Iterable[ModelState],
    policy: Policy = "reject",
    num_classes: int | None = None,
) -> StateSpace:
    """Order raw states by resource and enforce non-decreasing accuracy.

    Under ``reject`` any accuracy inversion is an error listing the offending
    pairs.  Under ``prune_dominated`` every state whose accuracy is strictly
    below that of a cheaper-or-equal state is dropped; resource ties keep the
    higher-accuracy state, then the lexicographically smaller model id.
    Validation is idempotent: feeding the result back in returns it unchanged.
    """
    states = list(raw_states)
    if not states:
        raise SpaceValidationError("no states provided")
    missing = sorted(s.model_id for s in states if s.accuracy is None)
    if missing:
        raise SpaceValidationError(
            f"validation requires accuracies; missing for: {', '.join(missing)}"
        )
    if policy == "reject":
        ordered = sorted(states, key=lambda s: (s.resource, s.accuracy, s.model_id))
        offending = [
            (prev, cur)
            for prev, cur in zip(ordered, ordered[1:])
            if cur.accuracy < prev.accuracy - ABS_TOL  # type: ignore[operator]
        ]
        if offending:
            pairs = "; ".join(
                f"{p.model_id!r} (resource {p.resource}, accuracy {p.accuracy}) vs "
                f"{c.model_id!r} (resource {c.resource}, accuracy {c.accuracy})"
                for p, c in offending
            )
            raise SpaceValidationError(
                f"accuracies must be non-decreasing with resource; "
                f"offending pairs: {pairs}"
            )
        return StateSpace(tuple(ordered), num_classes=num_classes)
    if policy == "prune_dominated":
        ordered = sorted(states, key=lambda s: (s.resource, -s.accuracy, s.model_id))  # type: ignore[operator]
        deduped: list[ModelState] = []
        for s in ordered:
            if deduped and s.resource == deduped[-1].resource:
                continue  # resource tie: the sort already placed the keeper first
            deduped.append(s)
        kept: list[ModelState] = []
        for s in deduped:
            if kept and s.accuracy < kept[-1].accuracy:  # type: ignore[operator]
                continue  # strictly below a cheaper state
            kept.append(s)
        return StateSpace(tuple(kept), num_classes=num_classes)
    raise ValueError(f"unknown validation policy: {policy!r}")


@dataclass(frozen=True)
class CorrectnessMatrix:
    """Per-instance, per-model correctness outcomes.

    ``cells[x, i]`` is True when model ``model_ids[i]`` classified instance
    ``instance_ids[x]`` correctly.  Column order must match the owning state
    space; the array is frozen after construction and all statistics over it
    are pure reads.
    """

    instance_ids: tuple[str, ...]
    model_ids: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "instance_ids", tuple(self.instance_ids))
        object.__setattr__(self, "model_ids", tuple(self.model_ids))
        if not self.instance_ids:
            raise MatrixBuildError("a correctness matrix needs at least one instance")
        if len(set(self.instance_ids)) != len(self.instance_ids):
            raise MatrixBuildError("duplicate instance ids in correctness matrix")
        if len(set(self.model_ids)) != len(self.model_ids):
            raise MatrixBuildError("duplicate model ids in correctness matrix")
        cells = np.array(self.cells, dtype=bool, copy=True)
        expected = (len(self.instance_ids), len(self.model_ids))
        if cells.shape != expected:
            raise MatrixBuildError(
                f"cells shape {cells.shape} does not match {expected[0]} "
                f"instances x {expected[1]} models"
            )
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def num_instances(self) -> int:
        return len(self.instance_ids)

    @property
    def num_models(self) -> int:
        return len(self.model_ids)

    def select_models(self, model_ids: Sequence[str]) -> CorrectnessMatrix:
        """Project onto a subset or reordering of the model columns."""
        index = {m: j for j, m in enumerate(self.model_ids)}
        try:
            cols = [index[m] for m in model_ids]
        except KeyError as exc:
            raise MatrixBuildError(
                f"matrix has no column for model {exc.args[0]!r}"
            ) from None
        return CorrectnessMatrix(
            self.instance_ids, tuple(model_ids), self.cells[:, cols]
        )


@dataclass(frozen=True)
class ErrorCascade:
    """Nested failure probabilities over cheapest-first model prefixes.

    ``p[i]`` (0-based) is the probability that the ``i + 1`` cheapest models
    are all wrong on an instance.  The events are nested, so the vector must
    be non-increasing.
    """

    p: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.p)
        object.__setattr__(self, "p", values)
        if not values:
            raise CascadeConsistencyError("cascade must have at least one entry")
        for i, v in enumerate(values):
            if not math.isfinite(v) or v < -ABS_TOL or v > 1.0 + ABS_TOL:
                raise CascadeConsistencyError(
                    f"p[{i + 1}] = {v!r} is outside [0, 1]"
                )
        for i in range(1, len(values)):
            if values[i] > values[i - 1] + ABS_TOL:
                raise CascadeConsistencyError(
                    f"nested-failure probabilities must be non-increasing; "
                    f"p[{i + 1}] = {values[i]} exceeds p[{i}] = {values[i - 1]}"
                )

    def __len__(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class AlphaProfile:
    """Cross-model error-dependency coefficients for ranks 2..N.

    ``values[j]`` belongs to rank ``j + 2`` and is the probability that every
    cheaper model is also wrong, conditioned on that model being wrong.
    ``None`` marks a rank whose coefficient is undefined because the model
    made no errors (the conditioning event is empty); undefined entries are
    excluded from the min/max and never substituted with 0 or 1.
    """

    values: tuple[float | None, ...]

    def __post_init__(self) -> None:
        vals = tuple(None if v is None else float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        for rank, v in self.by_rank():
            if v is not None and (
                not math.isfinite(v) or v < -ABS_TOL or v > 1.0 + ABS_TOL
            ):
                raise SpaceValidationError(
                    f"alpha at rank {rank} must lie in [0, 1], got {v!r}"
                )

    @classmethod
    def constant(cls, alpha: float, num_states: int) -> AlphaProfile:
        """Rank-independent profile for a space of ``num_states`` states."""
        return cls((alpha,) * max(num_states - 1, 0))

    def by_rank(self) -> Iterator[tuple[int, float | None]]:
        for j, v in enumerate(self.values):
            yield j + 2, v

    @property
    def defined(self) -> tuple[float, ...]:
        return tuple(v for v in self.values if v is not None)

    @property
    def undefined_ranks(self) -> tuple[int, ...]:
        return tuple(rank for rank, v in self.by_rank() if v is None)

    @property
    def alpha_min(self) -> float | None:
        return min(self.defined) if self.defined else None

    @property
    def alpha_max(self) -> float | None:
        return max(self.defined) if self.defined else None


@dataclass(frozen=True)
class OracleOutcome:
    """Expected operating point of the ideal per-instance model selector.

    Alongside the expected resource cost and accuracy it carries the gain
    metrics relative to the largest state and, when available, the selection
    frequencies: one slot per state plus a final slot for the all-wrong
    fallback.  The fallback is charged the cheapest state's cost, so its mass
    appears once, in that final slot.
    """

    r_oracle: float
    a_oracle: float
    delta_r: float
    delta_a: float
    r_ratio: float
    selection_freq: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("r_oracle", "a_oracle", "delta_r", "delta_a", "r_ratio"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise OracleBoundError(f"{name} is not finite: {value!r}")
        if not (-ABS_TOL <= self.a_oracle <= 1.0 + ABS_TOL):
            raise OracleBoundError(
                f"a_oracle must lie in [0, 1], got {self.a_oracle!r}"
            )
        if self.selection_freq is not None:
            freq = tuple(float(v) for v in self.selection_freq)
            object.__setattr__(self, "selection_freq", freq)
            total = math.fsum(freq)
            if abs(total - 1.0) > ABS_TOL:
                raise OracleBoundError(
                    f"selection frequencies sum to {total!r}, expected 1"
                )

    @classmethod
    def from_rates(
        cls,
        space: StateSpace,
        r_oracle: float,
        a_oracle: float,
        selection_freq: Sequence[float] | None = None,
    ) -> OracleOutcome:
        """Attach gain metrics for ``space`` to a computed operating point."""
        resources = space.resources
        accuracies = space.accuracies()
        if r_oracle <= 0:
            raise OracleBoundError(f"r_oracle must be positive, got {r_oracle!r}")
        scale = max(1.0, resources[-1])
        if r_oracle < resources[0] - ABS_TOL * scale or r_oracle > resources[-1] + ABS_TOL * scale:
            raise OracleBoundError(
                f"r_oracle = {r_oracle!r} falls outside "
                f"[{resources[0]}, {resources[-1]}]"
            )
        if selection_freq is not None and len(selection_freq) != len(space) + 1:
            raise OracleBoundError(
                f"selection_freq must have {len(space) + 1} entries, "
                f"got {len(selection_freq)}"
            )
        return cls(
            r_oracle=r_oracle,
            a_oracle=a_oracle,
            delta_r=resources[-1] - r_oracle,
            delta_a=a_oracle - accuracies[-1],
            r_ratio=resources[-1] / r_oracle,
            selection_freq=None if selection_freq is None else tuple(selection_freq),
        )


@dataclass(frozen=True)
class AdaptationLabel:
    """The selector's per-instance choice: cheapest correct state, or the
    cheapest state as fallback when every model is wrong."""

    instance_id: str
    selected_rank: int
    selected_model_id: str
    correct: bool


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear accuracy-versus-resource frontier.

    Points are strictly increasing in resource with non-decreasing accuracy;
    segments between points are interpreted as straight lines.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(r), float(a)) for r, a in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise SpaceValidationError("an envelope needs at least two points")
        for r, a in pts:
            if not math.isfinite(r) or r <= 0:
                raise SpaceValidationError(
                    f"envelope resource must be a positive real, got {r!r}"
                )
            if not math.isfinite(a) or a < -ABS_TOL or a > 1.0 + ABS_TOL:
                raise SpaceValidationError(
                    f"envelope accuracy must lie in [0, 1], got {a!r}"
                )
        for (r0, a0), (r1, a1) in zip(pts, pts[1:]):
            if r1 <= r0:
                raise SpaceValidationError(
                    f"envelope resources must be strictly increasing; "
                    f"{r1} follows {r0}"
                )
            if a1 < a0 - ABS_TOL:
                raise SpaceValidationError(
                    f"envelope accuracies must be non-decreasing; "
                    f"{a1} follows {a0}"
                )

    def __len__(self) -> int:
        return len(self.points)
