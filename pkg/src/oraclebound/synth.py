"""Seeded generators for correctness matrices with controlled error structure.

Three modes: ``nested`` draws a single hardness value per instance so error
sets are perfectly nested (every defined dependency coefficient is 1);
``independent`` draws every cell on its own; ``alpha_target`` mixes the two,
tuning the mixing rate by bisection on a holdout draw until the measured
minimum dependency coefficient lands near the target.  Targets are
best-effort: property tests must use the achieved statistics returned with
the matrix, which are the ground truth for what was actually generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import CorrectnessMatrix
from .empirical import estimate_alpha, measured_accuracies
from .errors import SpaceValidationError

#: Counter-based generator, reproducible across platforms and numpy releases.
RNG_ALGORITHM = "numpy Philox(4x64-10), keyed via SeedSequence(seed).spawn"

#: Half-width of the acceptance band around a requested minimum coefficient.
ALPHA_TOLERANCE = 0.05

_BISECTION_STEPS = 48

SynthMode = Literal["nested", "independent", "alpha_target"]


@dataclass(frozen=True)
class SynthSpec:
    """Target recipe for one synthetic correctness matrix."""

    accuracies: tuple[float, ...]
    n_instances: int
    mode: SynthMode = "nested"
    alpha_target: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        acc = tuple(float(a) for a in self.accuracies)
        object.__setattr__(self, "accuracies", acc)
        if not acc:
            raise SpaceValidationError("at least one target accuracy is required")
        for a in acc:
            if not math.isfinite(a) or not 0.0 <= a <= 1.0:
                raise SpaceValidationError(
                    f"target accuracies must lie in [0, 1], got {a!r}"
                )
        if any(b < a for a, b in zip(acc, acc[1:])):
            raise SpaceValidationError(
                f"target accuracies must be non-decreasing, got {acc}"
            )
        if self.n_instances < 1:
            raise SpaceValidationError(
                f"n_instances must be at least 1, got {self.n_instances}"
            )
        if self.mode == "alpha_target":
            if self.alpha_target is None or not 0.0 <= self.alpha_target <= 1.0:
                raise SpaceValidationError(
                    f"alpha_target must lie in [0, 1], got {self.alpha_target!r}"
                )
            if len(acc) < 2:
                raise SpaceValidationError(
                    "alpha_target mode needs at least two models"
                )
        elif self.mode not in ("nested", "independent"):
            raise SpaceValidationError(f"unknown mode: {self.mode!r}")
        if not -(2**63) <= int(self.seed) < 2**64:
            raise SpaceValidationError(f"seed does not fit in 64 bits: {self.seed}")


@dataclass(frozen=True)
class SynthStats:
    """Measured statistics of a generated matrix.

    ``mix_rate`` is the tuned independent-redraw probability (alpha_target
    mode only).  ``target_met`` is False when the requested coefficient was
    unreachable within the bisection budget; the achieved value is still
    reported so callers can proceed with it.
    """

    accuracies: tuple[float, ...]
    alpha: tuple[float | None, ...]
    alpha_min: float | None
    alpha_max: float | None
    mode: str
    mix_rate: float | None
    target_met: bool
    warnings: tuple[str, ...]


def _draws(rng: np.random.Generator, accuracies: tuple[float, ...], n: int):
    # One fixed draw order regardless of mode keeps the stream documented:
    # hardness, redraw mask uniforms, independent-cell uniforms.
    hardness = rng.random(n)
    redraw = rng.random((n, len(accuracies)))
    independent = rng.random((n, len(accuracies)))
    return hardness, redraw, independent


def _cells(
    accuracies: tuple[float, ...],
    mode: str,
    mix_rate: float,
    hardness: np.ndarray,
    redraw: np.ndarray,
    independent: np.ndarray,
) -> np.ndarray:
    acc = np.asarray(accuracies)
    nested = hardness[:, None] < acc[None, :]
    if mode == "nested":
        return nested
    indep = independent < acc[None, :]
    if mode == "independent":
        return indep
    return np.where(redraw < mix_rate, indep, nested)


def _alpha_min_at(
    accuracies: tuple[float, ...],
    mix_rate: float,
    hardness: np.ndarray,
    redraw: np.ndarray,
    independent: np.ndarray,
) -> float | None:
    cells = _cells(accuracies, "alpha_target", mix_rate, hardness, redraw, independent)
    ids = _instance_ids(len(hardness))
    matrix = CorrectnessMatrix(ids, _model_ids(len(accuracies)), cells)
    return estimate_alpha(matrix).alpha_min


def _instance_ids(n: int) -> tuple[str, ...]:
    width = len(str(n - 1)) if n > 1 else 1
    return tuple(f"i{idx:0{width}d}" for idx in range(n))


def _model_ids(count: int) -> tuple[str, ...]:
    width = len(str(count))
    return tuple(f"m{j:0{width}d}" for j in range(1, count + 1))


def generate(spec: SynthSpec) -> tuple[CorrectnessMatrix, SynthStats]:
    """Produce a matrix for ``spec``, deterministic given its seed.

    In ``alpha_target`` mode the mixing rate is bisected on a same-size
    holdout draw (a separate child stream of the seed) using common random
    numbers, then the final matrix is drawn from the main stream at the tuned
    rate.  The achieved statistics are measured on the final matrix.
    """
    main_ss, holdout_ss = np.random.SeedSequence(spec.seed).spawn(2)
    warnings: list[str] = []
    mix_rate: float | None = None
    target_met = True

    if spec.mode == "alpha_target":
        holdout_rng = np.random.Generator(np.random.Philox(holdout_ss))
        hold = _draws(holdout_rng, spec.accuracies, spec.n_instances)
        target = float(spec.alpha_target)  # type: ignore[arg-type]
        lo, hi = 0.0, 1.0
        best_rate, best_gap = 0.0, math.inf
        for _ in range(_BISECTION_STEPS):
            mid = (lo + hi) / 2.0
            measured = _alpha_min_at(spec.accuracies, mid, *hold)
            if measured is None:
                # No model erred on the holdout; nothing to tune against.
                break
            gap = abs(measured - target)
            if gap < best_gap:
                best_rate, best_gap = mid, gap
            if gap <= ALPHA_TOLERANCE / 2.0:
                break
            if measured > target:
                lo = mid  # still too dependent: redraw more cells
            else:
                hi = mid
        mix_rate = best_rate

    rng = np.random.Generator(np.random.Philox(main_ss))
    draws = _draws(rng, spec.accuracies, spec.n_instances)
    cells = _cells(spec.accuracies, spec.mode, mix_rate or 0.0, *draws)
    matrix = CorrectnessMatrix(
        _instance_ids(spec.n_instances), _model_ids(len(spec.accuracies)), cells
    )

    profile = estimate_alpha(matrix)
    if spec.mode == "alpha_target":
        achieved = profile.alpha_min
        if achieved is None:
            target_met = False
            warnings.append(
                "dependency coefficients are all undefined (no model erred); "
                f"alpha_target {spec.alpha_target} could not be checked"
            )
        elif abs(achieved - float(spec.alpha_target)) > ALPHA_TOLERANCE:  # type: ignore[arg-type]
            target_met = False
            warnings.append(
                f"alpha_target {spec.alpha_target} unreachable within the "
                f"bisection budget; closest achieved alpha_min is {achieved:.4f} "
                f"at mix rate {mix_rate:.4f}"
            )

    stats = SynthStats(
        accuracies=measured_accuracies(matrix),
        alpha=profile.values,
        alpha_min=profile.alpha_min,
        alpha_max=profile.alpha_max,
        mode=spec.mode,
        mix_rate=mix_rate,
        target_met=target_met,
        warnings=tuple(warnings),
    )
    return matrix, stats
