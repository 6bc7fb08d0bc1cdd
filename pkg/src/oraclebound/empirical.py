"""Estimators and the exact per-instance selector over correctness records."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    AdaptationLabel,
    AlphaProfile,
    CorrectnessMatrix,
    ErrorCascade,
    ModelState,
    OracleOutcome,
    StateSpace,
)
from .errors import MatrixBuildError


@dataclass(frozen=True)
class PredictionRecord:
    """One model's predicted label for one instance."""

    instance_id: str
    model_id: str
    label: str

    def __post_init__(self) -> None:
        if not self.instance_id or not self.model_id:
            raise MatrixBuildError(
                "prediction records need non-empty instance and model ids"
            )


def _canon(label: str) -> str:
    # Exact string match after Unicode NFC normalization and trimming.
    return unicodedata.normalize("NFC", label).strip()


def _listing(items: list[str], limit: int = 20) -> str:
    if len(items) <= limit:
        return ", ".join(items)
    return ", ".join(items[:limit]) + f", and {len(items) - limit} more"


def _assemble(
    entries: Sequence[tuple[str, str, bool]], space: StateSpace
) -> CorrectnessMatrix:
    """Build the matrix from judged (instance, model, correct) triples.

    Every (instance, model) pair must appear exactly once; rows follow the
    first appearance of each instance, columns follow the space order.
    """
    if not entries:
        raise MatrixBuildError("no correctness records given")
    model_index = {m: j for j, m in enumerate(space.model_ids)}
    unknown = sorted({m for _, m, _ in entries if m not in model_index})
    if unknown:
        raise MatrixBuildError(f"unknown model ids: {_listing(unknown)}")
    row_index: dict[str, int] = {}
    for iid, _, _ in entries:
        if iid not in row_index:
            row_index[iid] = len(row_index)
    n, m = len(row_index), len(space)
    cells = np.zeros((n, m), dtype=bool)
    filled = np.zeros((n, m), dtype=bool)
    duplicates: list[str] = []
    for iid, mid, correct in entries:
        x, j = row_index[iid], model_index[mid]
        if filled[x, j]:
            duplicates.append(f"({iid}, {mid})")
        filled[x, j] = True
        cells[x, j] = correct
    if duplicates:
        raise MatrixBuildError(f"duplicate records for: {_listing(duplicates)}")
    if not filled.all():
        instance_list = list(row_index)
        missing = [
            f"({instance_list[x]}, {space.model_ids[j]})"
            for x, j in zip(*np.nonzero(~filled))
        ]
        raise MatrixBuildError(f"missing records for: {_listing(missing)}")
    return CorrectnessMatrix(tuple(row_index), space.model_ids, cells)


def matrix_from_records(
    records: Iterable[tuple[str, str, bool]], space: StateSpace
) -> CorrectnessMatrix:
    """Assemble the matrix from pre-judged correctness triples."""
    return _assemble(list(records), space)


def build_correctness(
    predictions: Iterable[PredictionRecord],
    ground_truth: Mapping[str, str],
    space: StateSpace,
) -> CorrectnessMatrix:
    """Judge raw predictions against ground truth and assemble the matrix.

    Labels compare equal after Unicode NFC normalization and whitespace
    trimming.  Missing pairs, duplicates, unknown models, and instances
    without ground truth are all reported with the offending ids.
    """
    records = list(predictions)
    if not records:
        raise MatrixBuildError("no prediction records given")
    truth = {iid: _canon(label) for iid, label in ground_truth.items()}
    orphans = sorted({r.instance_id for r in records if r.instance_id not in truth})
    if orphans:
        raise MatrixBuildError(
            f"instances without ground truth: {_listing(orphans)}"
        )
    entries = [
        (r.instance_id, r.model_id, _canon(r.label) == truth[r.instance_id])
        for r in records
    ]
    return _assemble(entries, space)


def estimate_cascade(matrix: CorrectnessMatrix) -> ErrorCascade:
    """Empirical nested-failure probabilities for cheapest-first prefixes."""
    wrong = ~matrix.cells
    prefix_all_wrong = np.logical_and.accumulate(wrong, axis=1)
    counts = prefix_all_wrong.sum(axis=0)
    n = matrix.num_instances
    return ErrorCascade(tuple(int(c) / n for c in counts))


def estimate_alpha(matrix: CorrectnessMatrix) -> AlphaProfile:
    """Empirical dependency coefficients for ranks 2..N.

    Rank i gets the fraction of model i's errors on which every cheaper model
    also failed.  A model with no errors leaves its rank undefined rather
    than defaulting to 0 or 1.
    """
    wrong = ~matrix.cells
    prefix_all_wrong = np.logical_and.accumulate(wrong, axis=1)
    joint = prefix_all_wrong.sum(axis=0)
    each = wrong.sum(axis=0)
    values: list[float | None] = []
    for j in range(1, matrix.num_models):
        values.append(None if each[j] == 0 else int(joint[j]) / int(each[j]))
    return AlphaProfile(tuple(values))


def measured_accuracies(matrix: CorrectnessMatrix) -> tuple[float, ...]:
    """Empirical accuracy of each model: its column mean."""
    n = matrix.num_instances
    return tuple(int(c) / n for c in matrix.cells.sum(axis=0))


def simulate_oracle(
    matrix: CorrectnessMatrix, space: StateSpace
) -> tuple[OracleOutcome, list[AdaptationLabel]]:
    """Run the ideal selector instance by instance.

    Each instance gets the cheapest correct state; instances no state solves
    fall back to the cheapest state and stay incorrect.  Aggregates are plain
    empirical means, deliberately independent of the closed-form route so the
    two can be checked against each other.
    """
    if matrix.model_ids != space.model_ids:
        raise MatrixBuildError(
            f"matrix columns {matrix.model_ids} do not match the state space "
            f"order {space.model_ids}"
        )
    cells = matrix.cells
    n = matrix.num_instances
    any_correct = cells.any(axis=1)
    first_correct = cells.argmax(axis=1)  # 0 when the row is all False
    ranks = np.where(any_correct, first_correct + 1, 1)
    resources = np.asarray(space.resources, dtype=float)
    r_oracle = float(resources[ranks - 1].sum()) / n
    fallback = int(np.count_nonzero(~any_correct))
    a_oracle = 1.0 - fallback / n
    picked = np.bincount(
        first_correct[any_correct], minlength=matrix.num_models
    )
    freq = tuple(int(c) / n for c in picked) + (fallback / n,)
    outcome = OracleOutcome.from_rates(space, r_oracle, a_oracle, freq)
    labels = [
        AdaptationLabel(
            instance_id=iid,
            selected_rank=int(rank),
            selected_model_id=space.model_ids[rank - 1],
            correct=bool(ok),
        )
        for iid, rank, ok in zip(matrix.instance_ids, ranks, any_correct)
    ]
    return outcome, labels


def resolve_accuracies(
    space: StateSpace,
    matrix: CorrectnessMatrix,
    keep_supplied: bool = False,
    mismatch_tol: float = 1e-6,
) -> tuple[list[ModelState], list[str]]:
    """Fill or override the space's accuracies from the matrix.

    Measured values win by default because they describe the instances the
    selector actually runs on; ``keep_supplied`` preserves file-supplied
    accuracies instead (bound-only workflows).  Returns the resolved states
    plus warnings for supplied values disagreeing with measurement beyond
    ``mismatch_tol``.
    """
    if matrix.model_ids != space.model_ids:
        raise MatrixBuildError(
            "matrix columns do not match the state space order"
        )
    measured = measured_accuracies(matrix)
    warnings: list[str] = []
    resolved: list[ModelState] = []
    for state, measured_acc in zip(space.states, measured):
        if state.accuracy is not None and abs(state.accuracy - measured_acc) > mismatch_tol:
            warnings.append(
                f"model {state.model_id!r}: supplied accuracy {state.accuracy} "
                f"differs from measured {measured_acc}"
            )
        if keep_supplied:
            if state.accuracy is None:
                raise MatrixBuildError(
                    f"model {state.model_id!r} has no supplied accuracy to keep"
                )
            resolved.append(state)
        else:
            resolved.append(
                ModelState(state.model_id, state.resource, measured_acc)
            )
    return resolved, warnings
