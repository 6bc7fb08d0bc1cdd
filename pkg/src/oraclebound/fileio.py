"""File formats: CSV ingestion with line-numbered errors, deterministic JSON
and CSV emission, atomic writes, and input digests.

All emitted numbers use 12 significant digits (round half to even) so reruns
over identical inputs are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

from .core import ModelState
from .empirical import PredictionRecord
from .errors import FileFormatError

STATES_HEADER = ["model_id", "resource", "accuracy"]
CORRECTNESS_HEADER = ["instance_id", "model_id", "correct"]
PREDICTIONS_HEADER = ["instance_id", "model_id", "label"]
TRUTH_HEADER = ["instance_id", "label"]
ENVELOPE_HEADER = ["resource", "accuracy"]
ALPHA_PROFILE_HEADER = ["rank", "alpha"]
LABELS_HEADER = ["instance_id", "selected_model_id", "selected_rank", "correct"]

_BOOL_TOKENS = {"0": False, "1": True, "true": True, "false": False}


def round12(value: float) -> float:
    """Round a float to 12 significant digits (round half to even)."""
    if value == 0.0:
        return 0.0
    return float(f"{value:.12g}")


def fmt12(value: float) -> str:
    """Textual form used in emitted CSV: 12 significant digits."""
    return f"{value:.12g}"


def dump_json(payload: Any) -> str:
    """Serialize a report payload deterministically.

    Keys keep their construction order; every float is rounded to 12
    significant digits first, so the default shortest-repr encoding never
    prints more than that.
    """
    return json.dumps(_rounded(payload), indent=2, allow_nan=False) + "\n"


def _rounded(obj: Any) -> Any:
    if isinstance(obj, float):
        return round12(obj)
    if isinstance(obj, dict):
        return {key: _rounded(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(value) for value in obj]
    return obj


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _parse_csv(
    path: str | Path,
    columns: Sequence[str],
    *,
    metadata_ok: bool = False,
) -> tuple[list[tuple[int, list[str]]], dict[str, str]]:
    """Rows as (line_number, fields) after a mandatory header.

    Lines starting with ``#`` ahead of the header carry ``key=value``
    metadata (states files use this for the resource unit).
    """
    metadata: dict[str, str] = {}
    rows: list[tuple[int, list[str]]] = []
    header_seen = False
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh)
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if not header_seen:
                if row[0].lstrip().startswith("#"):
                    if not metadata_ok:
                        raise FileFormatError(
                            f"{path}: line {reader.line_num}: comment lines are "
                            f"not allowed in this file"
                        )
                    text = ",".join(row).lstrip().lstrip("#").strip()
                    if "=" in text:
                        key, value = text.split("=", 1)
                        metadata[key.strip()] = value.strip()
                    continue
                if [c.strip() for c in row] != list(columns):
                    raise FileFormatError(
                        f"{path}: line {reader.line_num}: expected header "
                        f"{','.join(columns)!r}, got {','.join(row)!r}"
                    )
                header_seen = True
                continue
            if len(row) != len(columns):
                raise FileFormatError(
                    f"{path}: line {reader.line_num}: expected {len(columns)} "
                    f"fields, got {len(row)}"
                )
            rows.append((reader.line_num, [c.strip() for c in row]))
    if not header_seen:
        raise FileFormatError(f"{path}: missing header {','.join(columns)!r}")
    return rows, metadata


def _float_field(path: str | Path, line: int, name: str, token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FileFormatError(
            f"{path}: line {line}: {name} must be a number, got {token!r}"
        ) from None
    if not math.isfinite(value):
        raise FileFormatError(f"{path}: line {line}: {name} must be finite")
    return value


def parse_states_csv(
    path: str | Path, *, require_accuracy: bool = True
) -> tuple[list[ModelState], str | None]:
    """States plus the optional resource-unit string echoed into reports.

    A blank accuracy cell is permitted only when ``require_accuracy`` is
    False (empirical workflows, where accuracy gets measured).
    """
    rows, metadata = _parse_csv(path, STATES_HEADER, metadata_ok=True)
    states: list[ModelState] = []
    for line, (model_id, resource_token, accuracy_token) in rows:
        if not model_id:
            raise FileFormatError(f"{path}: line {line}: empty model_id")
        resource = _float_field(path, line, "resource", resource_token)
        if resource <= 0:
            raise FileFormatError(
                f"{path}: line {line}: resource must be positive, got {resource}"
            )
        accuracy: float | None = None
        if accuracy_token:
            accuracy = _float_field(path, line, "accuracy", accuracy_token)
            if not 0.0 <= accuracy <= 1.0:
                raise FileFormatError(
                    f"{path}: line {line}: accuracy must lie in [0, 1], "
                    f"got {accuracy}"
                )
        elif require_accuracy:
            raise FileFormatError(
                f"{path}: line {line}: accuracy is required here (blank "
                f"accuracies are only allowed in empirical workflows)"
            )
        states.append(ModelState(model_id, resource, accuracy))
    if not states:
        raise FileFormatError(f"{path}: no states listed")
    return states, metadata.get("resource_unit")


def parse_correctness_csv(path: str | Path) -> list[tuple[str, str, bool]]:
    rows, _ = _parse_csv(path, CORRECTNESS_HEADER)
    records: list[tuple[str, str, bool]] = []
    for line, (instance_id, model_id, token) in rows:
        if not instance_id or not model_id:
            raise FileFormatError(f"{path}: line {line}: empty id field")
        flag = _BOOL_TOKENS.get(token.lower())
        if flag is None:
            raise FileFormatError(
                f"{path}: line {line}: correct must be one of 0, 1, true, "
                f"false; got {token!r}"
            )
        records.append((instance_id, model_id, flag))
    if not records:
        raise FileFormatError(f"{path}: no correctness records listed")
    return records


def parse_predictions_csv(path: str | Path) -> list[PredictionRecord]:
    rows, _ = _parse_csv(path, PREDICTIONS_HEADER)
    records = []
    for line, (instance_id, model_id, label) in rows:
        if not instance_id or not model_id:
            raise FileFormatError(f"{path}: line {line}: empty id field")
        records.append(PredictionRecord(instance_id, model_id, label))
    if not records:
        raise FileFormatError(f"{path}: no prediction records listed")
    return records


def parse_truth_csv(path: str | Path) -> dict[str, str]:
    rows, _ = _parse_csv(path, TRUTH_HEADER)
    truth: dict[str, str] = {}
    for line, (instance_id, label) in rows:
        if not instance_id:
            raise FileFormatError(f"{path}: line {line}: empty instance_id")
        if instance_id in truth:
            raise FileFormatError(
                f"{path}: line {line}: duplicate ground truth for "
                f"{instance_id!r}"
            )
        truth[instance_id] = label
    if not truth:
        raise FileFormatError(f"{path}: no ground-truth records listed")
    return truth


def parse_envelope_csv(path: str | Path) -> list[tuple[float, float]]:
    rows, _ = _parse_csv(path, ENVELOPE_HEADER)
    points = []
    for line, (resource_token, accuracy_token) in rows:
        resource = _float_field(path, line, "resource", resource_token)
        accuracy = _float_field(path, line, "accuracy", accuracy_token)
        points.append((resource, accuracy))
    if not points:
        raise FileFormatError(f"{path}: no envelope points listed")
    return points


def parse_alpha_profile_csv(path: str | Path) -> dict[int, float]:
    """Per-rank dependency coefficients, ranks counted from 2 upward."""
    rows, _ = _parse_csv(path, ALPHA_PROFILE_HEADER)
    profile: dict[int, float] = {}
    for line, (rank_token, alpha_token) in rows:
        try:
            rank = int(rank_token)
        except ValueError:
            raise FileFormatError(
                f"{path}: line {line}: rank must be an integer, got "
                f"{rank_token!r}"
            ) from None
        if rank < 2:
            raise FileFormatError(
                f"{path}: line {line}: rank must be at least 2, got {rank}"
            )
        if rank in profile:
            raise FileFormatError(
                f"{path}: line {line}: duplicate entry for rank {rank}"
            )
        alpha = _float_field(path, line, "alpha", alpha_token)
        if not 0.0 <= alpha <= 1.0:
            raise FileFormatError(
                f"{path}: line {line}: alpha must lie in [0, 1], got {alpha}"
            )
        profile[rank] = alpha
    if not profile:
        raise FileFormatError(f"{path}: no profile entries listed")
    return profile


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def labels_csv_text(labels: Iterable[Any]) -> str:
    """Rows from anything carrying the selection-label fields."""
    return _csv_text(
        LABELS_HEADER,
        (
            (l.instance_id, l.selected_model_id, str(l.selected_rank),
             "1" if l.correct else "0")
            for l in labels
        ),
    )


def correctness_csv_text(
    instance_ids: Sequence[str],
    model_ids: Sequence[str],
    cells: Sequence[Sequence[bool]],
) -> str:
    rows = (
        (iid, mid, "1" if cells[x][j] else "0")
        for x, iid in enumerate(instance_ids)
        for j, mid in enumerate(model_ids)
    )
    return _csv_text(CORRECTNESS_HEADER, rows)
