from __future__ import annotations

import numpy as np
import pytest

from oraclebound import CorrectnessMatrix, ModelState, StateSpace


def make_space(pairs, num_classes=None) -> StateSpace:
    """Space from (resource, accuracy) pairs or (id, resource, accuracy) triples."""
    states = []
    for i, entry in enumerate(pairs):
        if len(entry) == 3:
            model_id, resource, accuracy = entry
        else:
            resource, accuracy = entry
            model_id = f"m{i + 1}"
        states.append(ModelState(model_id, resource, accuracy))
    return StateSpace(tuple(states), num_classes=num_classes)


def make_matrix(rows, model_ids=None) -> CorrectnessMatrix:
    """Matrix from a list of per-instance boolean rows."""
    cells = np.asarray(rows, dtype=bool)
    n, m = cells.shape
    if model_ids is None:
        model_ids = tuple(f"m{j + 1}" for j in range(m))
    instance_ids = tuple(f"x{i + 1}" for i in range(n))
    return CorrectnessMatrix(instance_ids, tuple(model_ids), cells)


def random_space(rng: np.random.Generator, n: int, r_max: float = 100.0) -> StateSpace:
    resources = np.sort(rng.uniform(0.01, r_max, size=n))
    accuracies = np.sort(rng.uniform(0.0, 1.0, size=n))
    return make_space(list(zip(resources, accuracies)))


@pytest.fixture
def four_instance_matrix() -> CorrectnessMatrix:
    # Rows: both wrong; only the large model right; both right; both right.
    return make_matrix(
        [[False, False], [False, True], [True, True], [True, True]]
    )
