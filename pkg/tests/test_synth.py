from __future__ import annotations

import numpy as np
import pytest

from oraclebound import (
    SpaceValidationError,
    SynthSpec,
    estimate_alpha,
    estimate_cascade,
    generate,
    oracle_from_cascade,
    simulate_oracle,
)
from oraclebound.fileio import correctness_csv_text

from conftest import make_space


class TestSpec:
    def test_accuracies_must_be_sorted(self):
        with pytest.raises(SpaceValidationError, match="non-decreasing"):
            SynthSpec((0.9, 0.8), 10)

    def test_accuracies_must_be_probabilities(self):
        with pytest.raises(SpaceValidationError, match=r"\[0, 1\]"):
            SynthSpec((0.5, 1.2), 10)

    def test_positive_instance_count(self):
        with pytest.raises(SpaceValidationError, match="n_instances"):
            SynthSpec((0.5,), 0)

    def test_alpha_target_requires_value(self):
        with pytest.raises(SpaceValidationError, match="alpha_target"):
            SynthSpec((0.5, 0.6), 10, mode="alpha_target")

    def test_alpha_target_requires_two_models(self):
        with pytest.raises(SpaceValidationError, match="two models"):
            SynthSpec((0.5,), 10, mode="alpha_target", alpha_target=0.5)


class TestNestedMode:
    def test_dependency_coefficients_are_one(self):
        matrix, stats = generate(SynthSpec((0.8, 0.9), 100_000, seed=7))
        assert stats.alpha == (1.0,)
        assert stats.accuracies[0] == pytest.approx(0.8, abs=0.01)
        assert stats.accuracies[1] == pytest.approx(0.9, abs=0.01)

    def test_all_defined_coefficients_are_one_or_undefined(self):
        rng = np.random.default_rng(0)
        for seed in range(10):
            n = int(rng.integers(1, 300))
            m = int(rng.integers(1, 6))
            accuracies = tuple(np.sort(rng.uniform(0, 1, size=m)))
            matrix, stats = generate(
                SynthSpec(accuracies, n, mode="nested", seed=seed)
            )
            assert all(v in (None, 1.0) for v in stats.alpha)

    def test_single_perfect_instance(self):
        matrix, stats = generate(SynthSpec((1.0,), 1, seed=3))
        assert matrix.cells.tolist() == [[True]]
        assert stats.accuracies == (1.0,)


class TestIndependentMode:
    def test_half_accuracy_gives_half_dependency(self):
        matrix, stats = generate(
            SynthSpec((0.5, 0.5), 100_000, mode="independent", seed=21)
        )
        assert stats.alpha[0] == pytest.approx(0.5, abs=0.02)

    def test_direct_count_agrees(self):
        matrix, stats = generate(
            SynthSpec((0.6, 0.7), 20_000, mode="independent", seed=5)
        )
        wrong = ~matrix.cells
        both = np.logical_and(wrong[:, 0], wrong[:, 1]).sum()
        assert stats.alpha[0] == both / wrong[:, 1].sum()


class TestAlphaTargetMode:
    def test_reaches_reachable_target(self):
        spec = SynthSpec(
            (0.7, 0.8, 0.9), 10_000, mode="alpha_target",
            alpha_target=0.75, seed=42,
        )
        _, stats = generate(spec)
        assert stats.target_met
        assert stats.alpha_min == pytest.approx(0.75, abs=0.05)
        assert stats.mix_rate is not None and 0.0 < stats.mix_rate < 1.0

    def test_accuracies_preserved_under_mixing(self):
        spec = SynthSpec(
            (0.6, 0.8), 50_000, mode="alpha_target", alpha_target=0.7, seed=1
        )
        _, stats = generate(spec)
        assert stats.accuracies[0] == pytest.approx(0.6, abs=0.01)
        assert stats.accuracies[1] == pytest.approx(0.8, abs=0.01)

    def test_unreachable_target_reports_closest(self):
        spec = SynthSpec(
            (0.99, 0.995), 200, mode="alpha_target", alpha_target=0.0, seed=9
        )
        _, stats = generate(spec)
        assert not stats.target_met
        assert stats.warnings and "closest achieved" in stats.warnings[0]


class TestDeterminism:
    def test_identical_specs_identical_bytes(self):
        spec = SynthSpec((0.8, 0.9), 1000, mode="nested", seed=42)
        a_matrix, _ = generate(spec)
        b_matrix, _ = generate(spec)
        a_text = correctness_csv_text(
            a_matrix.instance_ids, a_matrix.model_ids, a_matrix.cells
        )
        b_text = correctness_csv_text(
            b_matrix.instance_ids, b_matrix.model_ids, b_matrix.cells
        )
        assert a_text == b_text

    def test_different_seeds_differ(self):
        a_matrix, _ = generate(SynthSpec((0.5, 0.6), 500, seed=1))
        b_matrix, _ = generate(SynthSpec((0.5, 0.6), 500, seed=2))
        assert a_matrix.cells.tolist() != b_matrix.cells.tolist()


class TestKeystoneEquivalence:
    def test_simulation_matches_formula_for_all_modes(self):
        rng = np.random.default_rng(77)
        for seed in range(60):
            m = int(rng.integers(1, 9))
            n = int(rng.integers(1, 1001))
            accuracies = tuple(np.sort(rng.uniform(0, 1, size=m)))
            mode = ("nested", "independent", "alpha_target")[seed % 3]
            target = float(rng.uniform(0.2, 1.0)) if mode == "alpha_target" else None
            if mode == "alpha_target" and m < 2:
                mode = "nested"
                target = None
            matrix, stats = generate(
                SynthSpec(accuracies, n, mode=mode, alpha_target=target, seed=seed)
            )
            # Sampling noise can invert close measured accuracies; put the
            # columns into measured order so the space validates.
            order = np.argsort(stats.accuracies, kind="stable")
            matrix = matrix.select_models([matrix.model_ids[j] for j in order])
            measured = [stats.accuracies[j] for j in order]
            resources = tuple(np.sort(rng.uniform(0.1, 100, size=m)))
            space = make_space(
                [
                    (matrix.model_ids[j], resources[j], measured[j])
                    for j in range(m)
                ]
            )
            simulated, _ = simulate_oracle(matrix, space)
            formula = oracle_from_cascade(space, estimate_cascade(matrix))
            scale = max(1.0, resources[-1])
            assert abs(simulated.r_oracle - formula.r_oracle) <= 1e-12 * scale
            assert simulated.a_oracle == formula.a_oracle
