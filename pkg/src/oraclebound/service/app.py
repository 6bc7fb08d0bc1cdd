"""FastAPI facade over the analysis package.

Every endpoint is a pure request-to-report function; the CLI calls the same
functions in-process, so the HTTP layer adds no behavior of its own.
"""

from __future__ import annotations

import math

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..bounds import (
    oracle_conservative,
    oracle_constant_alpha,
    oracle_from_alpha_profile,
    space_vectors,
)
from ..core import (
    AlphaProfile,
    CorrectnessMatrix,
    ModelState,
    OracleOutcome,
    StateSpace,
    validate_state_space,
)
from ..design import (
    continuous_bound,
    greedy_growth,
    optimal_subsets,
    pareto_staircase,
    smallest_state_admissible,
)
from ..empirical import (
    PredictionRecord,
    build_correctness,
    estimate_alpha,
    estimate_cascade,
    matrix_from_records,
    measured_accuracies,
    resolve_accuracies,
    simulate_oracle,
)
from ..errors import OracleBoundError, SpaceValidationError
from ..synth import RNG_ALGORITHM, SynthSpec, generate
from . import schemas as sc

#: Above this size the full-curve subset problem falls back to greedy growth.
_MAX_EXACT_CURVE_STATES = 200


def _raw_states(states: list[sc.StateIn]) -> list[ModelState]:
    if not states:
        raise SpaceValidationError("no states provided")
    return [ModelState(s.model_id, s.resource, s.accuracy) for s in states]


def _build_space(
    states: list[sc.StateIn],
    prune_dominated: bool,
    num_classes: int | None = None,
) -> tuple[StateSpace, list[str]]:
    raw = _raw_states(states)
    policy = "prune_dominated" if prune_dominated else "reject"
    space = validate_state_space(raw, policy, num_classes=num_classes)
    warnings: list[str] = []
    dropped = sorted({s.model_id for s in raw} - set(space.model_ids))
    if dropped:
        warnings.append(f"pruned dominated states: {', '.join(dropped)}")
    return space, warnings


def _space_echo(space: StateSpace, resource_unit: str | None) -> sc.SpaceEcho:
    return sc.SpaceEcho(
        num_states=len(space),
        num_classes=space.num_classes,
        resource_unit=resource_unit,
        states=[
            sc.StateOut(model_id=s.model_id, resource=s.resource, accuracy=s.accuracy)
            for s in space.states
        ],
    )


def _outcome_out(outcome: OracleOutcome) -> sc.OutcomeOut:
    return sc.OutcomeOut(
        r_oracle=outcome.r_oracle,
        a_oracle=outcome.a_oracle,
        delta_r=outcome.delta_r,
        delta_a=outcome.delta_a,
        r_ratio=outcome.r_ratio,
        selection_freq=(
            None if outcome.selection_freq is None else list(outcome.selection_freq)
        ),
    )


def _alpha_out(profile: AlphaProfile) -> sc.AlphaOut:
    return sc.AlphaOut(
        by_rank=[sc.AlphaEntry(rank=r, alpha=v) for r, v in profile.by_rank()],
        alpha_min=profile.alpha_min,
        alpha_max=profile.alpha_max,
        undefined_ranks=list(profile.undefined_ranks),
    )


def _profile_from_mapping(mapping: dict[int, float], n: int) -> AlphaProfile:
    expected = set(range(2, n + 1))
    given = set(mapping)
    missing = sorted(expected - given)
    extra = sorted(given - expected)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing ranks {missing}")
        if extra:
            parts.append(f"unexpected ranks {extra}")
        raise SpaceValidationError(
            f"alpha profile must cover ranks 2..{n} exactly: {'; '.join(parts)}"
        )
    return AlphaProfile(tuple(mapping[r] for r in range(2, n + 1)))


# ------------------------------------------------------------------ bounds


def compute_bounds(req: sc.BoundsRequest) -> sc.BoundsReport:
    """Closed-form opportunity bounds: the conservative bound always, plus
    constant-alpha and per-rank-profile bounds when requested."""
    space, warnings = _build_space(req.states, req.prune_dominated, req.classes)
    conservative = oracle_conservative(space)
    constant = None
    if req.alpha is not None:
        constant = sc.ConstantAlphaOut(
            alpha=req.alpha,
            outcome=_outcome_out(oracle_constant_alpha(space, req.alpha)),
        )
    profile_out = None
    if req.alpha_profile is not None:
        profile = _profile_from_mapping(req.alpha_profile, len(space))
        profile_out = sc.ProfileOut(
            alpha_by_rank=[
                sc.AlphaEntry(rank=r, alpha=v) for r, v in profile.by_rank()
            ],
            outcome=_outcome_out(oracle_from_alpha_profile(space, profile)),
        )
    return sc.BoundsReport(
        tool_version=__version__,
        command="bounds",
        inputs=req.inputs,
        resource_unit=req.resource_unit,
        state_space=_space_echo(space, req.resource_unit),
        warnings=warnings,
        results=sc.BoundsResults(
            conservative=_outcome_out(conservative),
            constant_alpha=constant,
            profile=profile_out,
        ),
    )


# --------------------------------------------------------------- empirical


def _empirical_matrix(
    req: sc.EmpiricalRequest, pre_space: StateSpace
) -> CorrectnessMatrix:
    has_cells = req.correctness is not None
    has_predictions = req.predictions is not None or req.truth is not None
    if has_cells == has_predictions:
        raise SpaceValidationError(
            "provide exactly one of: correctness records, or predictions "
            "plus ground truth"
        )
    if has_cells:
        return matrix_from_records(
            [(c.instance_id, c.model_id, c.correct) for c in req.correctness],
            pre_space,
        )
    if req.predictions is None or req.truth is None:
        raise SpaceValidationError(
            "predictions and truth must be supplied together"
        )
    return build_correctness(
        [PredictionRecord(p.instance_id, p.model_id, p.label) for p in req.predictions],
        req.truth,
        pre_space,
    )


def compute_empirical(req: sc.EmpiricalRequest) -> sc.EmpiricalReport:
    """Measured accuracies, failure cascade, dependency profile, and the
    exact selector outcome for per-instance correctness data."""
    raw = _raw_states(req.states)
    pre_space = StateSpace(tuple(sorted(raw, key=lambda s: (s.resource, s.model_id))))
    matrix0 = _empirical_matrix(req, pre_space)
    resolved, warnings = resolve_accuracies(
        pre_space, matrix0, keep_supplied=req.keep_supplied_accuracies
    )
    policy = "prune_dominated" if req.prune_dominated else "reject"
    space = validate_state_space(resolved, policy)
    dropped = sorted(set(pre_space.model_ids) - set(space.model_ids))
    if dropped:
        warnings.append(
            f"pruned dominated states: {', '.join(dropped)} "
            f"(their records are ignored)"
        )
    matrix = matrix0.select_models(space.model_ids)
    measured = measured_accuracies(matrix)
    cascade = estimate_cascade(matrix)
    profile = estimate_alpha(matrix)
    outcome, labels = simulate_oracle(matrix, space)
    if len(space) > 1 and not profile.defined:
        warnings.append(
            "every dependency coefficient is undefined (no model beyond the "
            "cheapest made an error)"
        )
    return sc.EmpiricalReport(
        tool_version=__version__,
        command="empirical",
        inputs=req.inputs,
        resource_unit=req.resource_unit,
        state_space=_space_echo(space, req.resource_unit),
        warnings=warnings,
        results=sc.EmpiricalResults(
            num_instances=matrix.num_instances,
            measured_accuracies=list(measured),
            error_cascade=list(cascade.p),
            alpha=_alpha_out(profile),
            oracle=_outcome_out(outcome),
        ),
        labels=(
            [
                sc.LabelOut(
                    instance_id=l.instance_id,
                    selected_model_id=l.selected_model_id,
                    selected_rank=l.selected_rank,
                    correct=l.correct,
                )
                for l in labels
            ]
            if req.include_labels
            else None
        ),
    )


# ------------------------------------------------------------------ design


def _plan_out(plan) -> sc.PlanOut:
    return sc.PlanOut(
        k=plan.k,
        chosen_ranks=list(plan.chosen_ranks),
        chosen_model_ids=list(plan.chosen_model_ids),
        r_oracle=plan.r_oracle,
        r_ratio=plan.r_ratio,
        marginal_utility=plan.marginal_utility,
    )


def compute_subset(req: sc.SubsetRequest) -> sc.SubsetReport:
    """Best sub-spaces of sizes 1..k, exact by default, greedy on request."""
    space, warnings = _build_space(req.states, req.prune_dominated)
    plans = (
        greedy_growth(space, req.k) if req.greedy else optimal_subsets(space, req.k)
    )
    return sc.SubsetReport(
        tool_version=__version__,
        command="design-subset",
        inputs=req.inputs,
        resource_unit=req.resource_unit,
        state_space=_space_echo(space, req.resource_unit),
        warnings=warnings,
        results=sc.SubsetResults(
            method="greedy" if req.greedy else "optimal",
            plans=[_plan_out(p) for p in plans],
        ),
    )


def compute_r1(req: sc.R1Request) -> sc.R1Report:
    """Is the cheapest state worth its cost, against a free random guesser."""
    space, warnings = _build_space(req.states, req.prune_dominated, req.classes)
    check = smallest_state_admissible(space)
    threshold = check.threshold if math.isfinite(check.threshold) else None
    threshold_largest = (
        check.threshold_from_largest
        if math.isfinite(check.threshold_from_largest)
        else None
    )
    if threshold is None:
        warnings.append(
            "admissibility threshold is unbounded (degenerate accuracy span); "
            "reported as null"
        )
    return sc.R1Report(
        tool_version=__version__,
        command="design-r1",
        inputs=req.inputs,
        resource_unit=req.resource_unit,
        state_space=_space_echo(space, req.resource_unit),
        warnings=warnings,
        results=sc.R1Results(
            admissible=check.admissible,
            threshold=threshold,
            threshold_from_largest=threshold_largest,
            r_oracle=check.r_oracle,
            r_oracle_random_guess=check.r_oracle_random_guess,
            direct_admissible=check.r_oracle < check.r_oracle_random_guess,
        ),
    )


def compute_continuous(req: sc.ContinuousRequest) -> sc.ContinuousReport:
    """Cost limit along a piecewise-linear frontier through the points."""
    points = [(p.resource, p.accuracy) for p in req.envelope]
    if not points:
        raise SpaceValidationError("no envelope points provided")
    envelope = pareto_staircase(points)
    warnings = []
    if len(envelope) < len(points):
        warnings.append(
            f"dropped {len(points) - len(envelope)} dominated or duplicate "
            f"envelope points"
        )
    outcome = continuous_bound(envelope)
    return sc.ContinuousReport(
        tool_version=__version__,
        command="design-continuous",
        inputs=req.inputs,
        resource_unit=req.resource_unit,
        state_space=None,
        warnings=warnings,
        results=sc.ContinuousResults(
            num_points=len(envelope),
            outcome=_outcome_out(outcome),
        ),
    )


# ------------------------------------------------------------------- synth


def compute_synth(req: sc.SynthRequest) -> sc.SynthResponse:
    """Generate a synthetic correctness matrix plus its measured statistics."""
    spec = SynthSpec(
        accuracies=tuple(req.accuracies),
        n_instances=req.n_instances,
        mode=req.mode,
        alpha_target=req.alpha_target,
        seed=req.seed,
    )
    matrix, stats = generate(spec)
    return sc.SynthResponse(
        instance_ids=list(matrix.instance_ids),
        model_ids=list(matrix.model_ids),
        cells=[[bool(v) for v in row] for row in matrix.cells],
        metadata=sc.SynthMetadata(
            tool_version=__version__,
            spec=sc.SynthSpecEcho(
                accuracies=list(spec.accuracies),
                n_instances=spec.n_instances,
                mode=spec.mode,
                alpha_target=spec.alpha_target,
                seed=spec.seed,
            ),
            rng=RNG_ALGORITHM,
            achieved=sc.SynthAchieved(
                accuracies=list(stats.accuracies),
                alpha_by_rank=[
                    sc.AlphaEntry(rank=j + 2, alpha=v)
                    for j, v in enumerate(stats.alpha)
                ],
                alpha_min=stats.alpha_min,
                alpha_max=stats.alpha_max,
                mix_rate=stats.mix_rate,
                target_met=stats.target_met,
            ),
            warnings=list(stats.warnings),
        ),
    )


# ------------------------------------------------------------- plot series


def compute_plot_series(req: sc.PlotRequest) -> sc.PlotReport:
    """Plot-ready series: the achievable-bound segment, per-rank dependency
    coefficients, and the subset-size efficiency curve."""
    space, warnings = _build_space(req.states, req.prune_dominated)
    resources, accuracies = space_vectors(space)
    conservative = oracle_conservative(space)
    if len(space) >= 2:
        optimistic = oracle_constant_alpha(space, 0.0)
        line = [
            sc.BoundLinePoint(
                alpha=0.0, r_oracle=optimistic.r_oracle, a_oracle=optimistic.a_oracle
            )
        ]
    else:
        line = [
            sc.BoundLinePoint(
                alpha=0.0,
                r_oracle=conservative.r_oracle,
                a_oracle=conservative.a_oracle,
            )
        ]
    if req.alpha is not None and 0.0 < req.alpha < 1.0:
        mid = oracle_constant_alpha(space, req.alpha)
        line.append(
            sc.BoundLinePoint(
                alpha=req.alpha, r_oracle=mid.r_oracle, a_oracle=mid.a_oracle
            )
        )
    line.append(
        sc.BoundLinePoint(
            alpha=1.0,
            r_oracle=conservative.r_oracle,
            a_oracle=conservative.a_oracle,
        )
    )

    alpha_by_rank = None
    if req.correctness is not None:
        raw = _raw_states(req.states)
        pre_space = StateSpace(
            tuple(sorted(raw, key=lambda s: (s.resource, s.model_id)))
        )
        matrix = matrix_from_records(
            [(c.instance_id, c.model_id, c.correct) for c in req.correctness],
            pre_space,
        ).select_models(space.model_ids)
        profile = estimate_alpha(matrix)
        alpha_by_rank = [
            sc.AlphaEntry(rank=r, alpha=v) for r, v in profile.by_rank()
        ]

    k_max = min(req.k_max, len(space)) if req.k_max else len(space)
    if k_max < 1:
        raise SpaceValidationError(f"k_max must be at least 1, got {req.k_max}")
    if len(space) <= _MAX_EXACT_CURVE_STATES:
        plans, method = optimal_subsets(space, k_max), "optimal"
    else:
        plans, method = greedy_growth(space, k_max), "greedy"
        warnings.append(
            f"state space has more than {_MAX_EXACT_CURVE_STATES} states; "
            f"subset curve uses greedy growth"
        )
    curve = [
        sc.SubsetCurvePoint(k=p.k, r_oracle=p.r_oracle, r_ratio=p.r_ratio)
        for p in plans
    ]
    return sc.PlotReport(
        tool_version=__version__,
        command="plot-series",
        inputs=req.inputs,
        resource_unit=req.resource_unit,
        state_space=_space_echo(space, req.resource_unit),
        warnings=warnings,
        results=sc.PlotResults(
            bound_line=line,
            alpha_by_rank=alpha_by_rank,
            subset_curve=curve,
            subset_method=method,
        ),
    )


ROUTES = [
    ("/v1/bounds", compute_bounds, sc.BoundsReport),
    ("/v1/empirical", compute_empirical, sc.EmpiricalReport),
    ("/v1/design/subset", compute_subset, sc.SubsetReport),
    ("/v1/design/r1", compute_r1, sc.R1Report),
    ("/v1/design/continuous", compute_continuous, sc.ContinuousReport),
    ("/v1/synth", compute_synth, sc.SynthResponse),
    ("/v1/plot-series", compute_plot_series, sc.PlotReport),
]

HANDLERS = {path: handler for path, handler, _ in ROUTES}
RESPONSE_MODELS = {path: model for path, _, model in ROUTES}


def create_app() -> FastAPI:
    app = FastAPI(
        title="oraclebound",
        version=__version__,
        description=(
            "Adaptive-inference opportunity analysis: ideal-selector bounds, "
            "empirical estimation from correctness records, and state-space "
            "design tools."
        ),
    )

    @app.exception_handler(OracleBoundError)
    async def _domain_error(request, exc: OracleBoundError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    for path, handler, response_model in ROUTES:
        app.post(path, response_model=response_model)(handler)

    @app.get("/v1/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "version": __version__}

    return app


app = create_app()
