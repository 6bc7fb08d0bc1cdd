"""Pydantic request and response models for the analysis service.

Reports share a common base (tool version, input digests, validated space
echo, warnings) and carry per-command result sections.  Field order here is
the key order of emitted JSON, so it is part of the output contract.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class SchemaModel(BaseModel):
    model_config = ConfigDict(protected_namespaces=(), extra="forbid")


class FileDigest(SchemaModel):
    path: str
    sha256: str


class StateIn(SchemaModel):
    model_id: str
    resource: float
    accuracy: float | None = None


class StateOut(SchemaModel):
    model_id: str
    resource: float
    accuracy: float | None


class SpaceEcho(SchemaModel):
    num_states: int
    num_classes: int | None
    resource_unit: str | None
    states: list[StateOut]


class OutcomeOut(SchemaModel):
    r_oracle: float
    a_oracle: float
    delta_r: float
    delta_a: float
    r_ratio: float
    selection_freq: list[float] | None


class AlphaEntry(SchemaModel):
    rank: int
    alpha: float | None


class AlphaOut(SchemaModel):
    by_rank: list[AlphaEntry]
    alpha_min: float | None
    alpha_max: float | None
    undefined_ranks: list[int]


class ReportBase(SchemaModel):
    tool_version: str
    command: str
    inputs: list[FileDigest]
    resource_unit: str | None
    state_space: SpaceEcho | None
    warnings: list[str]


# ---------------------------------------------------------------- bounds


class BoundsRequest(SchemaModel):
    states: list[StateIn]
    alpha: float | None = None
    alpha_profile: dict[int, float] | None = None
    classes: int | None = None
    prune_dominated: bool = False
    resource_unit: str | None = None
    inputs: list[FileDigest] = Field(default_factory=list)


class ConstantAlphaOut(SchemaModel):
    alpha: float
    outcome: OutcomeOut


class ProfileOut(SchemaModel):
    alpha_by_rank: list[AlphaEntry]
    outcome: OutcomeOut


class BoundsResults(SchemaModel):
    conservative: OutcomeOut
    constant_alpha: ConstantAlphaOut | None
    profile: ProfileOut | None


class BoundsReport(ReportBase):
    results: BoundsResults


# ------------------------------------------------------------- empirical


class CorrectnessCell(SchemaModel):
    instance_id: str
    model_id: str
    correct: bool


class PredictionIn(SchemaModel):
    instance_id: str
    model_id: str
    label: str


class EmpiricalRequest(SchemaModel):
    states: list[StateIn]
    correctness: list[CorrectnessCell] | None = None
    predictions: list[PredictionIn] | None = None
    truth: dict[str, str] | None = None
    prune_dominated: bool = False
    keep_supplied_accuracies: bool = False
    include_labels: bool = False
    resource_unit: str | None = None
    inputs: list[FileDigest] = Field(default_factory=list)


class LabelOut(SchemaModel):
    instance_id: str
    selected_model_id: str
    selected_rank: int
    correct: bool


class EmpiricalResults(SchemaModel):
    num_instances: int
    measured_accuracies: list[float]
    error_cascade: list[float]
    alpha: AlphaOut
    oracle: OutcomeOut


class EmpiricalReport(ReportBase):
    results: EmpiricalResults
    labels: list[LabelOut] | None


# ---------------------------------------------------------------- design


class SubsetRequest(SchemaModel):
    states: list[StateIn]
    k: int
    greedy: bool = False
    prune_dominated: bool = False
    resource_unit: str | None = None
    inputs: list[FileDigest] = Field(default_factory=list)


class PlanOut(SchemaModel):
    k: int
    chosen_ranks: list[int]
    chosen_model_ids: list[str]
    r_oracle: float
    r_ratio: float
    marginal_utility: float | None


class SubsetResults(SchemaModel):
    method: Literal["optimal", "greedy"]
    plans: list[PlanOut]


class SubsetReport(ReportBase):
    results: SubsetResults


class R1Request(SchemaModel):
    states: list[StateIn]
    classes: int
    prune_dominated: bool = False
    resource_unit: str | None = None
    inputs: list[FileDigest] = Field(default_factory=list)


class R1Results(SchemaModel):
    admissible: bool
    threshold: float | None
    threshold_from_largest: float | None
    r_oracle: float
    r_oracle_random_guess: float
    direct_admissible: bool


class R1Report(ReportBase):
    results: R1Results


class EnvelopePointIn(SchemaModel):
    resource: float
    accuracy: float


class ContinuousRequest(SchemaModel):
    envelope: list[EnvelopePointIn]
    resource_unit: str | None = None
    inputs: list[FileDigest] = Field(default_factory=list)


class ContinuousResults(SchemaModel):
    num_points: int
    outcome: OutcomeOut


class ContinuousReport(ReportBase):
    results: ContinuousResults


# ----------------------------------------------------------------- synth


class SynthRequest(SchemaModel):
    accuracies: list[float]
    n_instances: int
    mode: Literal["nested", "independent", "alpha_target"] = "nested"
    alpha_target: float | None = None
    seed: int = 0


class SynthSpecEcho(SchemaModel):
    accuracies: list[float]
    n_instances: int
    mode: str
    alpha_target: float | None
    seed: int


class SynthAchieved(SchemaModel):
    accuracies: list[float]
    alpha_by_rank: list[AlphaEntry]
    alpha_min: float | None
    alpha_max: float | None
    mix_rate: float | None
    target_met: bool


class SynthMetadata(SchemaModel):
    tool_version: str
    spec: SynthSpecEcho
    rng: str
    achieved: SynthAchieved
    warnings: list[str]


class SynthResponse(SchemaModel):
    instance_ids: list[str]
    model_ids: list[str]
    cells: list[list[bool]]
    metadata: SynthMetadata


# ------------------------------------------------------------ plot series


class PlotRequest(SchemaModel):
    states: list[StateIn]
    correctness: list[CorrectnessCell] | None = None
    alpha: float | None = None
    k_max: int | None = None
    prune_dominated: bool = False
    resource_unit: str | None = None
    inputs: list[FileDigest] = Field(default_factory=list)


class BoundLinePoint(SchemaModel):
    alpha: float
    r_oracle: float
    a_oracle: float


class SubsetCurvePoint(SchemaModel):
    k: int
    r_oracle: float
    r_ratio: float


class PlotResults(SchemaModel):
    bound_line: list[BoundLinePoint]
    alpha_by_rank: list[AlphaEntry] | None
    subset_curve: list[SubsetCurvePoint]
    subset_method: Literal["optimal", "greedy"]


class PlotReport(ReportBase):
    results: PlotResults
