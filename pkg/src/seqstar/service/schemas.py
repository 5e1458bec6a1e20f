"""Pydantic request/response models for the verification service.

Model documents travel as raw JSON objects in the request body; structural
and dimension validation happens in the core loader, which reports precise
layer-indexed errors.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class SequencePayload(BaseModel):
    values: list[list[float]]
    label: int | None = None


class PerturbationPayload(BaseModel):
    kind: str
    epsilon_percent: float
    target_feature: int | None = None
    target_instance: int | None = None


class VerifyOptions(BaseModel):
    mode: str = "interval"
    falsifier_budget: int = 1000
    seed: int = 0
    split_budget: int = 10_000


class CampaignOptions(VerifyOptions):
    jobs: int = 1
    timing: str = "wall"
    target_feature: int = 0
    target_instance: int = 0


class InspectRequest(BaseModel):
    model: dict


class ForwardRequest(BaseModel):
    model: dict
    sequences: list[SequencePayload]


class VerifyRequest(BaseModel):
    model: dict
    sequence: SequencePayload
    perturbation: PerturbationPayload
    options: VerifyOptions = Field(default_factory=VerifyOptions)


class CampaignRequest(BaseModel):
    model: dict
    dataset: list[SequencePayload]
    kinds: list[str] = ["SFSI", "SFAI", "MFSI", "MFAI"]
    epsilons: list[float] = [50.0, 60.0, 70.0, 80.0, 90.0]
    options: CampaignOptions = Field(default_factory=CampaignOptions)


class HealthResponse(BaseModel):
    status: str
    version: str


class InspectResponse(BaseModel):
    name: str
    input_features: int
    output_classes: int
    summary: list[str]


class ForwardResponse(BaseModel):
    outputs: list[list[float]]
    predicted: list[int]


class VerdictResponse(BaseModel):
    sequence_index: int
    target_class: int
    outcome: str
    rv: int
    class_lower: list[float] | None
    class_upper: list[float] | None
    counterexample: list[list[float]] | None
    runtime: float
    reason: str | None


class CampaignResponse(BaseModel):
    report: dict
    csv: str
    table: str
