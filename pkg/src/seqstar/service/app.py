"""FastAPI application wrapping the verification core.

Campaigns can run for minutes on real models, so the service is the natural
multi-client front: submit the model and data inline, get the full report
(plus its rendered CSV and table) back. The CLI is a thin client of these
endpoints.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import SeqStarError
from ..network import SequenceTensor, forward_batch, maxID, network_from_dict
from ..perturb import PerturbationSpec
from ..reports import render_csv, render_table, report_to_dict, verdict_to_dict
from ..verify import check_local_robustness, run_campaign
from .schemas import (
    CampaignRequest,
    CampaignResponse,
    ForwardRequest,
    ForwardResponse,
    HealthResponse,
    InspectRequest,
    InspectResponse,
    VerdictResponse,
    VerifyRequest,
)

app = FastAPI(
    title="seqstar verification service",
    description="Star-set reachability robustness checks for LSTM and "
                "CNN-LSTM sequence classifiers.",
    version=__version__,
)


@app.exception_handler(SeqStarError)
async def seqstar_error_handler(request: Request, exc: SeqStarError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


def _sequences(payloads) -> list[SequenceTensor]:
    return [SequenceTensor(values=np.asarray(p.values, dtype=float),
                           label=p.label) for p in payloads]


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/model/inspect", response_model=InspectResponse)
def inspect_model(req: InspectRequest) -> InspectResponse:
    net = network_from_dict(req.model)
    return InspectResponse(
        name=net.name,
        input_features=net.input_features,
        output_classes=net.output_dim,
        summary=net.summary_lines(),
    )


@app.post("/forward", response_model=ForwardResponse)
def forward_sequences(req: ForwardRequest) -> ForwardResponse:
    net = network_from_dict(req.model)
    outputs = []
    predicted = []
    for seq in _sequences(req.sequences):
        out = forward_batch(net, seq.values[None, :, :])[0]
        outputs.append([float(x) for x in out])
        predicted.append(maxID(out))
    return ForwardResponse(outputs=outputs, predicted=predicted)


@app.post("/verify", response_model=VerdictResponse)
def verify_sequence(req: VerifyRequest) -> VerdictResponse:
    net = network_from_dict(req.model)
    seq = _sequences([req.sequence])[0]
    spec = PerturbationSpec(
        kind=req.perturbation.kind,
        epsilon_percent=req.perturbation.epsilon_percent,
        target_feature=req.perturbation.target_feature,
        target_instance=req.perturbation.target_instance,
    )
    verdict = check_local_robustness(
        net, seq, spec,
        mode=req.options.mode,
        falsifier_budget=req.options.falsifier_budget,
        rng=np.random.default_rng(req.options.seed),
        split_budget=req.options.split_budget,
    )
    return VerdictResponse(**verdict_to_dict(verdict))


@app.post("/campaign", response_model=CampaignResponse)
def campaign(req: CampaignRequest) -> CampaignResponse:
    net = network_from_dict(req.model)
    report = run_campaign(
        net, _sequences(req.dataset),
        kinds=tuple(req.kinds),
        epsilons=tuple(req.epsilons),
        mode=req.options.mode,
        falsifier_budget=req.options.falsifier_budget,
        seed=req.options.seed,
        split_budget=req.options.split_budget,
        jobs=req.options.jobs,
        target_feature=req.options.target_feature,
        target_instance=req.options.target_instance,
        timing=req.options.timing,
    )
    return CampaignResponse(report=report_to_dict(report),
                            csv=render_csv(report),
                            table=render_table(report))
