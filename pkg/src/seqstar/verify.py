"""Local robustness decisions, falsification, and campaign aggregation.

A verdict is three-valued: "robust" comes from the reachable-set separation
test (lower bound of the target class at least the upper bound of every
other class, ties counting as robust), "non_robust" requires a concrete
misclassifying counterexample inside the perturbation set, and everything
else is "unknown". Over-approximate modes therefore never report
non-robustness without a witness.

Campaigns iterate perturbation kinds and epsilon values over the correctly
classified part of a dataset, aggregate percentage robustness (PR, binary
verdict counts scaled to 100) and summed runtimes, and are deterministic for
a fixed seed at any parallelism degree: each task derives its own RNG from
the campaign seed and its (kind, epsilon, sequence) coordinates.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelFormatError, SeqStarError
from .network import NetworkSpec, SequenceTensor, forward, forward_batch, \
    maxID, reach
from .perturb import KINDS, PerturbationSpec, build_star, delta_for, \
    sample_inputs
from .stars import range_of

OUTCOMES = ("robust", "non_robust", "unknown")
_FALSIFY_CHUNK = 128


@dataclass(frozen=True)
class Verdict:
    """Outcome of one local robustness check."""

    sequence_index: int
    target_class: int
    outcome: str
    class_lower: np.ndarray | None
    class_upper: np.ndarray | None
    counterexample: SequenceTensor | None
    runtime: float
    reason: str | None = None

    @property
    def rv(self) -> int:
        """Binary robustness value: 1 iff verified robust."""
        return 1 if self.outcome == "robust" else 0


@dataclass(frozen=True)
class CellStats:
    """Aggregates for one (kind, epsilon) campaign cell."""

    kind: str
    epsilon_percent: float
    n_total: int
    n_robust: int
    n_non_robust: int
    n_unknown: int
    sum_runtime: float

    @property
    def pr(self) -> float:
        return 100.0 * self.n_robust / self.n_total if self.n_total else 0.0


@dataclass(frozen=True)
class CampaignReport:
    """Everything a campaign produced, plus the effective configuration."""

    model_name: str
    kinds: tuple[str, ...]
    epsilons: tuple[float, ...]
    mode: str
    seed: int
    falsifier_budget: int
    split_budget: int
    target_feature: int
    target_instance: int
    timing: str
    n_dataset: int
    n_correct: int
    cells: dict = field(default_factory=dict)      # (kind, eps) -> CellStats
    verdicts: dict = field(default_factory=dict)   # (kind, eps) -> [Verdict]
    delta_rule: str = "epsilon percent of |per-feature sequence mean|"


def falsify(net: NetworkSpec, seq: SequenceTensor, spec: PerturbationSpec,
            budget: int, rng: np.random.Generator) -> SequenceTensor | None:
    """Search the perturbation box for a misclassifying concrete sequence.

    Tries single-cell extremes first, then random corners, then uniform
    interior points, spending at most ``budget`` forward evaluations.
    """
    if budget <= 0:
        return None
    target = maxID(forward(net, seq))
    remaining = budget

    def misclassified(batch: np.ndarray) -> SequenceTensor | None:
        outs = forward_batch(net, batch)
        hits = np.flatnonzero(np.argmax(outs, axis=1) != target)
        if hits.size:
            return SequenceTensor(values=batch[hits[0]], label=seq.label)
        return None

    extremes = []
    for f, t in spec.support(seq.n_features, seq.t_s):
        delta = delta_for(seq, spec, f)
        if delta == 0.0:
            continue
        for sign in (1.0, -1.0):
            cand = seq.values.copy()
            cand[f, t] += sign * delta
            extremes.append(cand)
    if extremes:
        batch = np.stack(extremes[:remaining])
        remaining -= batch.shape[0]
        hit = misclassified(batch)
        if hit is not None:
            return hit

    for corners in (True, False):
        while remaining > 0:
            count = min(_FALSIFY_CHUNK, remaining)
            batch = sample_inputs(seq, spec, count, rng, corners=corners)
            remaining -= count
            hit = misclassified(batch)
            if hit is not None:
                return hit
            if corners and remaining <= budget // 2:
                break  # keep half the budget for interior sampling
    return None


def _class_envelope(union):
    boxes = [range_of(member) for member in union.members]
    lo = np.min([b.lower for b in boxes], axis=0)
    hi = np.max([b.upper for b in boxes], axis=0)
    return lo, hi, boxes


def check_local_robustness(
    net: NetworkSpec,
    seq: SequenceTensor,
    spec: PerturbationSpec,
    mode: str = "interval",
    falsifier_budget: int = 1000,
    rng: np.random.Generator | None = None,
    split_budget: int = 10_000,
    union_rule: str | None = None,
    sequence_index: int = 0,
) -> Verdict:
    """Decide robustness of one sequence against one perturbation spec.

    The caller is expected to pre-filter to correctly classified sequences;
    the target class is the model's prediction on the unperturbed input.
    ``union_rule`` is "envelope" or "per_member"; the default uses the
    per-member test for exact unions (each member is genuinely reachable)
    and the envelope otherwise.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if union_rule is None:
        union_rule = "per_member" if mode == "exact_relu" else "envelope"
    start = time.perf_counter()
    target = maxID(forward(net, seq))
    try:
        star = build_star(seq, spec)
        union = reach(net, star, mode=mode, split_budget=split_budget)
        lo, hi, boxes = _class_envelope(union)
    except SeqStarError as exc:
        return Verdict(sequence_index=sequence_index, target_class=target,
                       outcome="unknown", class_lower=None, class_upper=None,
                       counterexample=None,
                       runtime=time.perf_counter() - start,
                       reason=f"error: {exc}")
    others = np.arange(lo.size) != target
    if not others.any():
        robust = True  # a single-class head has no competitor
    elif union_rule == "per_member":
        robust = all(b.lower[target] >= np.max(b.upper[others])
                     for b in boxes)
    else:
        robust = lo[target] >= np.max(hi[others])
    if robust:
        return Verdict(sequence_index=sequence_index, target_class=target,
                       outcome="robust", class_lower=lo, class_upper=hi,
                       counterexample=None,
                       runtime=time.perf_counter() - start)
    witness = falsify(net, seq, spec, falsifier_budget, rng)
    if witness is not None:
        return Verdict(sequence_index=sequence_index, target_class=target,
                       outcome="non_robust", class_lower=lo, class_upper=hi,
                       counterexample=witness,
                       runtime=time.perf_counter() - start)
    return Verdict(sequence_index=sequence_index, target_class=target,
                   outcome="unknown", class_lower=lo, class_upper=hi,
                   counterexample=None,
                   runtime=time.perf_counter() - start,
                   reason="separation failed and falsifier found no witness")


def _task_seed(seed: int, kind_idx: int, eps_idx: int, seq_idx: int):
    return np.random.default_rng((seed, kind_idx, eps_idx, seq_idx))


def _run_task(args) -> Verdict:
    (net, seq, kind, eps, mode, budget, split_budget, seed,
     kind_idx, eps_idx, seq_idx, feature, instance) = args
    spec = PerturbationSpec(kind=kind, epsilon_percent=eps,
                            target_feature=feature, target_instance=instance)
    return check_local_robustness(
        net, seq, spec, mode=mode, falsifier_budget=budget,
        rng=_task_seed(seed, kind_idx, eps_idx, seq_idx),
        split_budget=split_budget, sequence_index=seq_idx)


def run_campaign(
    net: NetworkSpec,
    dataset: list[SequenceTensor],
    kinds: tuple[str, ...] = KINDS,
    epsilons: tuple[float, ...] = (50.0, 60.0, 70.0, 80.0, 90.0),
    mode: str = "interval",
    falsifier_budget: int = 1000,
    seed: int = 0,
    split_budget: int = 10_000,
    jobs: int = 1,
    target_feature: int = 0,
    target_instance: int = 0,
    timing: str = "wall",
) -> CampaignReport:
    """Verify every correctly classified sequence over kinds x epsilons."""
    if not dataset:
        raise ModelFormatError("campaign dataset is empty")
    if any(seq.label is None for seq in dataset):
        raise ModelFormatError("campaign sequences need labels")
    kinds = tuple(k.upper() for k in kinds)
    for kind in kinds:
        if kind not in KINDS:
            raise ModelFormatError(f"unknown perturbation kind {kind!r}")
    net.validate_mode(mode)

    correct = [(idx, seq) for idx, seq in enumerate(dataset)
               if maxID(forward(net, seq)) == seq.label]
    tasks = []
    for kind_idx, kind in enumerate(kinds):
        for eps_idx, eps in enumerate(epsilons):
            for seq_idx, seq in correct:
                tasks.append((net, seq, kind, eps, mode, falsifier_budget,
                              split_budget, seed, kind_idx, eps_idx, seq_idx,
                              target_feature, target_instance))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]

    cells: dict = {}
    verdicts: dict = {}
    pos = 0
    for kind in kinds:
        for eps in epsilons:
            cell_verdicts = results[pos:pos + len(correct)]
            pos += len(correct)
            verdicts[(kind, eps)] = cell_verdicts
            counts = {o: sum(1 for v in cell_verdicts if v.outcome == o)
                      for o in OUTCOMES}
            cells[(kind, eps)] = CellStats(
                kind=kind, epsilon_percent=eps,
                n_total=len(cell_verdicts),
                n_robust=counts["robust"],
                n_non_robust=counts["non_robust"],
                n_unknown=counts["unknown"],
                sum_runtime=sum(v.runtime for v in cell_verdicts),
            )
    return CampaignReport(
        model_name=net.name, kinds=kinds, epsilons=tuple(epsilons),
        mode=mode, seed=seed, falsifier_budget=falsifier_budget,
        split_budget=split_budget, target_feature=target_feature,
        target_instance=target_instance, timing=timing,
        n_dataset=len(dataset), n_correct=len(correct),
        cells=cells, verdicts=verdicts,
    )
