"""Byte-stable report rendering: CSV, JSON, and a stdout table.

The CSV follows the campaign-table layout: one row per epsilon value, one PR
column and one sumRT column per perturbation kind, kinds in the fixed order
SFSI, SFAI, MFSI, MFAI (restricted to the kinds that were run).

Runtime columns are wall-clock sums by default. With timing "off" every
runtime field renders as zero so that two runs of the same campaign produce
byte-identical reports; verdicts and PR numbers are deterministic either
way.
"""

from __future__ import annotations

import json

from .perturb import KINDS
from .verify import CampaignReport, Verdict


def _ordered_kinds(report: CampaignReport) -> list[str]:
    return [k for k in KINDS if k in report.kinds]


def _runtime(report: CampaignReport, value: float) -> float:
    return value if report.timing == "wall" else 0.0


def render_csv(report: CampaignReport) -> str:
    kinds = _ordered_kinds(report)
    header = ["noise"] + [f"PR_{k}" for k in kinds] + [f"sumRT_{k}" for k in kinds]
    lines = [",".join(header)]
    for eps in report.epsilons:
        row = [f"{eps:g}"]
        row += [f"{report.cells[(k, eps)].pr:.2f}" for k in kinds]
        row += [f"{_runtime(report, report.cells[(k, eps)].sum_runtime):.4f}"
                for k in kinds]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def render_table(report: CampaignReport) -> str:
    """Fixed-width variant of the CSV for standard output."""
    rows = [line.split(",") for line in render_csv(report).strip().split("\n")]
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    out = []
    for r in rows:
        out.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    return "\n".join(out) + "\n"


def verdict_to_dict(v: Verdict, timing: str = "wall") -> dict:
    return {
        "sequence_index": v.sequence_index,
        "target_class": v.target_class,
        "outcome": v.outcome,
        "rv": v.rv,
        "class_lower": None if v.class_lower is None else
            [float(x) for x in v.class_lower],
        "class_upper": None if v.class_upper is None else
            [float(x) for x in v.class_upper],
        "counterexample": None if v.counterexample is None else
            v.counterexample.values.tolist(),
        "runtime": v.runtime if timing == "wall" else 0.0,
        "reason": v.reason,
    }


def report_to_dict(report: CampaignReport) -> dict:
    cells = []
    for kind in _ordered_kinds(report):
        for eps in report.epsilons:
            stats = report.cells[(kind, eps)]
            cells.append({
                "kind": kind,
                "epsilon_percent": eps,
                "n_total": stats.n_total,
                "n_robust": stats.n_robust,
                "n_non_robust": stats.n_non_robust,
                "n_unknown": stats.n_unknown,
                "pr": round(stats.pr, 6),
                "sum_runtime": _runtime(report, stats.sum_runtime),
                "verdicts": [verdict_to_dict(v, report.timing)
                             for v in report.verdicts[(kind, eps)]],
            })
    return {
        "model": report.model_name,
        "config": {
            "kinds": list(report.kinds),
            "epsilons": list(report.epsilons),
            "mode": report.mode,
            "seed": report.seed,
            "falsifier_budget": report.falsifier_budget,
            "split_budget": report.split_budget,
            "target_feature": report.target_feature,
            "target_instance": report.target_instance,
            "timing": report.timing,
            "delta_rule": report.delta_rule,
        },
        "dataset": {
            "n_sequences": report.n_dataset,
            "n_correctly_classified": report.n_correct,
        },
        "cells": cells,
    }


def render_json(report: CampaignReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"
