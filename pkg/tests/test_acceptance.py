"""Acceptance suite: one test per criterion, one printed pass line each.

Criteria:
  1. Soundness: Monte Carlo outputs stay inside computed class ranges and
     robust verdicts survive argmax re-checks (10,000 samples per cell).
  2. Oracle equivalence on 1-2 neuron networks (exact FC/ReLU vs dense grid;
     LSTM interval mode contains the grid range within 2x width).
  3. Hadamard relaxation contains the sampled product set (1e5 samples) and
     is exact on point operands.
  4. PR monotonicity and single-instance dominance over the epsilon sweep
     on every fixture campaign.
  5. Protocol shape: CSV header/rows match the committed golden file.
  6. Determinism: identical campaigns are byte-identical at any parallelism.

Run with -s to see the pass lines; total budget is well under ten minutes.
"""

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from seqstar.activations import RelaxationMode
from seqstar.cli import main as cli_main
from seqstar.layers import SequenceStar
from seqstar.network import (
    forward,
    forward_batch,
    load_dataset,
    load_model,
    maxID,
    reach,
)
from seqstar.perturb import PerturbationSpec, build_star, sample_inputs
from seqstar.reports import render_csv, render_json
from seqstar.stars import Predicate, Star, hadamard_product, range_of
from seqstar.verify import check_local_robustness, run_campaign

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FIXTURE_NAMES = ("fc_toy", "noise_lstm_tiny", "cnn_lstm_tiny")
ALL_KINDS = ("SFSI", "SFAI", "MFSI", "MFAI")
SWEEP = (50.0, 60.0, 70.0, 80.0, 90.0)
MC_SAMPLES = 10_000


def _load(name):
    net = load_model(FIXTURES / f"{name}.json")
    data = load_dataset(FIXTURES / f"{name}_data.jsonl")
    return net, data


@pytest.fixture(scope="module")
def campaign_reports():
    """One full-sweep campaign per fixture, shared by criteria 4."""
    reports = {}
    for name in FIXTURE_NAMES:
        net, data = _load(name)
        reports[name] = run_campaign(
            net, data, kinds=ALL_KINDS, epsilons=SWEEP, seed=11,
            falsifier_budget=300, jobs=2, timing="off")
    return reports


def test_soundness_monte_carlo():
    rng = np.random.default_rng(2024)
    checked = 0
    for name in FIXTURE_NAMES:
        net, data = _load(name)
        seq = data[0]
        assert maxID(forward(net, seq)) == seq.label
        for kind in ALL_KINDS:
            for eps in (50.0, 90.0):
                spec = PerturbationSpec(kind=kind, epsilon_percent=eps)
                star = build_star(seq, spec)
                union = reach(net, star)
                boxes = [range_of(m) for m in union.members]
                lo = np.min([b.lower for b in boxes], axis=0)
                hi = np.max([b.upper for b in boxes], axis=0)
                samples = sample_inputs(seq, spec, MC_SAMPLES, rng)
                outs = forward_batch(net, samples)
                assert np.all(outs >= lo - 1e-7), (name, kind, eps)
                assert np.all(outs <= hi + 1e-7), (name, kind, eps)
                verdict = check_local_robustness(
                    net, seq, spec, rng=np.random.default_rng(0))
                if verdict.outcome == "robust":
                    assert np.all(np.argmax(outs, axis=1) == seq.label), \
                        (name, kind, eps)
                checked += 1
    assert checked == len(FIXTURE_NAMES) * len(ALL_KINDS) * 2
    print(f"\nPASS soundness: {checked} cells x {MC_SAMPLES} samples, "
          "zero violations")


def test_oracle_equivalence_fc_relu_exact():
    from seqstar.layers import LayerSpec
    from seqstar.network import NetworkSpec

    net = NetworkSpec(
        input_features=1,
        layers=(LayerSpec.fully_connected([[1.3], [-0.7]], [0.1, 0.4]),
                LayerSpec.relu(),
                LayerSpec.fully_connected([[0.9, -1.1], [0.5, 0.8]],
                                          [0.0, -0.2])),
        output_dim=2, name="two-neuron",
    )
    lo_in, hi_in = -1.0, 2.0
    grid = np.linspace(lo_in, hi_in, 100_000)
    outs = forward_batch(net, grid[:, None, None])
    star = SequenceStar(steps=(Star(
        center=np.array([(lo_in + hi_in) / 2]),
        basis=np.array([[(hi_in - lo_in) / 2]]),
        pred=Predicate.box([-1.0], [1.0])),))
    union = reach(net, star, mode="exact_relu")
    boxes = [range_of(m) for m in union.members]
    lo = np.min([b.lower for b in boxes], axis=0)
    hi = np.max([b.upper for b in boxes], axis=0)
    assert np.allclose(lo, outs.min(axis=0), atol=1e-6)
    assert np.allclose(hi, outs.max(axis=0), atol=1e-6)
    print("\nPASS oracle equivalence (FC/ReLU exact): ranges within 1e-6 "
          "of the dense grid")


def test_oracle_equivalence_lstm_interval():
    from seqstar.layers import LayerSpec
    from seqstar.network import NetworkSpec

    gw = {g: [[w]] for g, w in zip("ifgo", (0.5, -0.4, 0.8, 0.6))}
    rw = {g: [[w]] for g, w in zip("ifgo", (0.3, 0.2, -0.5, 0.1))}
    gb = {g: [w] for g, w in zip("ifgo", (0.1, -0.1, 0.2, 0.0))}
    net = NetworkSpec(
        input_features=1,
        layers=(LayerSpec.lstm(gw, rw, gb),
                LayerSpec.fully_connected([[1.0]], [0.0])),
        output_dim=1, name="one-cell",
    )
    center, delta = 0.4, 0.3
    grid = np.linspace(center - delta, center + delta, 100_000)
    outs = forward_batch(net, grid[:, None, None])[:, 0]
    true_lo, true_hi = outs.min(), outs.max()
    star = SequenceStar(steps=(Star(
        center=np.array([center]), basis=np.array([[1.0]]),
        pred=Predicate.box([-delta], [delta])),))
    union = reach(net, star, mode="interval")
    box = range_of(union.members[0])
    lo, hi = box.lower[0], box.upper[0]
    assert lo <= true_lo + 1e-9 and hi >= true_hi - 1e-9, "not containing"
    width_ratio = (hi - lo) / (true_hi - true_lo)
    assert width_ratio <= 2.0, f"interval enclosure too loose: {width_ratio:.3f}x"
    print(f"\nPASS oracle equivalence (LSTM interval): contains grid range, "
          f"width {width_ratio:.2f}x <= 2x")


def test_hadamard_relaxation_acceptance():
    rng = np.random.default_rng(7)
    total = 0
    # Shared-variable operands.
    pred = Predicate.box([-1.0, -0.5], [0.8, 1.0])
    a = Star(rng.normal(size=2), rng.normal(size=(2, 2)), pred)
    b = Star(rng.normal(size=2), rng.normal(size=(2, 2)), pred)
    prod = hadamard_product(a, b, range_of(a), range_of(b), shared=True)
    alphas = pred.lo + (pred.hi - pred.lo) * rng.random((100_000, 2))
    xs = a.eval(alphas.T).T
    ys = b.eval(alphas.T).T
    zs = xs * ys
    # Witness check: (alpha, z) must satisfy every constraint row and bound.
    full = np.hstack([alphas, zs])
    C, d = prod.constraint_matrix, prod.constraint_rhs
    assert np.all(full @ C.T <= d + 1e-9)
    assert np.all(full >= prod.alpha_lower - 1e-9)
    assert np.all(full <= prod.alpha_upper + 1e-9)
    total += alphas.shape[0]
    # Independent operands.
    a2 = Star(np.array([0.5]), np.array([[1.0]]), Predicate.box([-1.0], [1.0]))
    b2 = Star(np.array([-0.2]), np.array([[0.7]]), Predicate.box([-1.0], [1.0]))
    prod2 = hadamard_product(a2, b2, range_of(a2), range_of(b2), shared=False)
    al = -1 + 2 * rng.random((100_000, 2))
    xs2 = a2.center[0] + al[:, 0]
    ys2 = b2.center[0] + 0.7 * al[:, 1]
    full2 = np.column_stack([al, xs2 * ys2])
    C2, d2 = prod2.constraint_matrix, prod2.constraint_rhs
    assert np.all(full2 @ C2.T <= d2 + 1e-9)
    assert np.all(full2 >= prod2.alpha_lower - 1e-9)
    assert np.all(full2 <= prod2.alpha_upper + 1e-9)
    total += al.shape[0]
    # Point operands multiply exactly.
    pa = Star.point(np.array([1.25, -2.0]))
    pb = Star.point(np.array([0.8, 3.5]))
    pp = hadamard_product(pa, pb, range_of(pa), range_of(pb))
    assert np.allclose(pp.center, [1.0, -7.0], atol=1e-12)
    assert pp.num_variables == 0
    print(f"\nPASS Hadamard relaxation: {total} sampled products contained, "
          "point case exact to 1e-12")


def test_pr_monotonicity_and_dominance(campaign_reports):
    for name, report in campaign_reports.items():
        for kind in ALL_KINDS:
            robust = [report.cells[(kind, eps)].n_robust for eps in SWEEP]
            assert all(a >= b for a, b in zip(robust, robust[1:])), \
                f"{name}/{kind}: robust counts {robust} not non-increasing"
        for eps in SWEEP:
            assert report.cells[("SFSI", eps)].n_robust >= \
                report.cells[("SFAI", eps)].n_robust, (name, eps)
            assert report.cells[("MFSI", eps)].n_robust >= \
                report.cells[("MFAI", eps)].n_robust, (name, eps)
    print("\nPASS PR monotonicity: non-increasing in epsilon and "
          "single-instance dominance on all fixtures")


def test_protocol_shape_golden_csv(tmp_path):
    runner = CliRunner()
    out_csv = tmp_path / "campaign.csv"
    result = runner.invoke(cli_main, [
        "verify",
        "--model", str(FIXTURES / "fc_toy.json"),
        "--data", str(FIXTURES / "fc_toy_data.jsonl"),
        "--kinds", "sfsi,sfai,mfsi,mfai",
        "--epsilons", "50,60,70,80,90",
        "--seed", "11", "--budget", "300", "--timing", "off",
        "--out-csv", str(out_csv),
    ])
    assert result.exit_code == 0, result.output
    golden = (FIXTURES / "golden" / "campaign_fc_toy.csv").read_bytes()
    assert out_csv.read_bytes() == golden
    print("\nPASS protocol shape: CSV byte-identical to the committed golden")


def test_determinism_across_parallelism():
    net, data = _load("fc_toy")
    kwargs = dict(kinds=ALL_KINDS, epsilons=SWEEP, seed=42,
                  falsifier_budget=300, timing="off")
    r1 = run_campaign(net, data, jobs=1, **kwargs)
    r2 = run_campaign(net, data, jobs=2, **kwargs)
    r3 = run_campaign(net, data, jobs=1, **kwargs)
    assert render_csv(r1) == render_csv(r2) == render_csv(r3)
    assert render_json(r1) == render_json(r2) == render_json(r3)
    print("\nPASS determinism: byte-identical reports at jobs=1 and jobs=2")
