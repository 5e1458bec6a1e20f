import numpy as np
import pytest

from seqstar.errors import ModelFormatError
from seqstar.layers import LayerSpec
from seqstar.network import NetworkSpec, SequenceTensor, forward, maxID
from seqstar.perturb import PerturbationSpec, build_star
from seqstar.reports import render_csv, render_json, render_table
from seqstar.stars import contains_point
from seqstar.verify import check_local_robustness, falsify, run_campaign

from test_network import small_lstm_net


def toy_linear_net():
    """g(x) = [x, 1 - x]: class 0 wins iff x >= 0.5."""
    layer = LayerSpec.fully_connected([[1.0], [-1.0]], [0.0, 1.0])
    return NetworkSpec(input_features=1, layers=(layer,), output_dim=2,
                       name="toy-linear")


def toy_dataset():
    return [
        SequenceTensor(values=np.array([[1.0]]), label=0),
        SequenceTensor(values=np.array([[0.6]]), label=0),
        SequenceTensor(values=np.array([[0.3]]), label=1),
    ]


class TestCheckLocalRobustness:
    def test_tiny_radius_is_robust(self):
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=25)
        v = check_local_robustness(net, seq, spec)
        assert v.outcome == "robust"
        # Hand arithmetic: class 0 in [0.75, 1.25], class 1 in [-0.25, 0.25].
        assert np.allclose(v.class_lower, [0.75, -0.25], atol=1e-9)
        assert np.allclose(v.class_upper, [1.25, 0.25], atol=1e-9)

    def test_separation_tie_counts_as_robust(self):
        # x = 1, delta = 0.5: LB_0 = 0.5 equals UB_1 = 0.5.
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=50)
        v = check_local_robustness(net, seq, spec)
        assert v.outcome == "robust"

    def test_large_radius_finds_counterexample(self):
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=90)
        v = check_local_robustness(net, seq, spec,
                                   rng=np.random.default_rng(1))
        assert v.outcome == "non_robust"
        assert v.counterexample is not None
        # The witness must re-verify: inside the box, misclassified.
        star = build_star(seq, spec)
        for t in range(seq.t_s):
            assert contains_point(star.steps[t],
                                  v.counterexample.values[:, t], tol=1e-9)
        assert maxID(forward(net, v.counterexample)) != v.target_class

    def test_zero_radius_trivially_robust(self):
        # A zero-mean feature gives delta = 0: the star is the point itself
        # and the prediction is the target by precondition.
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[0.0]]), label=1)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=90)
        v = check_local_robustness(net, seq, spec)
        assert v.outcome == "robust"
        assert np.allclose(v.class_lower, v.class_upper, atol=1e-9)

    def test_zero_budget_gives_unknown(self):
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=90)
        v = check_local_robustness(net, seq, spec, falsifier_budget=0)
        assert v.outcome == "unknown"
        assert v.reason is not None

    def test_robust_verdict_survives_sampling(self):
        rng = np.random.default_rng(2)
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=40)
        v = check_local_robustness(net, seq, spec)
        assert v.outcome == "robust"
        from seqstar.perturb import sample_inputs
        samples = sample_inputs(seq, spec, 500, rng)
        from seqstar.network import forward_batch
        outs = forward_batch(net, samples)
        assert np.all(np.argmax(outs, axis=1) == v.target_class)


class TestFalsify:
    def test_robust_case_yields_nothing(self):
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=25)
        assert falsify(net, seq, spec, 200, np.random.default_rng(0)) is None

    def test_wide_case_found_fast(self):
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=90)
        hit = falsify(net, seq, spec, 100, np.random.default_rng(0))
        assert hit is not None
        assert maxID(forward(net, hit)) == 1

    def test_zero_budget(self):
        net = toy_linear_net()
        seq = SequenceTensor(values=np.array([[1.0]]), label=0)
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=90)
        assert falsify(net, seq, spec, 0, np.random.default_rng(0)) is None

    def test_deterministic_witness(self):
        rng = np.random.default_rng(9)
        net = small_lstm_net(rng, n_f=2, hidden=2, classes=2)
        seq = SequenceTensor(values=rng.normal(size=(2, 3)) + 1.0, label=0)
        spec = PerturbationSpec(kind="MFAI", epsilon_percent=95)
        first = falsify(net, seq, spec, 300, np.random.default_rng(4))
        second = falsify(net, seq, spec, 300, np.random.default_rng(4))
        if first is None:
            assert second is None
        else:
            assert np.array_equal(first.values, second.values)


class TestRunCampaign:
    def test_toy_campaign_counts(self):
        report = run_campaign(toy_linear_net(), toy_dataset(),
                              kinds=("SFSI",), epsilons=(50.0, 90.0),
                              seed=7)
        assert report.n_correct == 3
        cell50 = report.cells[("SFSI", 50.0)]
        cell90 = report.cells[("SFSI", 90.0)]
        # Hand arithmetic: x=1.0 and x=0.3 are robust at 50%, x=0.6 is not;
        # nothing survives 90%.
        assert cell50.n_robust == 2
        assert cell50.n_non_robust == 1
        assert cell50.pr == pytest.approx(100 * 2 / 3)
        assert cell90.n_robust == 0
        assert cell90.pr == 0.0

    def test_all_robust_gives_pr_100(self):
        report = run_campaign(toy_linear_net(), toy_dataset()[:1],
                              kinds=("SFSI",), epsilons=(25.0,))
        assert report.cells[("SFSI", 25.0)].pr == 100.0

    def test_misclassified_sequences_filtered(self):
        data = toy_dataset() + [SequenceTensor(values=np.array([[2.0]]),
                                               label=1)]
        report = run_campaign(toy_linear_net(), data, kinds=("SFSI",),
                              epsilons=(25.0,))
        assert report.n_dataset == 4
        assert report.n_correct == 3

    def test_pr_monotone_in_epsilon(self):
        report = run_campaign(toy_linear_net(), toy_dataset(),
                              kinds=("SFSI", "SFAI", "MFSI", "MFAI"),
                              epsilons=(50.0, 60.0, 70.0, 80.0, 90.0))
        for kind in report.kinds:
            prs = [report.cells[(kind, e)].pr for e in report.epsilons]
            assert all(a >= b for a, b in zip(prs, prs[1:]))

    def test_accounting_sums(self):
        report = run_campaign(toy_linear_net(), toy_dataset(),
                              kinds=("SFSI",), epsilons=(50.0,))
        cell = report.cells[("SFSI", 50.0)]
        total = sum(v.runtime for v in report.verdicts[("SFSI", 50.0)])
        assert cell.sum_runtime == pytest.approx(total, rel=0.05)

    def test_unlabeled_dataset_rejected(self):
        data = [SequenceTensor(values=np.array([[1.0]]))]
        with pytest.raises(ModelFormatError):
            run_campaign(toy_linear_net(), data)

    def test_jobs_do_not_change_results(self):
        kwargs = dict(kinds=("SFSI", "MFAI"), epsilons=(50.0, 90.0),
                      seed=3, timing="off")
        seq_report = run_campaign(toy_linear_net(), toy_dataset(), jobs=1,
                                  **kwargs)
        par_report = run_campaign(toy_linear_net(), toy_dataset(), jobs=2,
                                  **kwargs)
        assert render_json(seq_report) == render_json(par_report)
        assert render_csv(seq_report) == render_csv(par_report)


class TestReports:
    def full_report(self, timing="off"):
        return run_campaign(toy_linear_net(), toy_dataset(),
                            kinds=("SFSI", "SFAI", "MFSI", "MFAI"),
                            epsilons=(50.0, 60.0, 70.0, 80.0, 90.0),
                            seed=1, timing=timing)

    def test_csv_layout(self):
        csv = render_csv(self.full_report())
        lines = csv.strip().split("\n")
        assert lines[0] == ("noise,PR_SFSI,PR_SFAI,PR_MFSI,PR_MFAI,"
                            "sumRT_SFSI,sumRT_SFAI,sumRT_MFSI,sumRT_MFAI")
        assert len(lines) == 6
        assert lines[1].startswith("50,")

    def test_csv_timing_off_zeroes_runtimes(self):
        csv = render_csv(self.full_report(timing="off"))
        for line in csv.strip().split("\n")[1:]:
            assert line.endswith(",0.0000,0.0000,0.0000,0.0000")

    def test_csv_wall_timing_nonzero(self):
        csv = render_csv(self.full_report(timing="wall"))
        data_line = csv.strip().split("\n")[1]
        assert not data_line.endswith(",0.0000,0.0000,0.0000,0.0000")

    def test_json_round_trips(self):
        import json
        report = self.full_report()
        obj = json.loads(render_json(report))
        assert obj["model"] == "toy-linear"
        assert len(obj["cells"]) == 20
        assert obj["config"]["delta_rule"].startswith("epsilon percent")

    def test_repeated_runs_byte_identical(self):
        a = self.full_report()
        b = self.full_report()
        assert render_json(a) == render_json(b)
        assert render_csv(a) == render_csv(b)

    def test_table_alignment(self):
        table = render_table(self.full_report())
        lines = table.strip().split("\n")
        assert len({len(l) for l in lines}) == 1
