import numpy as np
import pytest

from seqstar.errors import DimensionMismatchError, ModelFormatError
from seqstar.network import SequenceTensor
from seqstar.perturb import (
    PerturbationSpec,
    build_star,
    delta_for,
    sample_inputs,
)
from seqstar.stars import contains_point, range_of


def cell_range(seq_star, f, t):
    box = range_of(seq_star.steps[t], dims=[f])
    return box.lower[0], box.upper[0]


class TestDeltaFor:
    def test_constant_row(self):
        seq = SequenceTensor(values=np.array([[2.0, 2.0, 2.0, 2.0]]))
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=50)
        assert delta_for(seq, spec, 0) == pytest.approx(1.0)

    def test_zero_mean_row(self):
        seq = SequenceTensor(values=np.array([[1.0, -1.0]]))
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=80)
        assert delta_for(seq, spec, 0) == 0.0

    def test_ninety_percent(self):
        seq = SequenceTensor(values=np.array([[0.2, 0.4, 0.6]]))
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=90)
        assert delta_for(seq, spec, 0) == pytest.approx(0.36)

    def test_negative_mean_uses_absolute_value(self):
        seq = SequenceTensor(values=np.array([[-2.0, -2.0]]))
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=50)
        assert delta_for(seq, spec, 0) == pytest.approx(1.0)


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(ModelFormatError):
            PerturbationSpec(kind="nope", epsilon_percent=50)

    def test_epsilon_out_of_range(self):
        for eps in (0.0, -1.0, 150.0):
            with pytest.raises(ModelFormatError):
                PerturbationSpec(kind="SFSI", epsilon_percent=eps)

    def test_kind_is_case_insensitive(self):
        assert PerturbationSpec(kind="sfai", epsilon_percent=50).kind == "SFAI"

    def test_index_out_of_range(self):
        seq = SequenceTensor(values=np.ones((2, 3)))
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=50,
                                target_feature=5)
        with pytest.raises(DimensionMismatchError):
            build_star(seq, spec)


class TestBuildStar:
    def test_zero_delta_gives_point(self):
        seq = SequenceTensor(values=np.array([[1.0, -1.0], [0.5, -0.5]]))
        spec = PerturbationSpec(kind="MFAI", epsilon_percent=50)
        star = build_star(seq, spec)
        assert star.num_variables == 0
        for t in range(2):
            assert np.array_equal(star.steps[t].center, seq.values[:, t])

    def test_sfsi_single_variable_and_ranges(self):
        seq = SequenceTensor(values=np.array([[1.0, 2.0, 3.0],
                                              [4.0, 5.0, 6.0]]))
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=50,
                                target_feature=0, target_instance=1)
        star = build_star(seq, spec)
        assert star.num_variables == 1
        delta = delta_for(seq, spec, 0)
        lo, hi = cell_range(star, 0, 1)
        assert np.isclose(lo, 2.0 - delta)
        assert np.isclose(hi, 2.0 + delta)
        for f in range(2):
            for t in range(3):
                if (f, t) == (0, 1):
                    continue
                lo, hi = cell_range(star, f, t)
                assert lo == hi == seq.values[f, t]

    def test_mfai_box_per_cell(self):
        seq = SequenceTensor(values=np.array([[1.0, 3.0], [2.0, 2.0]]))
        spec = PerturbationSpec(kind="MFAI", epsilon_percent=50)
        star = build_star(seq, spec)
        assert star.num_variables == 4
        for f in range(2):
            delta = delta_for(seq, spec, f)
            for t in range(2):
                lo, hi = cell_range(star, f, t)
                assert np.isclose(lo, seq.values[f, t] - delta)
                assert np.isclose(hi, seq.values[f, t] + delta)

    def test_variable_counts_per_kind(self):
        seq = SequenceTensor(values=np.arange(1, 7, dtype=float).reshape(2, 3))
        counts = {"SFSI": 1, "SFAI": 3, "MFSI": 2, "MFAI": 6}
        for kind, expected in counts.items():
            spec = PerturbationSpec(kind=kind, epsilon_percent=60)
            assert build_star(seq, spec).num_variables == expected

    def test_center_membership(self):
        seq = SequenceTensor(values=np.arange(1, 7, dtype=float).reshape(2, 3))
        for kind in ("SFSI", "SFAI", "MFSI", "MFAI"):
            star = build_star(seq,
                              PerturbationSpec(kind=kind, epsilon_percent=70))
            for t in range(3):
                assert contains_point(star.steps[t], seq.values[:, t],
                                      tol=1e-9)

    def test_nesting_in_epsilon(self):
        seq = SequenceTensor(values=np.arange(1, 7, dtype=float).reshape(2, 3))
        for kind in ("SFSI", "SFAI", "MFSI", "MFAI"):
            small = build_star(seq, PerturbationSpec(kind=kind,
                                                     epsilon_percent=50))
            large = build_star(seq, PerturbationSpec(kind=kind,
                                                     epsilon_percent=90))
            for t in range(3):
                bs = range_of(small.steps[t])
                bl = range_of(large.steps[t])
                assert np.all(bl.lower <= bs.lower + 1e-12)
                assert np.all(bl.upper >= bs.upper - 1e-12)

    def test_sfsi_contained_in_sfai(self):
        seq = SequenceTensor(values=np.arange(1, 7, dtype=float).reshape(2, 3))
        sfsi = build_star(seq, PerturbationSpec(kind="SFSI", epsilon_percent=70,
                                                target_instance=1))
        sfai = build_star(seq, PerturbationSpec(kind="SFAI", epsilon_percent=70))
        for t in range(3):
            bs, bl = range_of(sfsi.steps[t]), range_of(sfai.steps[t])
            assert np.all(bl.lower <= bs.lower + 1e-12)
            assert np.all(bl.upper >= bs.upper - 1e-12)


class TestSampleInputs:
    def test_samples_stay_inside_star(self):
        rng = np.random.default_rng(0)
        seq = SequenceTensor(values=np.arange(1, 7, dtype=float).reshape(2, 3))
        spec = PerturbationSpec(kind="MFAI", epsilon_percent=80)
        star = build_star(seq, spec)
        samples = sample_inputs(seq, spec, 50, rng)
        for s in samples[:10]:
            for t in range(3):
                assert contains_point(star.steps[t], s[:, t], tol=1e-9)

    def test_unperturbed_cells_untouched(self):
        rng = np.random.default_rng(1)
        seq = SequenceTensor(values=np.arange(1, 7, dtype=float).reshape(2, 3))
        spec = PerturbationSpec(kind="SFSI", epsilon_percent=80,
                                target_feature=1, target_instance=2)
        samples = sample_inputs(seq, spec, 20, rng)
        mask = np.ones((2, 3), dtype=bool)
        mask[1, 2] = False
        assert np.array_equal(
            np.broadcast_to(seq.values, samples.shape)[:, mask],
            samples[:, mask])

    def test_corners_hit_full_radius(self):
        rng = np.random.default_rng(2)
        seq = SequenceTensor(values=np.array([[2.0, 2.0]]))
        spec = PerturbationSpec(kind="SFAI", epsilon_percent=50)
        samples = sample_inputs(seq, spec, 40, rng, corners=True)
        assert set(np.unique(np.round(samples, 9))) <= {1.0, 3.0}
