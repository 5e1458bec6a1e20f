"""Checks against the committed fixture models, datasets, and goldens."""

import json
from pathlib import Path

import numpy as np
import pytest

from seqstar.network import forward, load_dataset, load_model, maxID

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="module")
def goldens():
    return json.loads((FIXTURES / "golden" / "forward_golden.json").read_text())


@pytest.mark.parametrize("name", ["fc_toy", "noise_lstm_tiny", "cnn_lstm_tiny"])
def test_fixture_loads_and_classifies_dataset(name):
    net = load_model(FIXTURES / f"{name}.json")
    data = load_dataset(FIXTURES / f"{name}_data.jsonl")
    hits = sum(maxID(forward(net, seq)) == seq.label for seq in data)
    assert hits == len(data)


def test_noise_lstm_tiny_dimensions():
    net = load_model(FIXTURES / "noise_lstm_tiny.json")
    assert net.input_features == 2
    assert net.output_dim == 3
    kinds = [l.kind for l in net.layers]
    assert kinds == ["lstm", "fully_connected"]


def test_noise_lstm_tiny_summary_structure():
    net = load_model(FIXTURES / "noise_lstm_tiny.json")
    text = "\n".join(net.summary_lines())
    assert "lstm(input=2, hidden=4" in text
    assert "fully_connected(4 -> 3)" in text


@pytest.mark.parametrize("name", ["fc_toy", "noise_lstm_tiny", "cnn_lstm_tiny"])
def test_forward_matches_committed_golden(name, goldens):
    # Goldens were produced by a standalone scalar evaluator at fixture
    # authoring time, cross-checked against the training framework.
    net = load_model(FIXTURES / f"{name}.json")
    data = load_dataset(FIXTURES / f"{name}_data.jsonl")
    entry = goldens[name]
    out = forward(net, data[entry["sample_index"]])
    assert np.allclose(out, entry["output"], atol=1e-9)
    assert maxID(out) == entry["label"]


def test_cnn_fixture_has_conv_before_lstm():
    net = load_model(FIXTURES / "cnn_lstm_tiny.json")
    kinds = [l.kind for l in net.layers]
    assert kinds == ["conv1d", "relu", "lstm", "fully_connected"]
