#!/usr/bin/env python3
"""Author the committed fixture models, datasets, and golden outputs.

Run from the repository root:

    python3 tools/make_fixtures.py

Training uses torch (authoring-time only; the package itself never imports
it). Golden forward outputs are computed by the standalone scalar evaluator
in this file, reading the exported JSON, and cross-checked against torch;
the test suite compares the package's forward pass against these goldens.

The datasets are synthetic: three well-separated classes whose features are
positive-valued statistics, so the percent-of-mean perturbation radii are
nonzero and the epsilon sweep produces a graded robustness profile.
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = FIXTURES / "golden"


# ---------------------------------------------------------------------------
# Synthetic datasets


def noise_dataset(rng, per_class=4, t_s=6):
    """Two positive per-frame statistics; classes differ in their levels."""
    centers = [(2.4, 0.5), (0.6, 2.2), (1.5, 1.3)]
    sequences = []
    for label, (c0, c1) in enumerate(centers):
        for _ in range(per_class):
            offset = rng.normal(scale=0.08, size=2)
            f0 = c0 + offset[0] + rng.normal(scale=0.05, size=t_s)
            f1 = c1 + offset[1] + rng.normal(scale=0.05, size=t_s)
            values = np.clip(np.stack([f0, f1]), 0.05, None)
            sequences.append({"values": values, "label": label})
    return sequences


def fc_toy_dataset(rng, per_class=4):
    centers = [(2.6, 0.35), (0.35, 2.6), (2.3, 2.3)]
    sequences = []
    for label, (c0, c1) in enumerate(centers):
        for _ in range(per_class):
            point = np.array([c0, c1]) + rng.normal(scale=0.12, size=2)
            values = np.clip(point, 0.05, None)[:, None]
            sequences.append({"values": values, "label": label})
    return sequences


def ramp_dataset(rng, per_class=3, t_s=6, n_f=3):
    """Classes differ in temporal shape: rising, falling, flat."""
    base = np.array([1.0, 0.8, 0.6])
    ramps = [np.linspace(-0.9, 0.9, t_s), np.linspace(0.9, -0.9, t_s),
             np.zeros(t_s)]
    sequences = []
    for label, ramp in enumerate(ramps):
        for k in range(per_class):
            # graded ramp strength: later samples sit closer to the boundary
            strength = 1.0 - 0.3 * k if label != 2 else 1.0
            values = base[:, None] + rng.normal(scale=0.05, size=(n_f, t_s))
            values[0] += strength * ramp + rng.normal(scale=0.03)
            values = np.clip(values, 0.05, None)
            sequences.append({"values": values, "label": label})
    return sequences


def save_jsonl(sequences, path):
    with open(path, "w") as fh:
        for seq in sequences:
            fh.write(json.dumps({"values": np.asarray(seq["values"]).tolist(),
                                 "label": seq["label"]}) + "\n")


# ---------------------------------------------------------------------------
# Training (torch)


def train(model, sequences, epochs=600, lr=0.05, seed=0):
    torch.manual_seed(seed)
    xs = [torch.tensor(np.asarray(s["values"]).T, dtype=torch.float64)
          for s in sequences]
    ys = torch.tensor([s["label"] for s in sequences])
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss()
    for _ in range(epochs):
        opt.zero_grad()
        logits = torch.stack([model(x) for x in xs])
        loss = loss_fn(logits, ys)
        loss.backward()
        opt.step()
    with torch.no_grad():
        logits = torch.stack([model(x) for x in xs])
        acc = (logits.argmax(dim=1) == ys).float().mean().item()
    return acc


class LstmClassifier(nn.Module):
    def __init__(self, n_f, hidden, classes):
        super().__init__()
        self.lstm = nn.LSTM(n_f, hidden, batch_first=True).double()
        self.head = nn.Linear(hidden, classes).double()

    def forward(self, x):  # x: (t_s, n_f)
        out, _ = self.lstm(x[None, :, :])
        return self.head(out[0, -1])


class CnnLstmClassifier(nn.Module):
    def __init__(self, n_f, channels, hidden, classes, k=3):
        super().__init__()
        self.conv = nn.Conv1d(n_f, channels, k, padding=1).double()
        self.act = nn.ReLU()
        self.lstm = nn.LSTM(channels, hidden, batch_first=True).double()
        self.head = nn.Linear(hidden, classes).double()

    def forward(self, x):  # x: (t_s, n_f)
        conv = self.act(self.conv(x.T[None, :, :]))
        out, _ = self.lstm(conv.transpose(1, 2))
        return self.head(out[0, -1])


class FcClassifier(nn.Module):
    def __init__(self, n_f, hidden, classes):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(n_f, hidden).double(), nn.ReLU(),
                                 nn.Linear(hidden, classes).double())

    def forward(self, x):  # x: (1, n_f)
        return self.net(x[0])


# ---------------------------------------------------------------------------
# Export to the package's model schema


def export_linear(layer):
    return {"kind": "fully_connected",
            "weights": layer.weight.detach().numpy().tolist(),
            "bias": layer.bias.detach().numpy().tolist()}


def export_lstm(lstm):
    H = lstm.hidden_size
    w_ih = lstm.weight_ih_l0.detach().numpy()
    w_hh = lstm.weight_hh_l0.detach().numpy()
    bias = (lstm.bias_ih_l0 + lstm.bias_hh_l0).detach().numpy()
    obj = {"kind": "lstm", "output_mode": "last"}
    for idx, g in enumerate("ifgo"):
        rows = slice(idx * H, (idx + 1) * H)
        obj[f"W_{g}"] = w_ih[rows].tolist()
        obj[f"R_{g}"] = w_hh[rows].tolist()
        obj[f"b_{g}"] = bias[rows].tolist()
    return obj


def export_conv1d(conv):
    return {"kind": "conv1d",
            "weights": conv.weight.detach().numpy().tolist(),
            "bias": conv.bias.detach().numpy().tolist(),
            "stride": conv.stride[0], "padding": conv.padding[0],
            "dilation": conv.dilation[0]}


# ---------------------------------------------------------------------------
# Independent scalar forward (golden oracle; no numpy, no torch)


def _sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def _matvec(W, x):
    return [sum(w * xi for w, xi in zip(row, x)) for row in W]


def _vadd(a, b):
    return [x + y for x, y in zip(a, b)]


def scalar_forward(model_doc, values):
    """Evaluate the exported model on one n_f x t_s sample, scalar math only."""
    seq = [[values[f][t] for f in range(len(values))]
           for t in range(len(values[0]))]  # list of per-step feature vectors
    is_seq = True
    for layer in model_doc["layers"]:
        kind = layer["kind"]
        if kind == "fully_connected":
            if is_seq:
                assert len(seq) == 1

                seq = seq[0]
                is_seq = False
            seq = _vadd(_matvec(layer["weights"], seq), layer["bias"])
        elif kind == "relu":
            if is_seq:
                seq = [[max(0.0, v) for v in step] for step in seq]
            else:
                seq = [max(0.0, v) for v in seq]
        elif kind == "conv1d":
            W, b = layer["weights"], layer["bias"]
            k = len(W[0][0])
            stride, pad, dil = layer["stride"], layer["padding"], layer["dilation"]
            length = len(seq)
            out_len = (length + 2 * pad - dil * (k - 1) - 1) // stride + 1
            out = []
            for j in range(out_len):
                step = []
                for o in range(len(W)):
                    acc = b[o]
                    for tap in range(k):
                        t = j * stride - pad + tap * dil
                        if 0 <= t < length:
                            for c in range(len(W[0])):
                                acc += W[o][c][tap] * seq[t][c]
                    step.append(acc)
                out.append(step)
            seq = out
        elif kind == "lstm":
            H = len(layer["b_i"])
            h = [0.0] * H
            c = [0.0] * H
            for step in seq:
                gates = {}
                for g in "ifgo":
                    pre = _vadd(_vadd(_matvec(layer[f"W_{g}"], step),
                                      _matvec(layer[f"R_{g}"], h)),
                                layer[f"b_{g}"])
                    gates[g] = pre
                i = [_sig(v) for v in gates["i"]]
                f = [_sig(v) for v in gates["f"]]
                g_ = [math.tanh(v) for v in gates["g"]]
                o = [_sig(v) for v in gates["o"]]
                c = [fv * cv + iv * gv for fv, cv, iv, gv in zip(f, c, i, g_)]
                h = [ov * math.tanh(cv) for ov, cv in zip(o, c)]
            seq = h
            is_seq = layer.get("output_mode", "last") == "sequence"
    assert not is_seq
    return seq


# ---------------------------------------------------------------------------


def build_all():
    FIXTURES.mkdir(exist_ok=True)
    GOLDEN.mkdir(exist_ok=True)
    rng = np.random.default_rng(20240811)

    specs = []

    fc_data = fc_toy_dataset(rng)
    torch.manual_seed(101)  # seed before construction: init draws from the global stream
    fc_model = FcClassifier(2, 4, 3)
    acc = train(fc_model, fc_data, epochs=800, lr=0.05, seed=1)
    print(f"fc_toy train accuracy: {acc:.3f}")
    fc_doc = {
        "name": "fc_toy", "input_features": 2, "output_dim": 3,
        "labels": ["alpha", "beta", "gamma"],
        "layers": [export_linear(fc_model.net[0]), {"kind": "relu"},
                   export_linear(fc_model.net[2])],
    }
    specs.append(("fc_toy", fc_doc, fc_data, fc_model))

    noise_data = noise_dataset(rng, per_class=3)
    torch.manual_seed(102)
    lstm_model = LstmClassifier(2, 4, 3)
    acc = train(lstm_model, noise_data, epochs=700, lr=0.04, seed=2)
    print(f"noise_lstm_tiny train accuracy: {acc:.3f}")
    lstm_doc = {
        "name": "noise_lstm_tiny", "input_features": 2, "output_dim": 3,
        "labels": ["white", "brown", "pink"],
        "layers": [export_lstm(lstm_model.lstm),
                   export_linear(lstm_model.head)],
    }
    specs.append(("noise_lstm_tiny", lstm_doc, noise_data, lstm_model))

    ramp_data = ramp_dataset(rng)
    torch.manual_seed(103)
    cnn_model = CnnLstmClassifier(3, 4, 4, 3)
    acc = train(cnn_model, ramp_data, epochs=700, lr=0.04, seed=3)
    print(f"cnn_lstm_tiny train accuracy: {acc:.3f}")
    cnn_doc = {
        "name": "cnn_lstm_tiny", "input_features": 3, "output_dim": 3,
        "labels": ["rise", "fall", "flat"],
        "layers": [export_conv1d(cnn_model.conv), {"kind": "relu"},
                   export_lstm(cnn_model.lstm),
                   export_linear(cnn_model.head)],
    }
    specs.append(("cnn_lstm_tiny", cnn_doc, ramp_data, cnn_model))

    goldens = {}
    for name, doc, data, model in specs:
        (FIXTURES / f"{name}.json").write_text(json.dumps(doc) + "\n")
        save_jsonl(data, FIXTURES / f"{name}_data.jsonl")
        sample = np.asarray(data[0]["values"])
        golden = scalar_forward(doc, sample.tolist())
        with torch.no_grad():
            torch_out = model(torch.tensor(sample.T, dtype=torch.float64))
        gap = np.max(np.abs(np.asarray(golden) - torch_out.numpy()))
        print(f"{name}: scalar-vs-torch max gap {gap:.2e}")
        assert gap < 1e-9, f"golden oracle disagrees with torch for {name}"
        goldens[name] = {"sample_index": 0, "output": golden,
                         "label": data[0]["label"]}
    (GOLDEN / "forward_golden.json").write_text(
        json.dumps(goldens, indent=2) + "\n")
    print("fixtures written to", FIXTURES)


if __name__ == "__main__":
    sys.exit(build_all())
