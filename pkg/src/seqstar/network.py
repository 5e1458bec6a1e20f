"""Model container, JSON file format, forward evaluation, and network reach.

Model files are a single JSON document:

    {
      "name": "...",                     # optional
      "input_features": n,
      "labels": ["classA", ...],         # optional, length = output_dim
      "layers": [
        {"kind": "fully_connected", "weights": [[...]], "bias": [...]},
        {"kind": "conv1d", "weights": [[[...]]], "bias": [...],
         "stride": 1, "padding": 0, "dilation": 1},
        {"kind": "relu"},
        {"kind": "lstm", "W_i": [[...]], "W_f": ..., "W_g": ..., "W_o": ...,
         "R_i": ..., "R_f": ..., "R_g": ..., "R_o": ...,
         "b_i": [...], ..., "output_mode": "last"}
      ]
    }

Weight arrays are row-major nested lists. There is no softmax layer kind:
models are verified on their pre-softmax outputs, so exporters must strip
any classification head down to the final linear layer.

Datasets are JSON lines, one object per sequence:
``{"values": [[...], ...], "label": k}`` with values as n_f rows by t_s
columns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.special import expit

from .activations import RelaxationMode
from .errors import (
    DimensionMismatchError,
    IncompatibleModeError,
    ModelFormatError,
    SplitBudgetError,
)
from .layers import LayerSpec, SequenceStar, conv1d_reach, fc_reach, \
    lstm_reach, relu_layer_reach
from .stars import Star, StarUnion

VERIFY_MODES = ("interval", "secant", "exact_relu")


@dataclass(frozen=True)
class SequenceTensor:
    """One concrete sequence sample: n_f features by t_s time steps."""

    values: np.ndarray
    label: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[1] < 1:
            raise ModelFormatError("sequence values must be n_f x t_s with t_s >= 1")
        if not np.isfinite(values).all():
            raise ModelFormatError("sequence contains non-finite entries")

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def t_s(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layers plus input/output bookkeeping."""

    input_features: int
    layers: tuple[LayerSpec, ...]
    output_dim: int
    name: str = "network"
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "labels", tuple(self.labels))
        self._check_chain()

    def _check_chain(self):
        features = self.input_features
        carrier = "sequence"
        for idx, layer in enumerate(self.layers):
            if layer.kind == "fully_connected":
                if layer.weights.shape[1] != features:
                    raise ModelFormatError(
                        f"layer {idx}: fully_connected expects {layer.weights.shape[1]} "
                        f"inputs but receives {features}"
                    )
                features = layer.weights.shape[0]
                # On a sequence carrier this is only valid for t_s == 1
                # (checked at evaluation time); afterwards it is a vector.
                carrier = "vector"
            elif layer.kind == "conv1d":
                if carrier != "sequence":
                    raise ModelFormatError(
                        f"layer {idx}: conv1d requires a sequence input"
                    )
                if layer.weights.shape[1] != features:
                    raise ModelFormatError(
                        f"layer {idx}: conv1d expects {layer.weights.shape[1]} "
                        f"channels but receives {features}"
                    )
                features = layer.weights.shape[0]
            elif layer.kind == "relu":
                pass
            elif layer.kind == "lstm":
                if carrier != "sequence":
                    raise ModelFormatError(
                        f"layer {idx}: lstm requires a sequence input"
                    )
                if layer.lstm_input_size != features:
                    raise ModelFormatError(
                        f"layer {idx}: lstm expects {layer.lstm_input_size} "
                        f"features but receives {features}"
                    )
                features = layer.hidden_size
                if layer.output_mode == "last":
                    carrier = "vector"
            else:
                raise ModelFormatError(f"layer {idx}: unknown kind {layer.kind!r}")
        if features != self.output_dim:
            raise ModelFormatError(
                f"final layer produces {features} values, expected "
                f"output_dim {self.output_dim}"
            )
        if self.labels and len(self.labels) != self.output_dim:
            raise ModelFormatError(
                f"{len(self.labels)} labels for {self.output_dim} outputs"
            )

    def validate_mode(self, mode: str):
        if mode not in VERIFY_MODES:
            raise IncompatibleModeError(
                f"unknown mode {mode!r}; expected one of {VERIFY_MODES}"
            )
        if mode == "exact_relu":
            bad = [l.kind for l in self.layers if l.kind not in
                   ("fully_connected", "relu")]
            if bad:
                raise IncompatibleModeError(
                    "exact_relu mode only applies to fully-connected/ReLU "
                    f"networks; this model contains {sorted(set(bad))}"
                )

    def summary_lines(self) -> list[str]:
        lines = [f"model: {self.name}",
                 f"input features: {self.input_features}"]
        for idx, layer in enumerate(self.layers):
            if layer.kind == "fully_connected":
                out_d, in_d = layer.weights.shape
                params = layer.weights.size + layer.bias.size
                desc = f"fully_connected({in_d} -> {out_d}), {params} params"
            elif layer.kind == "conv1d":
                out_c, in_c, k = layer.weights.shape
                params = layer.weights.size + layer.bias.size
                desc = (f"conv1d({in_c} -> {out_c}, k={k}, stride={layer.stride}, "
                        f"padding={layer.padding}, dilation={layer.dilation}), "
                        f"{params} params")
            elif layer.kind == "relu":
                desc = "relu"
            else:
                h = layer.hidden_size
                params = sum(w.size for w in layer.gate_weights.values()) \
                    + sum(w.size for w in layer.recurrent_weights.values()) \
                    + sum(w.size for w in layer.gate_biases.values())
                desc = (f"lstm(input={layer.lstm_input_size}, hidden={h}, "
                        f"output={layer.output_mode}), {params} params")
            lines.append(f"layer {idx}: {desc}")
        lines.append(f"output classes: {self.output_dim}")
        if self.labels:
            lines.append("labels: " + ", ".join(self.labels))
        return lines


# ---------------------------------------------------------------------------
# Serialization


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ModelFormatError(f"{context}: missing field {key!r}")
    return obj[key]


def _layer_from_dict(obj: dict, idx: int) -> LayerSpec:
    context = f"layer {idx}"
    kind = _require(obj, "kind", context)
    try:
        if kind == "fully_connected":
            return LayerSpec.fully_connected(
                _require(obj, "weights", context), _require(obj, "bias", context))
        if kind == "conv1d":
            return LayerSpec.conv1d(
                _require(obj, "weights", context), _require(obj, "bias", context),
                stride=obj.get("stride", 1), padding=obj.get("padding", 0),
                dilation=obj.get("dilation", 1))
        if kind == "relu":
            return LayerSpec.relu()
        if kind == "lstm":
            gw = {g: _require(obj, f"W_{g}", context) for g in "ifgo"}
            rw = {g: _require(obj, f"R_{g}", context) for g in "ifgo"}
            gb = {g: _require(obj, f"b_{g}", context) for g in "ifgo"}
            return LayerSpec.lstm(gw, rw, gb,
                                  output_mode=obj.get("output_mode", "last"))
    except DimensionMismatchError as exc:
        raise ModelFormatError(f"{context}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{context}: malformed arrays ({exc})") from exc
    raise ModelFormatError(f"{context}: unknown kind {kind!r}")


def _layer_to_dict(layer: LayerSpec) -> dict:
    if layer.kind == "fully_connected":
        return {"kind": "fully_connected",
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist()}
    if layer.kind == "conv1d":
        return {"kind": "conv1d", "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(), "stride": layer.stride,
                "padding": layer.padding, "dilation": layer.dilation}
    if layer.kind == "relu":
        return {"kind": "relu"}
    obj = {"kind": "lstm", "output_mode": layer.output_mode}
    for g in "ifgo":
        obj[f"W_{g}"] = layer.gate_weights[g].tolist()
        obj[f"R_{g}"] = layer.recurrent_weights[g].tolist()
        obj[f"b_{g}"] = layer.gate_biases[g].tolist()
    return obj


def network_from_dict(obj: dict) -> NetworkSpec:
    if not isinstance(obj, dict):
        raise ModelFormatError("model document must be a JSON object")
    n_f = _require(obj, "input_features", "model")
    raw_layers = _require(obj, "layers", "model")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ModelFormatError("model: layers must be a non-empty list")
    layers = tuple(_layer_from_dict(l, i) for i, l in enumerate(raw_layers))
    out_dim = obj.get("output_dim")
    if out_dim is None:
        out_dim = _infer_output_dim(int(n_f), layers)
    return NetworkSpec(
        input_features=int(n_f),
        layers=layers,
        output_dim=int(out_dim),
        name=obj.get("name", "network"),
        labels=tuple(obj.get("labels", ())),
    )


def _infer_output_dim(n_f: int, layers: tuple[LayerSpec, ...]) -> int:
    features = n_f
    for layer in layers:
        if layer.kind == "fully_connected":
            features = layer.weights.shape[0]
        elif layer.kind == "conv1d":
            features = layer.weights.shape[0]
        elif layer.kind == "lstm":
            features = layer.hidden_size
    return features


def network_to_dict(net: NetworkSpec) -> dict:
    return {
        "name": net.name,
        "input_features": net.input_features,
        "output_dim": net.output_dim,
        "labels": list(net.labels),
        "layers": [_layer_to_dict(l) for l in net.layers],
    }


def load_model(path) -> NetworkSpec:
    """Parse, schema-check, and dimension-check a model file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file {path} is not valid JSON: {exc}") \
            from exc
    return network_from_dict(obj)


def save_model(net: NetworkSpec, path):
    Path(path).write_text(json.dumps(network_to_dict(net)) + "\n")


def load_dataset(path) -> list[SequenceTensor]:
    """JSON-lines dataset: one {"values": ..., "label": k} object per line."""
    sequences = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ModelFormatError(f"cannot read dataset {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(
                f"{path}:{lineno}: not valid JSON: {exc}") from exc
        values = _require(obj, "values", f"{path}:{lineno}")
        label = obj.get("label")
        sequences.append(SequenceTensor(values=np.asarray(values, dtype=float),
                                        label=label))
    if not sequences:
        raise ModelFormatError(f"dataset {path} holds no sequences")
    return sequences


def save_dataset(sequences: Iterable[SequenceTensor], path):
    with open(path, "w") as fh:
        for seq in sequences:
            fh.write(json.dumps({"values": seq.values.tolist(),
                                 "label": seq.label}) + "\n")


# ---------------------------------------------------------------------------
# Concrete evaluation


def maxID(v) -> int:
    """Index of the largest entry; ties go to the lowest index."""
    v = np.asarray(v)
    if v.size == 0:
        raise DimensionMismatchError("maxID of an empty vector")
    return int(np.argmax(v))


def forward(net: NetworkSpec, x: SequenceTensor | np.ndarray) -> np.ndarray:
    """Concrete forward pass; returns the pre-softmax output vector."""
    values = x.values if isinstance(x, SequenceTensor) else np.asarray(x, float)
    out = forward_batch(net, values[None, :, :])
    return out[0]


def forward_batch(net: NetworkSpec, batch: np.ndarray) -> np.ndarray:
    """Vectorized forward pass over a (B, n_f, t_s) batch."""
    cur = np.asarray(batch, dtype=float)
    if cur.ndim != 3:
        raise DimensionMismatchError("batch must be (B, n_f, t_s)")
    if cur.shape[1] != net.input_features:
        raise DimensionMismatchError(
            f"model expects {net.input_features} features, batch has "
            f"{cur.shape[1]}"
        )
    is_seq = True
    for idx, layer in enumerate(net.layers):
        if layer.kind == "fully_connected":
            if is_seq:
                if cur.shape[2] != 1:
                    raise DimensionMismatchError(
                        f"layer {idx}: fully_connected on a sequence needs "
                        f"t_s == 1, got {cur.shape[2]}"
                    )
                cur = cur[:, :, 0]
                is_seq = False
            cur = cur @ layer.weights.T + layer.bias
        elif layer.kind == "relu":
            cur = np.maximum(cur, 0.0)
        elif layer.kind == "conv1d":
            cur = _conv1d_batch(cur, layer)
        elif layer.kind == "lstm":
            cur = _lstm_batch(cur, layer)
            is_seq = layer.output_mode == "sequence"
    if is_seq:
        raise DimensionMismatchError(
            "network output is still a sequence; the final layer must "
            "produce a class vector"
        )
    return cur


def _conv1d_batch(batch: np.ndarray, layer: LayerSpec) -> np.ndarray:
    W = layer.weights
    out_ch, in_ch, k = W.shape
    B, _, length = batch.shape
    out_len = layer.conv_output_length(length)
    if out_len < 1:
        raise DimensionMismatchError("conv1d output length < 1")
    padded = np.pad(batch, ((0, 0), (0, 0), (layer.padding, layer.padding)))
    out = np.empty((B, out_ch, out_len))
    for j in range(out_len):
        start = j * layer.stride
        window = padded[:, :, start:start + layer.dilation * (k - 1) + 1:
                        layer.dilation]
        out[:, :, j] = np.einsum("bik,oik->bo", window, W) + layer.bias
    return out


def _lstm_batch(batch: np.ndarray, layer: LayerSpec) -> np.ndarray:
    B, _, t_s = batch.shape
    hidden = layer.hidden_size
    h = np.zeros((B, hidden))
    c = np.zeros((B, hidden))
    outs = np.empty((B, hidden, t_s))
    sig = expit
    gw, rw, gb = layer.gate_weights, layer.recurrent_weights, layer.gate_biases
    for t in range(t_s):
        x = batch[:, :, t]
        i = sig(x @ gw["i"].T + h @ rw["i"].T + gb["i"])
        f = sig(x @ gw["f"].T + h @ rw["f"].T + gb["f"])
        g = np.tanh(x @ gw["g"].T + h @ rw["g"].T + gb["g"])
        o = sig(x @ gw["o"].T + h @ rw["o"].T + gb["o"])
        c = f * c + i * g
        h = o * np.tanh(c)
        outs[:, :, t] = h
    if layer.output_mode == "last":
        return h
    return outs


# ---------------------------------------------------------------------------
# Whole-network reachability


def _mode_for_relu(mode: str) -> RelaxationMode:
    return RelaxationMode.EXACT_SPLIT if mode == "exact_relu" \
        else RelaxationMode.APPROX


def _mode_for_gates(mode: str) -> RelaxationMode:
    return RelaxationMode.SECANT if mode == "secant" else RelaxationMode.INTERVAL


def reach(net: NetworkSpec, input_set: SequenceStar, mode: str = "interval",
          split_budget: int = 10_000) -> StarUnion:
    """Output reachable set of the network for a sequence input star.

    Folds per-layer reachability in declaration order. The result is a
    union (a single star in the approximate modes) that contains
    forward(net, x) for every x in the input set.
    """
    net.validate_mode(mode)
    if input_set.n_features != net.input_features:
        raise DimensionMismatchError(
            f"model expects {net.input_features} features, input star has "
            f"{input_set.n_features}"
        )
    relu_mode = _mode_for_relu(mode)
    gate_mode = _mode_for_gates(mode)
    carrier: SequenceStar | list[Star] = input_set
    for idx, layer in enumerate(net.layers):
        if isinstance(carrier, SequenceStar):
            if layer.kind == "fully_connected":
                if carrier.t_s != 1:
                    raise DimensionMismatchError(
                        f"layer {idx}: fully_connected on a sequence needs "
                        f"t_s == 1, got {carrier.t_s}"
                    )
                carrier = [fc_reach(carrier.steps[0], layer)]
            elif layer.kind == "conv1d":
                carrier = conv1d_reach(carrier, layer)
            elif layer.kind == "relu":
                carrier = relu_layer_reach(carrier, relu_mode, split_budget)
            elif layer.kind == "lstm":
                result = lstm_reach(carrier, layer, gate_mode)
                carrier = result if isinstance(result, SequenceStar) \
                    else [result]
        else:
            if layer.kind == "fully_connected":
                carrier = [fc_reach(s, layer) for s in carrier]
            elif layer.kind == "relu":
                pieces: list[Star] = []
                for s in carrier:
                    pieces.extend(relu_layer_reach(s, relu_mode,
                                                   split_budget).members)
                    if len(pieces) > split_budget:
                        raise SplitBudgetError(
                            f"union exceeded split budget {split_budget}"
                        )
                carrier = pieces
            else:
                raise DimensionMismatchError(
                    f"layer {idx}: {layer.kind} cannot follow a vector carrier"
                )
    if isinstance(carrier, SequenceStar):
        raise DimensionMismatchError(
            "network reach ended on a sequence carrier; the final layer "
            "must produce a class vector"
        )
    return StarUnion(members=tuple(carrier))
