"""Layer-level reachability for fully-connected, Conv1D, ReLU, and LSTM.

Sequence-shaped sets are carried as a list of per-step stars over one shared
variable space. Operations that introduce relaxation variables grow that
space append-only; previously computed stars are re-embedded with zero
columns, which keeps every cross-step correlation intact.

A verification task runs its time steps sequentially (the recurrence is a
data dependency); distinct tasks share nothing mutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import (
    RelaxationMode,
    relu_reach,
    sigmoid_reach,
    tanh_reach,
)
from .errors import DimensionMismatchError, IncompatibleModeError
from .stars import (
    IntervalBox,
    Predicate,
    Star,
    affine_map,
    embed_into,
    hadamard_product,
    range_of,
    shared_variable_sum,
)

LSTM_GATE_ORDER = ("i", "f", "g", "o")


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one network layer.

    Which fields are meaningful depends on ``kind``; use the constructors
    below rather than filling the record by hand.
    """

    kind: str
    weights: np.ndarray | None = None          # fc: (out, in); conv1d: (out_ch, in_ch, k)
    bias: np.ndarray | None = None
    stride: int = 1
    padding: int = 0
    dilation: int = 1
    gate_weights: dict | None = None           # lstm: W_i..W_o, (hidden, in)
    recurrent_weights: dict | None = None      # lstm: R_i..R_o, (hidden, hidden)
    gate_biases: dict | None = None            # lstm: b_i..b_o, (hidden,)
    output_mode: str = "last"

    @staticmethod
    def fully_connected(weights, bias) -> "LayerSpec":
        W = np.asarray(weights, dtype=float)
        b = np.asarray(bias, dtype=float)
        if W.ndim != 2 or b.shape != (W.shape[0],):
            raise DimensionMismatchError(
                "fully connected layer needs (out, in) weights and (out,) bias"
            )
        return LayerSpec(kind="fully_connected", weights=W, bias=b)

    @staticmethod
    def conv1d(weights, bias, stride=1, padding=0, dilation=1) -> "LayerSpec":
        W = np.asarray(weights, dtype=float)
        b = np.asarray(bias, dtype=float)
        if W.ndim != 3 or b.shape != (W.shape[0],):
            raise DimensionMismatchError(
                "conv1d needs (out_ch, in_ch, k) weights and (out_ch,) bias"
            )
        if stride < 1 or padding < 0 or dilation < 1:
            raise DimensionMismatchError("invalid conv1d geometry")
        return LayerSpec(kind="conv1d", weights=W, bias=b, stride=int(stride),
                         padding=int(padding), dilation=int(dilation))

    @staticmethod
    def relu() -> "LayerSpec":
        return LayerSpec(kind="relu")

    @staticmethod
    def lstm(gate_weights, recurrent_weights, gate_biases,
             output_mode="last") -> "LayerSpec":
        gw = {g: np.asarray(gate_weights[g], dtype=float)
              for g in LSTM_GATE_ORDER}
        rw = {g: np.asarray(recurrent_weights[g], dtype=float)
              for g in LSTM_GATE_ORDER}
        gb = {g: np.asarray(gate_biases[g], dtype=float)
              for g in LSTM_GATE_ORDER}
        hidden, inp = gw["i"].shape
        for g in LSTM_GATE_ORDER:
            if gw[g].shape != (hidden, inp) or rw[g].shape != (hidden, hidden) \
                    or gb[g].shape != (hidden,):
                raise DimensionMismatchError(
                    f"lstm gate '{g}' weights are inconsistent"
                )
        if output_mode not in ("last", "sequence"):
            raise DimensionMismatchError(
                f"unknown lstm output mode: {output_mode}"
            )
        return LayerSpec(kind="lstm", gate_weights=gw, recurrent_weights=rw,
                         gate_biases=gb, output_mode=output_mode)

    @property
    def hidden_size(self) -> int:
        return self.gate_weights["i"].shape[0]

    @property
    def lstm_input_size(self) -> int:
        return self.gate_weights["i"].shape[1]

    def conv_output_length(self, length: int) -> int:
        k = self.weights.shape[2]
        return (length + 2 * self.padding - self.dilation * (k - 1) - 1) \
            // self.stride + 1


@dataclass(frozen=True)
class SequenceStar:
    """Per-step stars over one shared variable space."""

    steps: tuple[Star, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise DimensionMismatchError("a sequence star needs >= 1 step")
        pred = steps[0].pred
        n = steps[0].dim
        for s in steps[1:]:
            if s.dim != n:
                raise DimensionMismatchError("steps differ in feature count")
            if s.pred is not pred and not (s.pred.extends(pred)
                                           and pred.extends(s.pred)):
                raise DimensionMismatchError(
                    "sequence steps must share one predicate"
                )

    @property
    def n_features(self) -> int:
        return self.steps[0].dim

    @property
    def t_s(self) -> int:
        return len(self.steps)

    @property
    def pred(self) -> Predicate:
        return self.steps[0].pred

    @property
    def num_variables(self) -> int:
        return self.pred.num_variables

    @staticmethod
    def from_values(values: np.ndarray) -> "SequenceStar":
        """Degenerate sequence star holding one concrete sequence."""
        values = np.asarray(values, dtype=float)
        pred = Predicate.trivial(0)
        steps = tuple(Star.point(values[:, t], pred)
                      for t in range(values.shape[1]))
        return SequenceStar(steps=steps)

    def embedded(self, pred: Predicate) -> "SequenceStar":
        return SequenceStar(steps=tuple(embed_into(s, pred)
                                        for s in self.steps))


@dataclass(frozen=True)
class LstmStateStars:
    """Hidden and cell state enclosures over the shared variable space.

    ``cell_box`` carries the cell star's range forward so the next step's
    forget-gate product does not re-query the LP for it.
    """

    hidden: Star
    cell: Star
    cell_box: IntervalBox | None = None

    def __post_init__(self):
        if self.hidden.dim != self.cell.dim:
            raise DimensionMismatchError("hidden/cell dimension mismatch")
        if self.hidden.num_variables != self.cell.num_variables:
            raise DimensionMismatchError("hidden/cell variable-space mismatch")


def fc_reach(s: Star, layer: LayerSpec) -> Star:
    """Exact image of a star under a fully-connected layer."""
    if layer.kind != "fully_connected":
        raise DimensionMismatchError(f"not a fully connected layer: {layer.kind}")
    return affine_map(s, layer.weights, layer.bias)


def conv1d_reach(seq: SequenceStar, layer: LayerSpec) -> SequenceStar:
    """Exact 1-D convolution over a sequence star.

    Convolution is linear, so every output step is an affine form over the
    shared variable space; zero padding contributes constants.
    """
    if layer.kind != "conv1d":
        raise DimensionMismatchError(f"not a conv1d layer: {layer.kind}")
    W = layer.weights
    out_ch, in_ch, k = W.shape
    if seq.n_features != in_ch:
        raise DimensionMismatchError(
            f"conv1d expects {in_ch} channels, sequence has {seq.n_features}"
        )
    out_len = layer.conv_output_length(seq.t_s)
    if out_len < 1:
        raise DimensionMismatchError(
            f"conv1d output length {out_len} < 1 for input length {seq.t_s}"
        )
    pred = seq.pred
    m = pred.num_variables
    out_steps = []
    for j in range(out_len):
        center = layer.bias.copy()
        basis = np.zeros((out_ch, m))
        for tap in range(k):
            t = j * layer.stride - layer.padding + tap * layer.dilation
            if t < 0 or t >= seq.t_s:
                continue  # zero padding: no contribution
            step = seq.steps[t]
            center += W[:, :, tap] @ step.center
            basis += W[:, :, tap] @ step.basis
        out_steps.append(Star(center=center, basis=basis, pred=pred))
    return SequenceStar(steps=tuple(out_steps))


def relu_layer_reach(x, mode: RelaxationMode, split_budget: int = 10_000):
    """Elementwise ReLU over a star (union result) or a sequence star.

    Sequences only support the single-star relaxation; exact splitting of a
    union of sequences is rejected as intractable bookkeeping.
    """
    if isinstance(x, Star):
        return relu_reach(x, mode, split_budget)
    if not isinstance(x, SequenceStar):
        raise DimensionMismatchError(f"unsupported carrier: {type(x)!r}")
    if mode == RelaxationMode.EXACT_SPLIT:
        raise IncompatibleModeError(
            "exact ReLU splitting is not supported on sequence carriers"
        )
    new_steps: list[Star] = []
    for step in x.steps:
        step = embed_into(step, new_steps[-1].pred) if new_steps else step
        new_steps.append(relu_reach(step, RelaxationMode.APPROX).members[0])
    pred = new_steps[-1].pred
    return SequenceStar(steps=tuple(embed_into(s, pred) for s in new_steps))


def _gate_mode(mode: RelaxationMode) -> RelaxationMode:
    if mode in (RelaxationMode.INTERVAL, RelaxationMode.SECANT):
        return mode
    raise IncompatibleModeError(
        f"LSTM gates require interval or secant relaxation, got {mode.value}"
    )


def lstm_step_reach(x_t: Star, state: LstmStateStars, layer: LayerSpec,
                    mode: RelaxationMode) -> LstmStateStars:
    """One LSTM time step over star enclosures.

    Computes the four gate pre-activations as shared-variable sums of the
    input and recurrent affine maps, encloses the gate activations, then the
    two cell products and their sum, and finally the hidden state product.
    The result lives in a widened variable space extending the input's.
    """
    if layer.kind != "lstm":
        raise DimensionMismatchError(f"not an lstm layer: {layer.kind}")
    gmode = _gate_mode(mode)
    h_prev, c_prev = state.hidden, state.cell
    hidden = layer.hidden_size
    zero = np.zeros(hidden)

    pre = {}
    for g in LSTM_GATE_ORDER:
        pre[g] = shared_variable_sum(
            affine_map(x_t, layer.gate_weights[g], layer.gate_biases[g]),
            affine_map(h_prev, layer.recurrent_weights[g], zero),
        )

    i_s = sigmoid_reach(pre["i"], gmode)
    f_s = sigmoid_reach(embed_into(pre["f"], i_s.pred), gmode)
    g_s = tanh_reach(embed_into(pre["g"], f_s.pred), gmode)
    o_s = sigmoid_reach(embed_into(pre["o"], g_s.pred), gmode)

    pred = o_s.pred
    i_s = embed_into(i_s, pred)
    f_s = embed_into(f_s, pred)
    g_s = embed_into(g_s, pred)
    c_prev = embed_into(c_prev, pred)

    # Enclosures are recomputed per step; the LP shortcut makes the fresh
    # gate variables (bounds only, no rows yet) exact and cheap, and the
    # cell range is carried over from the previous step.
    c_prev_box = state.cell_box if state.cell_box is not None \
        else range_of(c_prev)
    f_c = hadamard_product(f_s, c_prev, range_of(f_s), c_prev_box,
                           shared=True)
    pred = f_c.pred
    i_g = hadamard_product(embed_into(i_s, pred), embed_into(g_s, pred),
                           range_of(i_s), range_of(g_s), shared=True)
    pred = i_g.pred
    c_t = shared_variable_sum(embed_into(f_c, pred), i_g)

    c_box = range_of(c_t)
    squashed = tanh_reach(c_t, gmode, box=c_box)
    pred = squashed.pred
    h_t = hadamard_product(embed_into(o_s, pred), squashed,
                           range_of(o_s), range_of(squashed), shared=True)
    return LstmStateStars(hidden=h_t, cell=embed_into(c_t, h_t.pred),
                          cell_box=c_box)


def lstm_reach(seq: SequenceStar, layer: LayerSpec, mode: RelaxationMode):
    """Fold lstm_step_reach over a sequence star.

    Returns the final hidden star (output_mode "last") or the per-step
    hidden sequence star (output_mode "sequence"). Initial hidden and cell
    states are zero points.
    """
    if layer.kind != "lstm":
        raise DimensionMismatchError(f"not an lstm layer: {layer.kind}")
    if seq.n_features != layer.lstm_input_size:
        raise DimensionMismatchError(
            f"lstm expects {layer.lstm_input_size} features, "
            f"sequence has {seq.n_features}"
        )
    hidden = layer.hidden_size
    zero = Star.point(np.zeros(hidden), seq.pred)
    state = LstmStateStars(hidden=zero, cell=zero,
                           cell_box=IntervalBox(np.zeros(hidden),
                                                np.zeros(hidden)))
    outputs: list[Star] = []
    for step in seq.steps:
        x_t = embed_into(step, state.hidden.pred)
        state = lstm_step_reach(x_t, state, layer, mode)
        outputs.append(state.hidden)
    if layer.output_mode == "last":
        return state.hidden
    pred = state.hidden.pred
    return SequenceStar(steps=tuple(embed_into(s, pred) for s in outputs))
