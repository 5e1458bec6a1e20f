"""Sound star enclosures for ReLU, logistic sigmoid, and tanh.

ReLU supports exact case splitting (piecewise linear) and a single-star
triangle relaxation. Sigmoid and tanh have no exact star image; they get an
interval relaxation (output bounds only, sound by monotonicity) and a secant
refinement that adds chord/tangent cuts on neurons whose pre-activation range
lies in a pure convexity region. Both functions are convex left of zero and
concave right of zero, so one region test serves both.

Constant dimensions (zero basis row) are mapped exactly and add no variable;
approximate modes add exactly one fresh variable per remaining neuron (per
crossing neuron, for ReLU).
"""

from __future__ import annotations

from enum import Enum
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import SplitBudgetError
from .stars import BOUND_GUARD, IntervalBox, Star, StarUnion, affine_map, \
    range_of

DEFAULT_SPLIT_BUDGET = 10_000

# Secant cuts need a usable slope; below this width the interval bounds are
# already tight to working precision.
_MIN_SECANT_WIDTH = 1e-12


class ActivationKind(Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"


class RelaxationMode(Enum):
    """How an activation image is enclosed.

    INTERVAL and SECANT apply to sigmoid/tanh; EXACT_SPLIT and APPROX to
    ReLU.
    """

    INTERVAL = "interval"
    SECANT = "secant"
    EXACT_SPLIT = "exact_split"
    APPROX = "approx"


def _sigmoid(x):
    return expit(x)


def _sigmoid_deriv(x):
    s = expit(x)
    return s * (1.0 - s)


def _tanh_deriv(x):
    t = np.tanh(x)
    return 1.0 - t * t


def relu_reach(s: Star, mode: RelaxationMode,
               split_budget: int = DEFAULT_SPLIT_BUDGET) -> StarUnion:
    """Reachable set of elementwise ReLU over a star.

    EXACT_SPLIT returns a union whose pointwise image equals ReLU(s); APPROX
    returns a single star using the triangle relaxation per crossing neuron.
    """
    if mode == RelaxationMode.EXACT_SPLIT:
        return _relu_exact(s, split_budget)
    if mode == RelaxationMode.APPROX:
        return StarUnion(members=(_relu_approx(s),))
    raise ValueError(f"unsupported ReLU mode: {mode}")


def _relu_exact(s: Star, split_budget: int) -> StarUnion:
    pieces = [s]
    n = s.dim
    for i in range(n):
        next_pieces = []
        for piece in pieces:
            box = range_of(piece, dims=[i])
            l, u = box.lower[0], box.upper[0]
            if l >= 0.0:
                next_pieces.append(piece)
                continue
            zero_row = np.eye(n)
            zero_row[i, i] = 0.0
            if u <= 0.0:
                next_pieces.append(affine_map(piece, zero_row))
                continue
            row = piece.basis[i]
            c = piece.center[i]
            pos = Star(piece.center, piece.basis,
                       piece.pred.extended(
                           new_lo=np.zeros(0), new_hi=np.zeros(0),
                           rows_old=-row[None, :], rows_new=np.zeros((1, 0)),
                           rows_rhs=np.array([c])))
            neg = Star(piece.center, piece.basis,
                       piece.pred.extended(
                           new_lo=np.zeros(0), new_hi=np.zeros(0),
                           rows_old=row[None, :], rows_new=np.zeros((1, 0)),
                           rows_rhs=np.array([-c])))
            next_pieces.append(pos)
            next_pieces.append(affine_map(neg, zero_row))
        if len(next_pieces) > split_budget:
            raise SplitBudgetError(
                f"exact ReLU split would exceed {split_budget} stars"
            )
        pieces = next_pieces
    return StarUnion(members=tuple(pieces))


def _relu_approx(s: Star) -> Star:
    box = range_of(s)
    l, u = box.lower, box.upper
    const = ~s.basis.any(axis=1)
    pinned = (u <= 0.0) | (const & (s.center <= 0.0))
    identity = ~pinned & ((l >= 0.0) | const)
    crossing = np.flatnonzero(~pinned & ~identity)
    k = crossing.size
    m = s.num_variables

    center = np.where(pinned, 0.0, s.center)
    basis = np.hstack([np.where(pinned[:, None], 0.0, s.basis),
                       np.zeros((s.dim, k))])
    if k == 0:
        return Star(center=center, basis=basis[:, :m], pred=s.pred)

    # The triangle geometry uses guard-inflated bounds so it encloses inputs
    # up to LP tolerance outside the reported range.
    pad = BOUND_GUARD * (1.0 + np.maximum(np.abs(l), np.abs(u)))
    lg, ug = l - pad, u + pad
    rows_old = np.zeros((2 * k, m))
    rows_new = np.zeros((2 * k, k))
    rhs = np.zeros(2 * k)
    for j, i in enumerate(crossing):
        slope = ug[i] / (ug[i] - lg[i])
        # y >= x  and  y <= slope * (x - l); y >= 0 lives in the bounds.
        rows_old[2 * j] = s.basis[i]
        rows_new[2 * j, j] = -1.0
        rhs[2 * j] = -s.center[i]
        rows_old[2 * j + 1] = -slope * s.basis[i]
        rows_new[2 * j + 1, j] = 1.0
        rhs[2 * j + 1] = slope * (s.center[i] - lg[i])
        center[i] = 0.0
        basis[i, :] = 0.0
        basis[i, m + j] = 1.0
    pred = s.pred.extended(new_lo=np.zeros(k), new_hi=ug[crossing],
                           rows_old=rows_old, rows_new=rows_new, rows_rhs=rhs)
    return Star(center=center, basis=basis, pred=pred)


def sigmoid_reach(s: Star, mode: RelaxationMode,
                  box: "IntervalBox | None" = None) -> Star:
    """Sound enclosure of elementwise logistic sigmoid over a star.

    ``box``, when given, must be a full-dimension range of ``s`` (callers
    that already paid for the LP pass it in to avoid recomputation).
    """
    return _sshape_reach(s, mode, _sigmoid, _sigmoid_deriv, box)


def tanh_reach(s: Star, mode: RelaxationMode,
               box: "IntervalBox | None" = None) -> Star:
    """Sound enclosure of elementwise tanh over a star."""
    return _sshape_reach(s, mode, np.tanh, _tanh_deriv, box)


def _sshape_reach(s: Star, mode: RelaxationMode,
                  f: Callable, fprime: Callable,
                  box: "IntervalBox | None" = None) -> Star:
    if mode not in (RelaxationMode.INTERVAL, RelaxationMode.SECANT):
        raise ValueError(f"unsupported sigmoid/tanh mode: {mode}")
    const = ~s.basis.any(axis=1)
    live = np.flatnonzero(~const)
    k = live.size
    m = s.num_variables

    center = np.where(const, f(s.center), 0.0)
    basis = np.zeros((s.dim, m + k))
    if k == 0:
        return Star(center=center, basis=basis[:, :m], pred=s.pred)

    if box is None:
        box = range_of(s, dims=live)
        l, u = box.lower, box.upper
    else:
        l, u = box.lower[live], box.upper[live]
    pad = BOUND_GUARD * (1.0 + np.maximum(np.abs(l), np.abs(u)))
    l = l - pad
    u = u + pad
    new_lo = f(l)
    new_hi = f(u)

    rows_old: list[np.ndarray] = []
    rows_new: list[np.ndarray] = []
    rhs: list[float] = []
    for j, i in enumerate(live):
        basis[i, m + j] = 1.0
        if mode != RelaxationMode.SECANT:
            continue
        lj, uj = l[j], u[j]
        if uj - lj < _MIN_SECANT_WIDTH or (lj < 0.0 < uj):
            continue  # mixed-sign neuron falls back to the interval bounds
        # In a pure convexity region the graph sits between its tangents and
        # the chord: convex (u <= 0) means chord above, tangents below;
        # concave (l >= 0) is the mirror image.
        chord_slope = (f(uj) - f(lj)) / (uj - lj)
        cuts = [
            (chord_slope, f(lj) - chord_slope * lj),
            (fprime(lj), f(lj) - fprime(lj) * lj),
            (fprime(uj), f(uj) - fprime(uj) * uj),
        ]
        uppers = [True, False, False] if uj <= 0.0 else [False, True, True]
        for (slope, intercept), is_upper in zip(cuts, uppers):
            sign = 1.0 if is_upper else -1.0
            # upper: y - slope*x <= intercept; lower: slope*x - y <= -intercept
            row_old = -sign * slope * s.basis[i]
            row_new = np.zeros(k)
            row_new[j] = sign
            rows_old.append(row_old)
            rows_new.append(row_new)
            rhs.append(sign * (intercept + slope * s.center[i]))

    if rows_old:
        pred = s.pred.extended(
            new_lo=new_lo, new_hi=new_hi,
            rows_old=np.array(rows_old), rows_new=np.array(rows_new),
            rows_rhs=np.array(rhs),
        )
    else:
        pred = s.pred.extended(new_lo=new_lo, new_hi=new_hi)
    return Star(center=center, basis=basis, pred=pred)
