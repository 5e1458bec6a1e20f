"""Generalized star sets and the closed set operations over them.

A star is the affine image of a bounded polytope in variable space:

    [[Star]] = { center + basis @ alpha :
                 C @ alpha <= d,  lower <= alpha <= upper }

Explicit variable bounds are stored separately from the general constraint
rows so that range queries can take a cheap exact interval shortcut whenever
the involved variables appear in no general row; everything else goes through
an LP (scipy's HiGHS backend).

Stars are immutable values. Operations are pure functions, so stars can be
shared freely across threads; concurrent range queries on distinct stars are
safe because each LP solve is independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csc_matrix

from .errors import (
    DimensionMismatchError,
    EmptyStarError,
    PredicateMismatchError,
    UnboundedStarError,
)

# Feasibility tolerance handed to the LP backend. Semantic tests use their
# own, caller-supplied tolerances (default 1e-6); the two are deliberately
# decoupled.
LP_TOLERANCE = 1e-9

# LP-reported optima can undershoot the true extreme by roughly the solver
# tolerance. Wherever an LP range parameterizes a relaxation (McCormick
# cuts, activation bounds), it is first inflated by this guard so the
# relaxation stays a strict outer enclosure; otherwise the tiny inward
# errors compound across chained products until the predicate goes empty.
BOUND_GUARD = 1e-8

_LP_OPTIONS = {
    "primal_feasibility_tolerance": LP_TOLERANCE,
    "dual_feasibility_tolerance": LP_TOLERANCE,
}


def guarded(box: "IntervalBox") -> "IntervalBox":
    """Outward-inflated copy of a range, safe to use as relaxation bounds."""
    pad = BOUND_GUARD * (1.0 + np.maximum(np.abs(box.lower),
                                          np.abs(box.upper)))
    return IntervalBox(lower=box.lower - pad, upper=box.upper + pad)


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.flags.writeable:
        a = a.copy()
        a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Predicate:
    """Conjunction of linear constraints over the variable vector alpha.

    ``C @ alpha <= d`` plus per-variable bounds ``lo <= alpha <= hi``.
    Predicates only ever grow: extensions append variables and rows, so a
    newer predicate is a superset description of any predicate it was built
    from. That prefix structure is what lets stars living in an older space
    be embedded into a newer one by zero-padding their basis.
    """

    C: np.ndarray
    d: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", _as_readonly(self.C))
        object.__setattr__(self, "d", _as_readonly(self.d))
        object.__setattr__(self, "lo", _as_readonly(self.lo))
        object.__setattr__(self, "hi", _as_readonly(self.hi))
        if self.C.ndim != 2:
            raise DimensionMismatchError("constraint matrix must be 2-D")
        p, m = self.C.shape
        if self.d.shape != (p,):
            raise DimensionMismatchError(
                f"constraint rhs has length {self.d.shape}, expected ({p},)"
            )
        if self.lo.shape != (m,) or self.hi.shape != (m,):
            raise DimensionMismatchError(
                f"variable bounds must have length {m}"
            )

    @property
    def num_variables(self) -> int:
        return self.C.shape[1]

    @property
    def num_rows(self) -> int:
        return self.C.shape[0]

    # LP-ready views, cached because one predicate typically serves many
    # range queries (every star in a shared variable space points here).
    @cached_property
    def lp_matrix(self):
        return csc_matrix(self.C) if self.num_rows else None

    @cached_property
    def lp_bounds(self) -> np.ndarray:
        return np.column_stack([self.lo, self.hi])

    @cached_property
    def vars_in_rows(self) -> np.ndarray:
        if self.num_rows:
            return (self.C != 0).any(axis=0)
        return np.zeros(self.num_variables, dtype=bool)

    @staticmethod
    def trivial(m: int = 0) -> "Predicate":
        """Predicate with m unconstrained-by-rows variables and no rows."""
        return Predicate(
            C=np.zeros((0, m)), d=np.zeros(0),
            lo=np.full(m, -np.inf), hi=np.full(m, np.inf),
        )

    @staticmethod
    def box(lo: np.ndarray, hi: np.ndarray) -> "Predicate":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return Predicate(C=np.zeros((0, lo.size)), d=np.zeros(0), lo=lo, hi=hi)

    def extended(
        self,
        new_lo: np.ndarray,
        new_hi: np.ndarray,
        rows_old: np.ndarray | None = None,
        rows_new: np.ndarray | None = None,
        rows_rhs: np.ndarray | None = None,
    ) -> "Predicate":
        """Append fresh variables (with bounds) and optional coupling rows.

        ``rows_old``/``rows_new`` split each new row's coefficients between
        the existing variables and the fresh ones.
        """
        new_lo = np.asarray(new_lo, dtype=float)
        new_hi = np.asarray(new_hi, dtype=float)
        k = new_lo.size
        m = self.num_variables
        lo = np.concatenate([self.lo, new_lo])
        hi = np.concatenate([self.hi, new_hi])
        if rows_old is None:
            C = np.hstack([self.C, np.zeros((self.num_rows, k))])
            d = self.d
        else:
            rows_old = np.asarray(rows_old, dtype=float)
            rows_new = np.asarray(rows_new, dtype=float)
            rows_rhs = np.asarray(rows_rhs, dtype=float)
            q = rows_old.shape[0]
            if rows_old.shape != (q, m) or rows_new.shape != (q, k):
                raise DimensionMismatchError("extension rows have wrong shape")
            C = np.block([
                [self.C, np.zeros((self.num_rows, k))],
                [rows_old, rows_new],
            ])
            d = np.concatenate([self.d, rows_rhs])
        return Predicate(C=C, d=d, lo=lo, hi=hi)

    def extends(self, other: "Predicate") -> bool:
        """True if this predicate was grown from ``other`` by appending."""
        if self is other:
            return True
        if self.num_variables < other.num_variables:
            return False
        if self.num_rows < other.num_rows:
            return False
        m, p = other.num_variables, other.num_rows
        return (
            np.array_equal(self.lo[:m], other.lo)
            and np.array_equal(self.hi[:m], other.hi)
            and np.array_equal(self.d[:p], other.d)
            and np.array_equal(self.C[:p, :m], other.C)
            and not self.C[:p, m:].any()
        )

    def block_diagonal(self, other: "Predicate") -> "Predicate":
        """Conjunction over independent copies of both variable vectors."""
        ma, mb = self.num_variables, other.num_variables
        pa, pb = self.num_rows, other.num_rows
        C = np.zeros((pa + pb, ma + mb))
        C[:pa, :ma] = self.C
        C[pa:, ma:] = other.C
        return Predicate(
            C=C,
            d=np.concatenate([self.d, other.d]),
            lo=np.concatenate([self.lo, other.lo]),
            hi=np.concatenate([self.hi, other.hi]),
        )


@dataclass(frozen=True)
class Star:
    """A generalized star set: center, basis matrix, and predicate."""

    center: np.ndarray
    basis: np.ndarray
    pred: Predicate = field(default_factory=Predicate.trivial)

    def __post_init__(self):
        object.__setattr__(self, "center", _as_readonly(self.center))
        object.__setattr__(self, "basis", _as_readonly(self.basis))
        if self.center.ndim != 1 or self.basis.ndim != 2:
            raise DimensionMismatchError("center must be 1-D, basis 2-D")
        n = self.center.size
        if self.basis.shape[0] != n:
            raise DimensionMismatchError(
                f"basis has {self.basis.shape[0]} rows, center has {n} entries"
            )
        if self.basis.shape[1] != self.pred.num_variables:
            raise DimensionMismatchError(
                f"basis has {self.basis.shape[1]} columns, predicate has "
                f"{self.pred.num_variables} variables"
            )

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def num_variables(self) -> int:
        return self.pred.num_variables

    # Field names mirroring the star tuple <c, V, C, d, bounds>.
    @property
    def constraint_matrix(self) -> np.ndarray:
        return self.pred.C

    @property
    def constraint_rhs(self) -> np.ndarray:
        return self.pred.d

    @property
    def alpha_lower(self) -> np.ndarray:
        return self.pred.lo

    @property
    def alpha_upper(self) -> np.ndarray:
        return self.pred.hi

    def eval(self, alpha: np.ndarray) -> np.ndarray:
        """Concrete point(s) for given variable assignment(s).

        ``alpha`` may be (m,) or (m, k); the result follows suit.
        """
        alpha = np.asarray(alpha, dtype=float)
        if alpha.ndim == 1:
            return self.center + self.basis @ alpha
        return self.center[:, None] + self.basis @ alpha

    @staticmethod
    def point(x: np.ndarray, pred: Predicate | None = None) -> "Star":
        """Degenerate star holding exactly one point."""
        x = np.asarray(x, dtype=float)
        if pred is None:
            pred = Predicate.trivial(0)
        return Star(center=x, basis=np.zeros((x.size, pred.num_variables)),
                    pred=pred)


@dataclass(frozen=True)
class StarUnion:
    """Ordered union of stars of equal state dimension."""

    members: tuple[Star, ...]

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise EmptyStarError("a star union must have at least one member")
        n = members[0].dim
        if any(s.dim != n for s in members):
            raise DimensionMismatchError("union members differ in dimension")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class IntervalBox:
    """Axis-aligned box, the result carrier of range queries."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_readonly(self.lower))
        object.__setattr__(self, "upper", _as_readonly(self.upper))
        if self.lower.shape != self.upper.shape:
            raise DimensionMismatchError("box bounds differ in length")
        if np.any(self.lower > self.upper):
            raise DimensionMismatchError("box lower bound exceeds upper bound")

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


# ---------------------------------------------------------------------------
# LP plumbing


def _solve_lp(objective: np.ndarray, pred: Predicate):
    b = pred.d if pred.num_rows else None
    return linprog(objective, A_ub=pred.lp_matrix, b_ub=b,
                   bounds=pred.lp_bounds, method="highs",
                   options=_LP_OPTIONS)


def _feasible(pred: Predicate, extra_C: np.ndarray | None = None,
              extra_d: np.ndarray | None = None) -> bool:
    m = pred.num_variables
    if extra_C is None and m == 0:
        return not np.any(pred.d < 0)
    C = pred.C
    d = pred.d
    if extra_C is not None:
        C = np.vstack([C, extra_C]) if C.size else np.asarray(extra_C, float)
        d = np.concatenate([d, extra_d])
    if m == 0:
        return not np.any(d < 0)
    res = linprog(np.zeros(m), A_ub=C if C.size else None,
                  b_ub=d if C.size else None,
                  bounds=list(zip(pred.lo, pred.hi)),
                  method="highs", options=_LP_OPTIONS)
    return res.status == 0


# ---------------------------------------------------------------------------
# Constructors and closed operations


def star_from_box(lower: Sequence[float], upper: Sequence[float]) -> Star:
    """Star whose point set is exactly the axis-aligned box [lower, upper].

    Zero-width dimensions contribute no variable, so the variable count is
    the number of dimensions with positive width. The predicate is the unit
    box -1 <= alpha <= 1 with half-width basis columns.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or lower.ndim != 1:
        raise DimensionMismatchError("box bounds must be 1-D of equal length")
    if np.any(lower > upper):
        raise DimensionMismatchError("box lower bound exceeds upper bound")
    center = 0.5 * (lower + upper)
    half = 0.5 * (upper - lower)
    wide = np.flatnonzero(half > 0.0)
    m = wide.size
    basis = np.zeros((lower.size, m))
    basis[wide, np.arange(m)] = half[wide]
    pred = Predicate.box(np.full(m, -1.0), np.full(m, 1.0))
    return Star(center=center, basis=basis, pred=pred)


def affine_map(s: Star, W: np.ndarray, b: np.ndarray | float = 0.0) -> Star:
    """Exact image of the star under x -> W @ x + b."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[1] != s.dim:
        raise DimensionMismatchError(
            f"weight matrix needs {s.dim} columns, got {W.shape}"
        )
    b = np.broadcast_to(np.asarray(b, dtype=float), (W.shape[0],))
    return Star(center=W @ s.center + b, basis=W @ s.basis, pred=s.pred)


def minkowski_sum(a: Star, b: Star) -> Star:
    """Exact set sum {x + y : x in a, y in b} over independent variables."""
    if a.dim != b.dim:
        raise DimensionMismatchError("summands differ in state dimension")
    pred = a.pred.block_diagonal(b.pred)
    basis = np.hstack([a.basis, b.basis])
    return Star(center=a.center + b.center, basis=basis, pred=pred)


def shared_variable_sum(a: Star, b: Star) -> Star:
    """Sum of two affine images of one common variable space.

    Unlike the Minkowski sum this keeps correlation: the operands are added
    coefficient-wise over the shared alpha vector. Requires structurally
    identical predicates.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError("summands differ in state dimension")
    if not (a.pred is b.pred or a.pred.extends(b.pred) and b.pred.extends(a.pred)):
        raise PredicateMismatchError(
            "shared-variable sum requires identical predicates"
        )
    return Star(center=a.center + b.center, basis=a.basis + b.basis,
                pred=a.pred)


def embed_into(s: Star, pred: Predicate) -> Star:
    """Re-express a star in a predicate grown from its own.

    Appended variables get zero basis columns; the point set is unchanged
    because every extension row is satisfiable for any feasible prefix.
    """
    if s.pred is pred:
        return s
    if not pred.extends(s.pred):
        raise PredicateMismatchError(
            "target predicate is not an extension of the star's predicate"
        )
    extra = pred.num_variables - s.num_variables
    basis = np.hstack([s.basis, np.zeros((s.dim, extra))])
    return Star(center=s.center, basis=basis, pred=pred)


def hadamard_product(
    a: Star,
    b: Star,
    bounds_a: IntervalBox,
    bounds_b: IntervalBox,
    shared: bool | None = None,
) -> Star:
    """Sound star enclosure of the elementwise product {x * y}.

    Each output dimension gets one fresh variable constrained by the four
    McCormick cuts written over the operands' affine forms, using the given
    interval enclosures (obtain them via range_of). Dimensions where either
    operand is a fixed constant are emitted as exact scaled affine forms
    instead, with no fresh variable.

    ``shared`` selects the variable semantics: True means both operands are
    affine images of one common variable space, False means independent
    spaces (combined block-diagonally first). The default infers sharing
    from predicate object identity, since structural equality cannot tell
    two independent copies of the same box apart.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError("operands differ in state dimension")
    if bounds_a.lower.size != a.dim or bounds_b.lower.size != b.dim:
        raise DimensionMismatchError("enclosures differ in dimension")
    if shared is None:
        shared = a.pred is b.pred
    if shared and not (a.pred is b.pred or
                       (a.pred.extends(b.pred) and b.pred.extends(a.pred))):
        raise PredicateMismatchError(
            "shared-variable product requires identical predicates"
        )
    if not shared:
        pred = a.pred.block_diagonal(b.pred)
        ma = a.num_variables
        a = Star(a.center,
                 np.hstack([a.basis, np.zeros((a.dim, pred.num_variables - ma))]),
                 pred)
        b = Star(b.center,
                 np.hstack([np.zeros((b.dim, ma)), b.basis]),
                 pred)
    pred = a.pred
    n, m = a.dim, pred.num_variables
    bounds_a = guarded(bounds_a)
    bounds_b = guarded(bounds_b)

    a_const = ~a.basis.any(axis=1)
    b_const = ~b.basis.any(axis=1)
    fresh = np.flatnonzero(~(a_const | b_const))
    k = fresh.size

    center = np.zeros(n)
    basis = np.zeros((n, m + k))
    # Exact dimensions: one operand is the constant factor.
    for i in np.flatnonzero(a_const):
        center[i] = a.center[i] * b.center[i]
        basis[i, :m] = a.center[i] * b.basis[i]
    for i in np.flatnonzero(b_const & ~a_const):
        center[i] = b.center[i] * a.center[i]
        basis[i, :m] = b.center[i] * a.basis[i]

    if k == 0:
        return Star(center=center, basis=basis[:, :m], pred=pred)

    xl = bounds_a.lower[fresh]
    xu = bounds_a.upper[fresh]
    yl = bounds_b.lower[fresh]
    yu = bounds_b.upper[fresh]

    rows_old = np.zeros((4 * k, m))
    rows_new = np.zeros((4 * k, k))
    rhs = np.zeros(4 * k)
    for j, i in enumerate(fresh):
        ca, va = a.center[i], a.basis[i]
        cb, vb = b.center[i], b.basis[i]
        # Lower cuts  z >= p*y + q*x - p*q  with (p, q) in {(xl, yl), (xu, yu)};
        # upper cuts  z <= p*y + q*x - p*q  with (p, q) in {(xu, yl), (xl, yu)}.
        for r, (p, q, sign) in enumerate([
            (xl[j], yl[j], -1.0),
            (xu[j], yu[j], -1.0),
            (xu[j], yl[j], +1.0),
            (xl[j], yu[j], +1.0),
        ]):
            row = 4 * j + r
            rows_old[row] = sign * -(p * vb + q * va)
            rows_new[row, j] = sign
            rhs[row] = sign * (p * cb + q * ca - p * q)
        basis[i, m + j] = 1.0

    corners = np.stack([xl * yl, xl * yu, xu * yl, xu * yu])
    new_pred = pred.extended(
        new_lo=corners.min(axis=0), new_hi=corners.max(axis=0),
        rows_old=rows_old, rows_new=rows_new, rows_rhs=rhs,
    )
    return Star(center=center, basis=basis, pred=new_pred)


def range_of(s: Star, dims: Iterable[int] | None = None) -> IntervalBox:
    """Tight lower/upper bounds of the star per requested dimension.

    Each bound is an LP over the predicate polytope, except for the exact
    shortcuts: constant dimensions, and dimensions whose variables occur in
    no general constraint row (pure interval arithmetic on the bounds).
    """
    idx = np.arange(s.dim) if dims is None else np.asarray(list(dims), int)
    lo_out = np.empty(idx.size)
    hi_out = np.empty(idx.size)
    in_rows = s.pred.vars_in_rows
    for pos, i in enumerate(idx):
        row = s.basis[i]
        nz = np.flatnonzero(row)
        if nz.size == 0:
            lo_out[pos] = hi_out[pos] = s.center[i]
            continue
        lo_b = s.pred.lo[nz]
        hi_b = s.pred.hi[nz]
        if not in_rows[nz].any() and np.isfinite(lo_b).all() \
                and np.isfinite(hi_b).all():
            contrib = np.stack([row[nz] * lo_b, row[nz] * hi_b])
            lo_out[pos] = s.center[i] + contrib.min(axis=0).sum()
            hi_out[pos] = s.center[i] + contrib.max(axis=0).sum()
            continue
        res_lo = _solve_lp(row, s.pred)
        res_hi = _solve_lp(-row, s.pred)
        for res in (res_lo, res_hi):
            if res.status == 2:
                raise EmptyStarError("range query on an empty star")
            if res.status == 3:
                raise UnboundedStarError(
                    f"dimension {i} is unbounded; predicate is malformed"
                )
            if res.status != 0:
                raise UnboundedStarError(f"LP failed with status {res.status}")
        vals = (s.center[i] + res_lo.fun, s.center[i] - res_hi.fun)
        lo_out[pos] = min(vals)
        hi_out[pos] = max(vals)
    return IntervalBox(lower=lo_out, upper=hi_out)


def is_empty(s: Star) -> bool:
    """LP feasibility check of the predicate polytope."""
    return not _feasible(s.pred)


def contains_point(s: Star | StarUnion, x: Sequence[float],
                   tol: float = 1e-6) -> bool:
    """Membership test: does some feasible alpha map to x within tol (inf-norm)?"""
    if isinstance(s, StarUnion):
        return any(contains_point(member, x, tol) for member in s.members)
    x = np.asarray(x, dtype=float)
    if x.shape != (s.dim,):
        raise DimensionMismatchError("point dimension mismatch")
    gap = x - s.center
    if s.num_variables == 0:
        return bool(np.max(np.abs(gap), initial=0.0) <= tol) and \
            not np.any(s.pred.d < 0)
    extra_C = np.vstack([s.basis, -s.basis])
    extra_d = np.concatenate([gap + tol, -gap + tol])
    return _feasible(s.pred, extra_C, extra_d)
