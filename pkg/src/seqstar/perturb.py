"""Adversarial perturbation sets for sequence inputs.

The four supported supports are single/multi feature crossed with single/all
time instances (SFSI, SFAI, MFSI, MFAI). Every perturbed cell (f, t) moves
independently within [-delta_f, +delta_f], where delta_f is a percentage of
the absolute per-feature mean over the sequence's own time steps. Cells off
the support stay exact constants, so the star is an l-infinity ball
restricted to the support.

Perturbation intervals are symmetric around the original value: a deviation
budget cuts both ways, and the symmetric set is the stricter robustness
test. Cells whose delta is zero (zero-mean features) contribute no variable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ModelFormatError
from .layers import SequenceStar
from .network import SequenceTensor
from .stars import Predicate, Star

KINDS = ("SFSI", "SFAI", "MFSI", "MFAI")


@dataclass(frozen=True)
class PerturbationSpec:
    """Which cells to perturb and by how much.

    ``target_feature`` applies to SFSI/SFAI, ``target_instance`` to
    SFSI/MFSI; both default to index 0 when left unset.
    """

    kind: str
    epsilon_percent: float
    target_feature: int | None = None
    target_instance: int | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ModelFormatError(
                f"unknown perturbation kind {self.kind!r}; expected one of {KINDS}"
            )
        if not 0.0 < self.epsilon_percent <= 100.0:
            raise ModelFormatError(
                f"epsilon_percent must lie in (0, 100], got {self.epsilon_percent}"
            )

    @property
    def feature(self) -> int:
        return 0 if self.target_feature is None else self.target_feature

    @property
    def instance(self) -> int:
        return 0 if self.target_instance is None else self.target_instance

    def support(self, n_f: int, t_s: int) -> list[tuple[int, int]]:
        """Perturbed (feature, instance) cells in row-major order."""
        if self.kind in ("SFSI", "SFAI") and not 0 <= self.feature < n_f:
            raise DimensionMismatchError(
                f"target feature {self.feature} outside [0, {n_f})"
            )
        if self.kind in ("SFSI", "MFSI") and not 0 <= self.instance < t_s:
            raise DimensionMismatchError(
                f"target instance {self.instance} outside [0, {t_s})"
            )
        if self.kind == "SFSI":
            return [(self.feature, self.instance)]
        if self.kind == "SFAI":
            return [(self.feature, t) for t in range(t_s)]
        if self.kind == "MFSI":
            return [(f, self.instance) for f in range(n_f)]
        return [(f, t) for f in range(n_f) for t in range(t_s)]


def delta_for(seq: SequenceTensor, spec: PerturbationSpec, feature: int) -> float:
    """Perturbation radius for one feature row.

    epsilon percent of the absolute mean of that feature over the sequence's
    time steps; zero-mean rows get radius zero.
    """
    if not 0 <= feature < seq.n_features:
        raise DimensionMismatchError(
            f"feature {feature} outside [0, {seq.n_features})"
        )
    mean = float(np.mean(seq.values[feature]))
    return (spec.epsilon_percent / 100.0) * abs(mean)


def build_star(seq: SequenceTensor, spec: PerturbationSpec) -> SequenceStar:
    """Sequence star centered at the sample with one variable per perturbed cell."""
    n_f, t_s = seq.n_features, seq.t_s
    cells = [(f, t) for f, t in spec.support(n_f, t_s)
             if delta_for(seq, spec, f) > 0.0]
    deltas = np.array([delta_for(seq, spec, f) for f, _ in cells])
    m = len(cells)
    pred = Predicate.box(-deltas, deltas)
    col_of = {cell: j for j, cell in enumerate(cells)}
    steps = []
    for t in range(t_s):
        basis = np.zeros((n_f, m))
        for f in range(n_f):
            j = col_of.get((f, t))
            if j is not None:
                basis[f, j] = 1.0
        steps.append(Star(seq.values[:, t].copy(), basis, pred))
    return SequenceStar(steps=tuple(steps))


def sample_inputs(seq: SequenceTensor, spec: PerturbationSpec, count: int,
                  rng: np.random.Generator,
                  corners: bool = False) -> np.ndarray:
    """Concrete perturbed sequences drawn from the perturbation box.

    Uniform over the box by default; ``corners`` draws random sign
    combinations at full radius instead. Returns (count, n_f, t_s).
    """
    n_f, t_s = seq.n_features, seq.t_s
    out = np.broadcast_to(seq.values, (count, n_f, t_s)).copy()
    for f, t in spec.support(n_f, t_s):
        delta = delta_for(seq, spec, f)
        if delta == 0.0:
            continue
        if corners:
            offs = delta * rng.choice([-1.0, 1.0], size=count)
        else:
            offs = delta * (2.0 * rng.random(count) - 1.0)
        out[:, f, t] += offs
    return out
