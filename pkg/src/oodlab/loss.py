"""Loss tables, partial risks, alpha-risks and exact infima over finite spaces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import FiniteDomain, TOL
from .errors import DomainParameterError, EmptySpaceError, EvaluationError, SpaceSizeError
from .spaces import ENUM_CAP, Hypothesis, HypothesisSpace


@dataclass(frozen=True, eq=False)
class LossTable:
    """``values[y_pred - 1, y_true - 1]`` over labels ``1..K+1``."""

    values: np.ndarray
    B: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise DomainParameterError("loss table must be square with at least 2 labels")
        if not np.all(np.isfinite(v)):
            raise DomainParameterError("loss entries must be finite")
        off = ~np.eye(v.shape[0], dtype=bool)
        if np.any(np.diag(v) != 0) or np.any(v[off] <= 0):
            raise DomainParameterError("loss needs a zero diagonal and positive off-diagonal entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "B", float(v.max()))

    @classmethod
    def zero_one(cls, K: int) -> "LossTable":
        return cls(1.0 - np.eye(K + 1))

    @property
    def K(self) -> int:
        return self.values.shape[0] - 1

    def __call__(self, y_pred: int, y_true: int) -> float:
        return float(self.values[y_pred - 1, y_true - 1])

    def scaled(self, c: float) -> "LossTable":
        return LossTable(self.values * c)

    def __eq__(self, other):
        return isinstance(other, LossTable) and np.array_equal(self.values, other.values)

    __hash__ = None


def _labels(h, domain: FiniteDomain, loss: LossTable) -> np.ndarray:
    lab = np.asarray(h.labels if isinstance(h, Hypothesis) else h, dtype=np.int64)
    if lab.shape[-1] != domain.X.size:
        raise EvaluationError("hypothesis is not defined on every point of X")
    if lab.min() < 1 or lab.max() > domain.K + 1 or loss.K != domain.K:
        raise EvaluationError("hypothesis or loss labels do not match the domain's K")
    return lab


def risks_from_masses(labels, id_mass, ood_mass, loss: LossTable) -> tuple[np.ndarray, np.ndarray]:
    """``(R_in, R_out)`` for an ``(n, m)`` label array against raw mass tables.

    ``id_mass`` is ``(m, K)``; ``ood_mass`` is ``(m,)``.
    """
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    K = loss.K
    # cost[n, i, y] = loss of predicting labels[n, i] when the truth is y
    cost = loss.values[labels - 1]
    r_in = np.einsum("nik,ik->n", cost[:, :, :K], np.asarray(id_mass))
    r_out = cost[:, :, K] @ np.asarray(ood_mass)
    return r_in, r_out


def partial_risks(labels: np.ndarray, domain: FiniteDomain, loss: LossTable) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``(R_in, R_out)`` for an ``(n, m)`` label array."""
    return risks_from_masses(labels, domain.id_part.mass, domain.ood_marginal, loss)


def risk_in(h, domain: FiniteDomain, loss: LossTable) -> float:
    return float(partial_risks(_labels(h, domain, loss), domain, loss)[0][0])


def risk_out(h, domain: FiniteDomain, loss: LossTable) -> float:
    return float(partial_risks(_labels(h, domain, loss), domain, loss)[1][0])


def _check_alpha(alpha: float):
    if not 0.0 <= alpha <= 1.0:
        raise DomainParameterError(f"alpha must lie in [0, 1], got {alpha}")


def alpha_risk(h, domain: FiniteDomain, loss: LossTable, alpha: float) -> float:
    _check_alpha(alpha)
    r_in, r_out = partial_risks(_labels(h, domain, loss), domain, loss)
    return float((1.0 - alpha) * r_in[0] + alpha * r_out[0])


def risk(h, domain: FiniteDomain, loss: LossTable) -> float:
    return alpha_risk(h, domain, loss, domain.pi_out)


def _space_labels(space: HypothesisSpace, domain: FiniteDomain, loss: LossTable) -> np.ndarray:
    if len(space) == 0:
        raise EmptySpaceError("hypothesis space is empty")
    if len(space) > ENUM_CAP:
        raise SpaceSizeError("hypothesis space exceeds the enumeration cap")
    return _labels(space.members, domain, loss)


def space_risks(space: HypothesisSpace, domain: FiniteDomain, loss: LossTable) -> tuple[np.ndarray, np.ndarray]:
    return partial_risks(_space_labels(space, domain, loss), domain, loss)


def argmin_set(values: np.ndarray) -> tuple[float, list[int]]:
    best = float(values.min())
    return best, [int(i) for i in np.flatnonzero(values <= best + TOL)]


def inf_alpha_risk(space: HypothesisSpace, domain: FiniteDomain, loss: LossTable, alpha: float) -> tuple[float, list[int]]:
    """Exact minimum alpha-risk and every minimiser; the first index is canonical."""
    _check_alpha(alpha)
    r_in, r_out = space_risks(space, domain, loss)
    return argmin_set((1.0 - alpha) * r_in + alpha * r_out)


def check_loss_dominance(loss: LossTable, K: int | None = None) -> bool:
    """Misclassifying among ID labels never costs more than rejecting."""
    K = loss.K if K is None else K
    v = loss.values
    for y1 in range(K):
        for y2 in range(K):
            if y1 != y2 and v[y2, y1] > v[K, y1]:
                return False
    return True
