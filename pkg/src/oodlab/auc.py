"""AUC with half-credit ties, exact suprema over ranking spaces, Bayes ranker."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .domain import FiniteDomain, TOL
from .errors import EmptySpaceError, ShapeError


@dataclass(frozen=True)
class RankingFunction:
    """Score per point of X; higher means more ID-like."""

    scores: tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(v) for v in self.scores)
        if not s or not all(np.isfinite(s)):
            raise ShapeError("ranking scores must be non-empty and finite")
        object.__setattr__(self, "scores", s)

    def __neg__(self):
        return RankingFunction(tuple(-v for v in self.scores))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores)


class RankingSpace:
    """Finite, duplicate-free collection of rankers stored as an ``(n, m)`` array."""

    def __init__(self, scores, provenance: str = "explicit"):
        arr = np.array(scores, dtype=float)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise EmptySpaceError("ranking space must be a non-empty (n, m) array")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("ranking scores must be finite")
        _, first = np.unique(arr, axis=0, return_index=True)
        arr = arr[np.sort(first)]
        arr.setflags(write=False)
        self.scores = arr
        self.provenance = provenance

    @classmethod
    def from_rankers(cls, rankers: Iterable[RankingFunction], provenance: str = "explicit"):
        rows = [r.scores for r in rankers]
        if not rows:
            raise EmptySpaceError("ranking space must be non-empty")
        return cls(rows, provenance)

    def __len__(self):
        return self.scores.shape[0]

    @property
    def m(self) -> int:
        return self.scores.shape[1]

    def __getitem__(self, i) -> RankingFunction:
        return RankingFunction(tuple(self.scores[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def union(self, other: "RankingSpace") -> "RankingSpace":
        return RankingSpace(np.vstack([self.scores, other.scores]), self.provenance)


def _as_space(space) -> np.ndarray:
    if isinstance(space, RankingSpace):
        return space.scores
    if isinstance(space, RankingFunction):
        return np.asarray([space.scores])
    rows = [r.scores if isinstance(r, RankingFunction) else r for r in space]
    if not rows:
        raise EmptySpaceError("ranking space must be non-empty")
    return np.asarray(rows, dtype=float)


def _pair_credit(S: np.ndarray) -> np.ndarray:
    """``(n, m, m)`` array with 1 where s_i > s_j, 1/2 on ties, 0 otherwise."""
    a = S[:, :, None]
    b = S[:, None, :]
    return (a > b).astype(float) + 0.5 * (a == b)


def auc_matrix(S, p_in, p_out) -> np.ndarray:
    """AUC of every row of ``S`` for ID marginal ``p_in`` and OOD marginal ``p_out``."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    W = np.outer(p_in, p_out)
    if S.shape[1] != W.shape[0]:
        raise ShapeError("ranker length does not match the feature space")
    return (_pair_credit(S) * W[None]).sum(axis=(1, 2))


def auc(r: RankingFunction, domain: FiniteDomain) -> float:
    return float(auc_matrix([r.scores], domain.id_marginal, domain.ood_marginal)[0])


def sup_auc(space, domain: FiniteDomain) -> tuple[float, list[int]]:
    """Exact maximum AUC over a finite space and every index attaining it."""
    vals = auc_matrix(_as_space(space), domain.id_marginal, domain.ood_marginal)
    best = float(vals.max())
    return best, [int(i) for i in np.flatnonzero(vals >= best - TOL)]


def bayes_sup_auc_from(p_in, p_out) -> float:
    p_in = np.asarray(p_in, dtype=float)
    p_out = np.asarray(p_out, dtype=float)
    a = np.outer(p_in, p_out)
    return float(0.5 * np.maximum(a, a.T).sum())


def bayes_sup_auc(domain: FiniteDomain) -> float:
    """Closed-form supremum of the AUC over all rankers on X."""
    return bayes_sup_auc_from(domain.id_marginal, domain.ood_marginal)


def _sigmoid(t):
    return 1.0 / (1.0 + np.exp(-t))


def bayes_ranker(domain: FiniteDomain) -> RankingFunction:
    """Sigmoid of the ID/OOD density ratio.

    Points with OOD mass only score 0 and points with ID mass only score 1.
    Points outside both supports get sigmoid(0); they never affect the AUC.
    """
    gi = domain.id_marginal
    go = domain.ood_marginal
    out = np.full(gi.shape, 0.5)
    both = (gi > 0) & (go > 0)
    out[both] = _sigmoid(gi[both] / go[both])
    out[(gi > 0) & (go == 0)] = 1.0
    out[(gi == 0) & (go > 0)] = 0.0
    return RankingFunction(tuple(out))


def auc_equivalent(r1: RankingFunction, r2: RankingFunction, domain: FiniteDomain) -> bool:
    a, b = r1.as_array(), r2.as_array()
    W = np.outer(domain.id_marginal, domain.ood_marginal) > 0
    s1 = np.sign(a[:, None] - a[None, :])
    s2 = np.sign(b[:, None] - b[None, :])
    return bool(np.all(s1[W] == s2[W]))


def weak_orderings(m: int) -> list[tuple[int, ...]]:
    """Every weak ordering of ``m`` items as dense rank vectors (0 = lowest)."""
    out = []
    for ranks in itertools.product(range(m), repeat=m):
        k = max(ranks) + 1
        if len(set(ranks)) == k:
            out.append(ranks)
    return out


def order_type_space(m: int) -> RankingSpace:
    """One representative ranker per order type on ``m`` points."""
    if m < 1:
        raise ShapeError("need at least one point")
    return RankingSpace(weak_orderings(m), provenance="order-types")


def linear_rankers_1d(coords: Sequence[float]) -> RankingSpace:
    """Affine rankers ``w * x + c`` on the line, one per order type: up, down, flat."""
    x = np.asarray(coords, dtype=float).ravel()
    return RankingSpace([x, -x, np.zeros_like(x)], provenance="linear-1d")
