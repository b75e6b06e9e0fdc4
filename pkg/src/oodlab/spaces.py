"""Materialized hypothesis spaces, projections and brute-force capacity measures.

Labels run over ``1..K+1``; ``K+1`` is the reject (OOD) label. Binary spaces
use ``1`` for ID and ``2`` for OOD.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .auc import RankingSpace
from .errors import EmptySpaceError, LabelRangeError, SpaceSizeError

ENUM_CAP = 10**7
PROVENANCES = ("explicit", "exhaustive", "fcnn-induced", "score-induced", "composed")


@dataclass(frozen=True)
class Hypothesis:
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))

    def __call__(self, i: int) -> int:
        return self.labels[i]

    def __len__(self):
        return len(self.labels)

    @classmethod
    def constant(cls, m: int, label: int) -> "Hypothesis":
        return cls((label,) * m)


def _dedup(arr: np.ndarray) -> np.ndarray:
    _, first = np.unique(arr, axis=0, return_index=True)
    return arr[np.sort(first)]


class HypothesisSpace:
    """Duplicate-free set of total labelings of X, stored as an ``(n, m)`` int array.

    ``factors`` holds the ``(H_in, H_b)`` pair when the space came from
    :func:`bullet_compose`.
    """

    def __init__(self, members, K: int, provenance: str = "explicit", factors=None):
        arr = np.array(members, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise EmptySpaceError("hypothesis space must be a non-empty (n, m) label array")
        if K < 1:
            raise LabelRangeError("K must be >= 1")
        if arr.min() < 1 or arr.max() > K + 1:
            raise LabelRangeError(f"labels must lie in 1..{K + 1}")
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        arr = _dedup(arr)
        arr.setflags(write=False)
        self.members = arr
        self.K = int(K)
        self.provenance = provenance
        self.factors = factors

    @classmethod
    def from_hypotheses(cls, hs: Iterable[Hypothesis], K: int, provenance: str = "explicit"):
        rows = [h.labels for h in hs]
        if not rows:
            raise EmptySpaceError("hypothesis space must be non-empty")
        return cls(rows, K, provenance)

    def __len__(self):
        return self.members.shape[0]

    @property
    def m(self) -> int:
        return self.members.shape[1]

    @property
    def is_binary(self) -> bool:
        return self.K == 1

    def __getitem__(self, i) -> Hypothesis:
        return Hypothesis(tuple(self.members[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def index(self, h: Hypothesis) -> int:
        hits = np.flatnonzero((self.members == np.asarray(h.labels)).all(axis=1))
        if hits.size == 0:
            raise KeyError("hypothesis not in space")
        return int(hits[0])

    def __contains__(self, h) -> bool:
        return bool((self.members == np.asarray(h.labels)).all(axis=1).any())

    def union(self, other: "HypothesisSpace") -> "HypothesisSpace":
        if other.K != self.K:
            raise LabelRangeError("cannot merge spaces with different K")
        return HypothesisSpace(np.vstack([self.members, other.members]), self.K, self.provenance)


def phi_labels(labels, K: int) -> np.ndarray:
    labels = np.asarray(labels)
    return np.where(labels <= K, 1, 2)


def phi_project(space: HypothesisSpace) -> HypothesisSpace:
    """Collapse every ID label to 1 and the reject label to 2."""
    return HypothesisSpace(phi_labels(space.members, space.K), 1, space.provenance)


def bullet_compose(h_in_space: HypothesisSpace, h_b_space: HypothesisSpace, K: int | None = None) -> HypothesisSpace:
    """All ``h_in`` labels where ``h_b`` accepts (label 1), ``K+1`` elsewhere."""
    A = h_in_space.members
    B = h_b_space.members
    K = h_in_space.K if K is None else K
    if A.max() > K:
        raise LabelRangeError("ID factor must only use labels 1..K")
    if h_b_space.K != 1:
        raise LabelRangeError("binary factor must use labels {1, 2}")
    if A.shape[1] != B.shape[1]:
        raise LabelRangeError("factors are defined on different feature spaces")
    n = A.shape[0] * B.shape[0]
    if n > ENUM_CAP:
        raise SpaceSizeError(f"composed space would have {n} members")
    comp = np.where(B[None, :, :] == 1, A[:, None, :], K + 1).reshape(n, A.shape[1])
    return HypothesisSpace(comp, K, "composed", factors=(h_in_space, h_b_space))


def exhaustive_space(X, K: int) -> HypothesisSpace:
    """All ``(K+1)^|X|`` labelings, lexicographic with the first point most significant.

    ``X`` may be a feature space or just its size.
    """
    m = int(X) if isinstance(X, (int, np.integer)) else len(X)
    L = K + 1
    if m < 1:
        raise EmptySpaceError("need at least one point")
    if L**m > ENUM_CAP:
        raise SpaceSizeError(f"{L}^{m} hypotheses exceeds the cap of {ENUM_CAP}")
    idx = np.arange(L**m, dtype=np.int64)[:, None]
    powers = L ** np.arange(m - 1, -1, -1, dtype=np.int64)[None, :]
    return HypothesisSpace((idx // powers) % L + 1, K, "exhaustive")


def all_binary(m: int) -> HypothesisSpace:
    return exhaustive_space(m, 1)


def _patterns(members: np.ndarray, cols: Sequence[int]) -> np.ndarray:
    return np.unique(members[:, list(cols)], axis=0)


def vc_dimension(space: HypothesisSpace) -> int:
    if not space.is_binary:
        raise LabelRangeError("VC dimension needs a binary space")
    if space.m > 24:
        raise SpaceSizeError("VC search is limited to |X| <= 24")
    return _shatter_dim(space, _vc_shattered)


def _vc_shattered(P: np.ndarray, k: int) -> bool:
    return P.shape[0] == 2**k


def _natarajan_shattered(P: np.ndarray, k: int) -> bool:
    # choose an unordered label pair per coordinate; need all 2^k mixes present
    if P.shape[0] < 2**k:
        return False

    def rec(j: int, rows: np.ndarray) -> bool:
        if rows.shape[0] < 2**k:
            return False
        if j == k:
            return np.unique(rows, axis=0).shape[0] == 2**k
        vals = np.unique(rows[:, j])
        for a, b in itertools.combinations(vals, 2):
            sub = rows[(rows[:, j] == a) | (rows[:, j] == b)]
            if rec(j + 1, sub):
                return True
        return False

    return rec(0, P)


def _shatter_dim(space: HypothesisSpace, shattered) -> int:
    m, n = space.m, len(space)
    best = 0
    # shattering is hereditary, so stop at the first size with no shattered set
    for k in range(1, m + 1):
        if 2**k > n:
            break
        if not any(shattered(_patterns(space.members, c), k) for c in itertools.combinations(range(m), k)):
            break
        best = k
    return best


def natarajan_dimension(space: HypothesisSpace) -> int:
    if space.m > 16:
        raise SpaceSizeError("Natarajan search is limited to |X| <= 16")
    return _shatter_dim(space, _natarajan_shattered)


def sauer_bound(v: int, m: int) -> int:
    if v < 0 or m < 0:
        raise ValueError("v and m must be nonnegative")
    return sum(comb(m + 1, i) for i in range(v + 1))


def check_separate_assumption(space: HypothesisSpace) -> bool:
    """Every point is rejected by at least one member."""
    return bool((space.members == space.K + 1).any(axis=0).all())


def check_separate_ranking(space: RankingSpace) -> bool:
    """Every point is the strict unique minimum of some ranker."""
    S = space.scores
    m = S.shape[1]
    for i in range(m):
        others = np.delete(S, i, axis=1)
        if m > 1 and not np.any((S[:, [i]] < others).all(axis=1)):
            return False
    return True


def check_constant_closure(space: RankingSpace, pool: Iterable[float]) -> bool:
    """Every value in ``pool`` appears as a constant member of the space."""
    S = space.scores
    const = S[(S == S[:, :1]).all(axis=1), 0]
    have = set(float(c) for c in const)
    return all(float(c) in have for c in pool)


def threshold_space(coords: Sequence[float]) -> HypothesisSpace:
    """Binary family ``x -> 1 if x >= t else 2`` on the line, every cut included."""
    x = np.asarray(coords, dtype=float).ravel()
    cuts = np.concatenate([[-np.inf], np.sort(x), [np.inf]])
    rows = [np.where(x >= t, 1, 2) for t in cuts]
    return HypothesisSpace(rows, 1, "explicit")
