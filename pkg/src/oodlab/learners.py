"""Constructive learners: nearest-neighbour rejector, ERM, composition,
constrained ERM for risk and AUC, and MMD-based dispatch."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .auc import RankingFunction, RankingSpace
from .domain import FeatureSpace, FiniteDomain
from .errors import EmptySpaceError, LabelRangeError, RealizabilityError
from .loss import LossTable
from .spaces import Hypothesis, HypothesisSpace


@dataclass(frozen=True)
class TrainingSet:
    """Labelled ID sample; ``samples`` holds ``(point index, label)`` pairs."""

    samples: tuple[tuple[int, int], ...]
    K: int = 1

    def __post_init__(self):
        s = tuple((int(i), int(y)) for i, y in self.samples)
        if any(not 1 <= y <= self.K for _, y in s):
            raise LabelRangeError(f"training labels must lie in 1..{self.K}")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return len(self.samples)

    @property
    def points(self) -> np.ndarray:
        return np.array([i for i, _ in self.samples], dtype=np.int64)

    @property
    def labels(self) -> np.ndarray:
        return np.array([y for _, y in self.samples], dtype=np.int64)

    def phi(self) -> "TrainingSet":
        """Same points, every label collapsed to the ID label 1."""
        return TrainingSet(tuple((i, 1) for i, _ in self.samples), 1)


@dataclass
class LearnerOutput:
    hypothesis: Hypothesis | None = None
    ranker: RankingFunction | None = None
    tau: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"diagnostics": self.diagnostics}
        if self.hypothesis is not None:
            out["hypothesis"] = list(self.hypothesis.labels)
        if self.ranker is not None:
            out["ranker"] = list(self.ranker.scores)
            out["tau"] = self.tau
        return out


def _need_samples(S: TrainingSet):
    if len(S) == 0:
        raise ValueError("training set is empty")


def nn_threshold_learner(S: TrainingSet, X: FeatureSpace) -> Hypothesis:
    """Accept points closer than half the minimum spacing to some training point."""
    _need_samples(S)
    dist = X.distances[:, np.unique(S.points)].min(axis=1)
    return Hypothesis(tuple(np.where(dist < 0.5 * X.d0, 1, 2)))


def nn_rate_bound(d: int, n: int) -> float:
    if d < 1 or n < 1:
        raise ValueError("d and n must be >= 1")
    root = n ** (1.0 / (d + 1))
    return 2 * math.sqrt(d) / root + math.sqrt(d) / (2**d * math.e * root)


def empirical_id_risks(S: TrainingSet, members: np.ndarray, loss: LossTable) -> np.ndarray:
    pred = members[:, S.points]
    return loss.values[pred - 1, S.labels - 1].mean(axis=1)


def erm_id(S: TrainingSet, space: HypothesisSpace, loss: LossTable) -> Hypothesis:
    """Empirical ID risk minimiser, lowest index on ties."""
    _need_samples(S)
    if len(space) == 0:
        raise EmptySpaceError("hypothesis space is empty")
    return space[int(np.argmin(empirical_id_risks(S, space.members, loss)))]


def composite_constant(loss: LossTable) -> float:
    """Largest loss over the smaller of the two binary confusion costs."""
    return loss.B / min(loss(1, 2), loss(2, 1))


def composite_learner(S: TrainingSet, a_in: Callable, a_b: Callable, K: int | None = None, loss: LossTable | None = None) -> LearnerOutput:
    """Use ``a_in``'s label where ``a_b`` (trained on the collapsed sample) accepts, reject elsewhere."""
    K = S.K if K is None else K
    h_in = a_in(S)
    h_b = a_b(S.phi())
    h_in = h_in.hypothesis if isinstance(h_in, LearnerOutput) else h_in
    h_b = h_b.hypothesis if isinstance(h_b, LearnerOutput) else h_b
    lin, lb = np.asarray(h_in.labels), np.asarray(h_b.labels)
    if lin.max() > K or lb.max() > 2:
        raise LabelRangeError("ID learner must output 1..K and the binary learner 1..2")
    h = Hypothesis(tuple(np.where(lb == 1, lin, K + 1)))
    diag = {"accepted": int((lb == 1).sum())}
    if loss is not None:
        diag["c"] = composite_constant(loss)
    return LearnerOutput(hypothesis=h, diagnostics=diag)


def phi_risk_in(h_b: Hypothesis, domain: FiniteDomain, loss: LossTable) -> float:
    """ID risk of a binary rejector under the binary part of ``loss``."""
    rejected = np.asarray(h_b.labels) == 2
    return loss(2, 1) * float(domain.id_marginal[rejected].sum())


def constrained_reject_learner(S: TrainingSet, aux_points: Sequence[int], space: HypothesisSpace, loss: LossTable) -> Hypothesis:
    """Among members with zero empirical ID risk, reject as many aux points as possible."""
    _need_samples(S)
    M = space.members
    ok = np.flatnonzero(empirical_id_risks(S, M, loss) == 0.0)
    if ok.size == 0:
        raise RealizabilityError("no member has zero empirical ID risk")
    aux = np.asarray(list(aux_points), dtype=np.int64)
    if aux.size == 0:
        return space[int(ok[0])]
    K = space.K
    obj = loss.values[M[np.ix_(ok, aux)] - 1, K].mean(axis=1)
    return space[int(ok[np.argmin(obj)])]


def threshold_pairs(space: RankingSpace) -> list[tuple[RankingFunction, float]]:
    """Every ranker paired with each of its distinct score values as threshold."""
    out = []
    for row in space.scores:
        r = RankingFunction(tuple(row))
        for t in np.unique(row):
            out.append((r, float(t)))
    return out


def constrained_auc_learner(S: TrainingSet, aux_points: Sequence[int], pairs: Sequence[tuple[RankingFunction, float]]) -> tuple[RankingFunction, float]:
    """Among pairs keeping every training point above the threshold, push most aux points to or below it."""
    _need_samples(S)
    pts = np.unique(S.points)
    aux = np.asarray(list(aux_points), dtype=np.int64)
    best, best_count = None, -1
    for r, tau in pairs:
        s = r.as_array()
        if np.any(s[pts] <= tau):
            continue
        count = int((s[aux] <= tau).sum()) if aux.size else 0
        if count > best_count:
            best, best_count = (r, tau), count
    if best is None:
        raise RealizabilityError("no ranker/threshold pair keeps every training point above its threshold")
    return best


def embed_samples(samples, X: FeatureSpace, K: int) -> np.ndarray:
    """Rows of point coordinates followed by a one-hot label over ``1..K+1``."""
    samples = list(samples)
    idx = np.array([i for i, _ in samples], dtype=np.int64)
    lab = np.array([y for _, y in samples], dtype=np.int64)
    return np.hstack([X.coords[idx], np.eye(K + 1)[lab - 1]])


def median_bandwidth(features: np.ndarray) -> float:
    diff = features[:, None, :] - features[None, :, :]
    d = np.sqrt((diff**2).sum(-1))[np.triu_indices(features.shape[0], 1)]
    if d.size == 0:
        return 1.0
    med = float(np.median(d))
    if med > 0:
        return med
    pos = d[d > 0]
    return float(np.median(pos)) if pos.size else 1.0


def _empirical(samples, atoms: dict) -> np.ndarray:
    w = np.zeros(len(atoms))
    for s in samples:
        w[atoms[s]] += 1.0
    return w / w.sum()


def mmd_squared(sample_a, sample_b, X: FeatureSpace, K: int, bandwidth: float | None = None) -> float:
    """Biased (V-statistic) squared MMD between two empirical measures over (point, label)."""
    a = [tuple(map(int, s)) for s in sample_a]
    b = [tuple(map(int, s)) for s in sample_b]
    if not a or not b:
        raise ValueError("samples must be non-empty")
    if bandwidth is None:
        bandwidth = median_bandwidth(embed_samples(a + b, X, K))
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    keys = sorted(set(a) | set(b))
    atoms = {k: j for j, k in enumerate(keys)}
    F = embed_samples(keys, X, K)
    sq = ((F[:, None, :] - F[None, :, :]) ** 2).sum(-1)
    G = np.exp(-sq / (2.0 * bandwidth**2))
    w = _empirical(a, atoms) - _empirical(b, atoms)
    return float(w @ G @ w)


def mmd(sample_a, sample_b, X: FeatureSpace, K: int, bandwidth: float | None = None) -> float:
    return math.sqrt(max(0.0, mmd_squared(sample_a, sample_b, X, K, bandwidth)))


def mmd_dispatch_learner(S: TrainingSet, references: Sequence[tuple], X: FeatureSpace, bandwidth: float | None = None) -> LearnerOutput:
    """Run the learner attached to the reference sample nearest to ``S`` in MMD.

    ``references`` holds ``(reference sample, learner)`` pairs; ties go to the
    lowest index. Diagnostics include every distance, the estimated class
    separation ``c`` and a flag when ``c`` is within 10x the split-half noise.
    """
    _need_samples(S)
    if not references:
        raise ValueError("need at least one reference")
    K = S.K
    refs = [list(r) for r, _ in references]
    if bandwidth is None:
        pooled = list(S.samples) + [s for r in refs for s in r]
        bandwidth = median_bandwidth(embed_samples(pooled, X, K))
    dists = [mmd(S.samples, r, X, K, bandwidth) for r in refs]
    choice = int(np.argmin(dists))
    pair = [mmd(refs[i], refs[j], X, K, bandwidth) for i in range(len(refs)) for j in range(i + 1, len(refs))]
    noise = []
    for r in refs:
        if len(r) >= 2:
            h = len(r) // 2
            noise.append(mmd(r[:h], r[h:], X, K, bandwidth))
    c_est = min(pair) if pair else float("nan")
    noise_est = float(np.mean(noise)) if noise else 0.0
    out = references[choice][1](S)
    if not isinstance(out, LearnerOutput):
        out = LearnerOutput(hypothesis=out)
    out.diagnostics.update(
        distances=dists,
        choice=choice,
        bandwidth=bandwidth,
        c_estimate=c_est,
        noise_estimate=noise_est,
        separation_flag=bool(pair) and c_est < 10 * noise_est,
    )
    return out
