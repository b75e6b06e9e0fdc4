"""ReLU feed-forward networks, score functions and explicit constructions.

Hidden layers apply ReLU; the output layer is linear. Forward passes use a
fixed accumulation order (bias first, then input columns left to right) so
that zero-padded and identity-padded networks reproduce the source network
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .domain import FeatureSpace
from .errors import RelationError, ShapeError
from .spaces import Hypothesis, HypothesisSpace
from .auc import RankingSpace

SCORE_KINDS = ("softmax", "temp", "energy")


def _check_arch(widths: Sequence[int]) -> tuple[int, ...]:
    q = tuple(int(w) for w in widths)
    if len(q) <= 2:
        raise ShapeError("architecture needs depth g > 2")
    if any(w < 1 for w in q):
        raise ShapeError("layer widths must be positive")
    return q


@dataclass(frozen=True, eq=False)
class ReluNetwork:
    """``weights[k]`` has shape ``(l_{k+2}, l_{k+1})`` in 1-based layer terms."""

    weights: tuple
    biases: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ws = tuple(np.array(w, dtype=float, ndmin=2) for w in self.weights)
        bs = tuple(np.array(b, dtype=float).ravel() for b in self.biases)
        if len(ws) != len(bs) or len(ws) < 2:
            raise ShapeError("network needs at least two layers of weights and matching biases")
        for k, (w, b) in enumerate(zip(ws, bs)):
            if w.shape[0] != b.shape[0]:
                raise ShapeError(f"layer {k}: bias length {b.shape[0]} != rows {w.shape[0]}")
            if k and w.shape[1] != ws[k - 1].shape[0]:
                raise ShapeError(f"layer {k}: expects {w.shape[1]} inputs, previous layer has {ws[k - 1].shape[0]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ShapeError("network parameters must be finite")
            w.setflags(write=False)
            b.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def arch(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    @property
    def depth(self) -> int:
        return len(self.weights) + 1

    def __eq__(self, other):
        return (
            isinstance(other, ReluNetwork)
            and self.arch == other.arch
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
        )

    __hash__ = None


def _affine(h: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.broadcast_to(b, (h.shape[0], b.shape[0])).copy()
    for j in range(W.shape[1]):
        out += h[:, j : j + 1] * W[:, j][None, :]
    return out


def forward(net: ReluNetwork, x) -> np.ndarray:
    """Network output for one point (vector) or a batch ``(N, d)``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    h = np.atleast_2d(x.reshape(1, -1) if single else x)
    if h.shape[1] != net.arch[0]:
        raise ShapeError(f"input dimension {h.shape[1]} != network input width {net.arch[0]}")
    last = len(net.weights) - 1
    for k, (W, b) in enumerate(zip(net.weights, net.biases)):
        h = _affine(h, W, b)
        if k < last:
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def _coords(X) -> np.ndarray:
    return X.coords if isinstance(X, FeatureSpace) else np.atleast_2d(np.asarray(X, dtype=float))


def argmax_last(V: np.ndarray) -> np.ndarray:
    """1-based argmax along the last axis; ties go to the largest index."""
    V = np.atleast_2d(V)
    l = V.shape[1]
    return l - np.argmax(V[:, ::-1], axis=1)


def induced_labels(net: ReluNetwork, K: int, X) -> np.ndarray:
    if net.arch[-1] != K + 1:
        raise ShapeError(f"output width {net.arch[-1]} != K+1 = {K + 1}")
    return argmax_last(forward(net, _coords(X)))


def induced_hypothesis(net: ReluNetwork, K: int, X) -> Hypothesis:
    return Hypothesis(tuple(induced_labels(net, K, X)))


@dataclass(frozen=True)
class ScoreFunction:
    """Score kind with temperature ``T`` and acceptance threshold ``lam``."""

    kind: str
    lam: float
    T: float = 1.0

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {self.kind!r}")
        if not self.T > 0:
            raise ValueError("temperature must be positive")
        if self.kind == "softmax" and self.T != 1.0:
            raise ValueError("plain softmax has no temperature")
        if self.kind == "energy" and not self.lam > 0:
            raise ValueError("energy threshold must be positive")

    def check_range(self, l: int):
        if self.kind != "energy" and not 1.0 / l < self.lam < 1.0:
            raise ValueError(f"threshold {self.lam} outside (1/{l}, 1)")


def score_values(E: ScoreFunction, V) -> np.ndarray:
    V = np.atleast_2d(np.asarray(V, dtype=float))
    Z = V / E.T
    zmax = Z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(Z - zmax).sum(axis=1)) + zmax[:, 0]
    if E.kind == "energy":
        return E.T * lse
    return np.exp(zmax[:, 0] - lse)


def score_value(E: ScoreFunction, v) -> float:
    return float(score_values(E, v)[0])


def score_labels(net: ReluNetwork, E: ScoreFunction, X) -> np.ndarray:
    E.check_range(net.arch[-1])
    s = score_values(E, forward(net, _coords(X)))
    return np.where(s >= E.lam, 1, 2)


def score_classifier(net: ReluNetwork, E: ScoreFunction, X) -> Hypothesis:
    return Hypothesis(tuple(score_labels(net, E, X)))


def fcnn_space(nets: Sequence[ReluNetwork], K: int, X) -> HypothesisSpace:
    return HypothesisSpace([induced_labels(n, K, X) for n in nets], K, "fcnn-induced")


def score_space(nets: Sequence[ReluNetwork], E: ScoreFunction, X) -> HypothesisSpace:
    return HypothesisSpace([score_labels(n, E, X) for n in nets], 1, "score-induced")


def ranking_space(nets: Sequence[ReluNetwork], X, E: ScoreFunction | None = None) -> RankingSpace:
    """Rankers from scalar-output nets, or from score values when ``E`` is given."""
    rows = []
    for n in nets:
        out = forward(n, _coords(X))
        if E is not None:
            rows.append(score_values(E, out))
        elif out.shape[1] == 1:
            rows.append(out[:, 0])
        else:
            raise ShapeError("ranker network needs a single output or a score function")
    return RankingSpace(rows, "fcnn-induced")


def arch_precedes(q: Sequence[int], qp: Sequence[int]) -> bool:
    q, qp = tuple(q), tuple(qp)
    g, gp = len(q), len(qp)
    if g > gp or q[0] != qp[0] or q[-1] != qp[-1]:
        return False
    if any(q[i] > qp[i] for i in range(g - 1)):
        return False
    return all(q[g - 2] <= qp[i] for i in range(g - 1, gp - 1))


def _pad(W: np.ndarray, rows: int, cols: int) -> np.ndarray:
    out = np.zeros((rows, cols))
    out[: W.shape[0], : W.shape[1]] = W
    return out


def embed_network(net: ReluNetwork, qp: Sequence[int]) -> ReluNetwork:
    """Realise ``net`` inside the larger architecture ``qp`` with identical outputs.

    Widths are padded with zero blocks. Extra depth is filled with identity
    layers after the last hidden layer, whose activations are already
    nonnegative, so ReLU passes them through unchanged.
    """
    q = net.arch
    qp = _check_arch(qp)
    if not arch_precedes(q, qp):
        raise RelationError(f"architecture {q} does not precede {qp}")
    g, gp = len(q), len(qp)
    Ws, bs = [], []
    # hidden layers 2..g-1 keep their place
    for k in range(g - 2):
        Ws.append(_pad(net.weights[k], qp[k + 1], qp[k]))
        bs.append(np.concatenate([net.biases[k], np.zeros(qp[k + 1] - q[k + 1])]))
    for i in range(g - 1, gp - 1):
        Ws.append(np.eye(qp[i], qp[i - 1]))
        bs.append(np.zeros(qp[i]))
    Ws.append(_pad(net.weights[-1], qp[-1], qp[-2]))
    bs.append(net.biases[-1].copy())
    meta = dict(net.meta)
    meta.update(embedded_from=list(q), bias_shift=0.0)
    return ReluNetwork(tuple(Ws), tuple(bs), meta)


def point_isolating_ranker(x, X=None) -> ReluNetwork:
    """Scalar net computing the L1 distance to ``x``: zero at ``x``, positive elsewhere."""
    x = np.asarray(x, dtype=float).ravel()
    d = x.size
    I = np.eye(d)
    W1 = np.vstack([I, -I])
    b1 = np.concatenate([-x, x])
    return ReluNetwork((W1, np.ones((1, 2 * d))), (b1, np.zeros(1)), {"construction": "isolating", "target": x.tolist()})


def constant_network(d: int, out, hidden: int = 1) -> ReluNetwork:
    """Network whose output is the fixed vector ``out`` everywhere."""
    out = np.asarray(out, dtype=float).ravel()
    return ReluNetwork(
        (np.zeros((hidden, d)), np.zeros((out.size, hidden))),
        (np.zeros(hidden), out),
        {"construction": "constant"},
    )


def interpolating_network(assignments: Mapping[int, int] | Sequence[int], K: int, X) -> ReluNetwork:
    """Network whose induced hypothesis equals ``assignments`` on every point of X.

    Each point gets a bump that is 1 at the point and 0 at every other point of
    X (built from L1 distances); the output for label y sums the bumps of the
    points assigned to y.
    """
    P = _coords(X)
    m, d = P.shape
    if isinstance(assignments, Mapping):
        labels = np.array([assignments[i] for i in range(m)], dtype=np.int64)
    else:
        labels = np.asarray(assignments, dtype=np.int64)
    if labels.shape != (m,) or labels.min() < 1 or labels.max() > K + 1:
        raise ShapeError("assignments must give a label in 1..K+1 for every point")
    if np.all(labels == labels[0]):
        return constant_network(d, np.eye(K + 1)[labels[0] - 1])
    diff = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=-1)
    delta = diff[~np.eye(m, dtype=bool)].min()
    if delta <= 0:
        raise ShapeError("points must be distinct")
    I = np.eye(d)
    W1 = np.vstack([np.vstack([I, -I]) for _ in range(m)])
    b1 = np.concatenate([np.concatenate([-p, p]) for p in P])
    W2 = np.zeros((m, 2 * d * m))
    for j in range(m):
        W2[j, 2 * d * j : 2 * d * (j + 1)] = -2.0 / delta
    b2 = np.ones(m)
    W3 = np.zeros((K + 1, m))
    W3[labels - 1, np.arange(m)] = 1.0
    return ReluNetwork((W1, W2, W3), (b1, b2, np.zeros(K + 1)), {"construction": "interpolating"})


def binary_head_projection(net: ReluNetwork) -> ReluNetwork:
    """Two-output network whose induced binary hypothesis is phi of the original.

    The old output layer becomes a hidden layer holding ``relu(f)`` and
    ``relu(-f)``; the next layer computes ``relu(f_k - f_{K+1})`` for every ID
    label k, and the new head compares their sum against zero.
    """
    L = net.arch[-1]
    if L < 2:
        raise ShapeError("projection needs at least two outputs")
    K = L - 1
    Wg, bg = net.weights[-1], net.biases[-1]
    A = np.vstack([Wg, -Wg])
    a = np.concatenate([bg, -bg])
    B = np.zeros((K, 2 * L))
    for k in range(K):
        B[k, k] = 1.0
        B[k, K] = -1.0
        B[k, L + k] = -1.0
        B[k, L + K] = 1.0
    M = np.vstack([np.ones((1, K)), np.zeros((1, K))])
    Ws = net.weights[:-1] + (A, B, M)
    bs = net.biases[:-1] + (a, np.zeros(K), np.zeros(2))
    meta = dict(net.meta)
    meta["projected"] = True
    return ReluNetwork(Ws, bs, meta)


def random_network(q: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> ReluNetwork:
    """Gaussian-parameter network on architecture ``q`` (fixtures only)."""
    q = _check_arch(q)
    Ws = tuple(rng.normal(0.0, scale, size=(q[i + 1], q[i])) for i in range(len(q) - 1))
    bs = tuple(rng.normal(0.0, scale, size=q[i + 1]) for i in range(len(q) - 1))
    return ReluNetwork(Ws, bs, {"construction": "random"})
