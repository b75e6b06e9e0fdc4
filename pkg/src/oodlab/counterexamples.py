"""Explicit finite counterexamples with recomputed numeric certificates."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .auc import RankingSpace, sup_auc
from .conditions import check_linear_auc, realized_splits
from .domain import FeatureSpace, FiniteDomain, IdJoint, OodMarginal, overlap_set
from .errors import DomainParameterError, NoCounterexampleError, SpaceSizeError
from .loss import LossTable, space_risks
from .spaces import HypothesisSpace, phi_labels, phi_project, sauer_bound, vc_dimension

SPLIT_CAP = 10**6


@dataclass
class Certificate:
    rule: str
    domains: list[FiniteDomain]
    quantities: dict
    checks: dict[str, bool]
    verdict: str
    extra: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.checks.values())


def _default_X(m: int) -> FeatureSpace:
    return FeatureSpace.line(range(m))


def overlap_domain(space: HypothesisSpace, X: FeatureSpace | None = None) -> FiniteDomain:
    """Half ID mass and half OOD mass on one point where two members disagree under phi."""
    X = X or _default_X(space.m)
    M = space.members
    K = space.K
    for x in range(space.m):
        ids = np.flatnonzero(M[:, x] <= K)
        rej = np.flatnonzero(M[:, x] == K + 1)
        if ids.size and rej.size:
            y = int(M[ids[0], x])
            return FiniteDomain(X, IdJoint.dirac(X.size, K, x, y), OodMarginal.dirac(X.size, x), 0.5)
    raise NoCounterexampleError("every member makes the same ID/OOD call at every point")


def c_alpha(loss: LossTable, alpha: float) -> float:
    """Smallest per-point cost at an overlap point, combining ID and OOD truths with weight alpha."""
    K = loss.K
    v = loss.values
    best = math.inf
    for y1 in range(K + 1):
        val = (1 - alpha) * v[y1, :K].min() + alpha * v[y1, K]
        best = min(best, val)
    return float(best)


def overlap_risk_bound(domain: FiniteDomain, loss: LossTable, alpha: float) -> tuple[float, int]:
    """Best lower bound ``c_alpha * |A_m| / m`` over the natural choices of ``m``.

    ``A_m`` holds the points whose ID and OOD masses are both at least ``1/m``.
    Returns ``(bound, m)``; ``(0.0, 0)`` when there is no overlap.
    """
    fi, fo = domain.id_marginal, domain.ood_marginal
    ov = sorted(overlap_set(domain))
    if not ov:
        return 0.0, 0
    c = c_alpha(loss, alpha)
    best, best_m = 0.0, 0
    for m in sorted({math.ceil(1.0 / min(fi[x], fo[x])) for x in ov}):
        size = int(((fi >= 1.0 / m) & (fo >= 1.0 / m)).sum())
        if c * size / m > best:
            best, best_m = c * size / m, m
    return best, best_m


def alpha_risk_gap(domain: FiniteDomain, space: HypothesisSpace, loss: LossTable, alpha: float) -> float:
    """``inf R^alpha`` minus the alpha-combination of the two pure infima.

    When both pure infima are zero the gap is checked against the overlap
    lower bound; a violation means a bug and raises.
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainParameterError("alpha must lie in [0, 1]")
    r_in, r_out = space_risks(space, domain, loss)
    lo_in, lo_out = float(r_in.min()), float(r_out.min())
    gap = float(((1 - alpha) * r_in + alpha * r_out).min()) - ((1 - alpha) * lo_in + alpha * lo_out)
    if lo_in == 0.0 and lo_out == 0.0 and 0 < alpha < 1:
        bound, _ = overlap_risk_bound(domain, loss, alpha)
        if gap < bound - 1e-12:
            raise AssertionError(f"gap {gap} below the overlap bound {bound}")
    return max(gap, 0.0)


def sauer_pattern_domain(space: HypothesisSpace, X: FeatureSpace | None = None, loss: LossTable | None = None) -> Certificate:
    """Separate two-part domain built from a phi-pattern the space cannot realise.

    Picks ``v + 2`` points (``v`` the VC dimension of the projection) that one
    member labels entirely as ID, then the lexicographically first missing
    pattern with both labels.
    """
    X = X or _default_X(space.m)
    loss = loss or LossTable.zero_one(space.K)
    K = space.K
    phi = phi_project(space)
    v = vc_dimension(phi)
    M = space.members
    n_id = (M <= K).sum(axis=1)
    owner = int(np.argmax(n_id))
    if n_id[owner] < v + 2:
        raise NoCounterexampleError(f"no member labels {v + 2} points as ID")
    C = [int(i) for i in np.flatnonzero(M[owner] <= K)[: v + 2]]
    realized = {tuple(r) for r in phi_labels(M[:, C], K)}
    pattern = None
    for p in itertools.product((1, 2), repeat=len(C)):
        if p not in realized and 1 in p and 2 in p:
            pattern = p
            break
    if pattern is None:
        raise NoCounterexampleError("every pattern on the chosen points is realised")
    c_in = [x for x, s in zip(C, pattern) if s == 1]
    c_out = [x for x, s in zip(C, pattern) if s == 2]
    idj = IdJoint.from_atoms(X.size, K, [(x, int(M[owner, x]), 1.0 / len(c_in)) for x in c_in])
    dom = FiniteDomain(X, idj, OodMarginal.uniform(X.size, c_out), 0.5)
    r_in, r_out = space_risks(space, dom, loss)
    inf_d = float((0.5 * r_in + 0.5 * r_out).min())
    inf_in, inf_out = float(r_in.min()), float(r_out.min())
    gap = inf_d - 0.5 * inf_in - 0.5 * inf_out
    q = {
        "vc": v,
        "points": C,
        "pattern": list(pattern),
        "realized_patterns": len(realized),
        "sauer_bound": sauer_bound(v, len(C) - 1),
        "inf_risk": inf_d,
        "inf_risk_in": inf_in,
        "inf_risk_out": inf_out,
        "linear_gap": gap,
    }
    checks = {
        "inf_risk_positive": inf_d > 0,
        "inf_risk_in_zero": inf_in == 0.0,
        "gap_or_out_positive": gap > 1e-12 or inf_out > 0,
        "within_sauer_bound": len(realized) <= q["sauer_bound"],
    }
    return Certificate("separate-sauer", [dom], q, checks, "not learnable in the separate space")


def order_type_count(S: np.ndarray) -> int:
    """Number of distinct pairwise order matrices realised by the rankers."""
    sig = np.sign(S[:, :, None] - S[:, None, :]).reshape(S.shape[0], -1)
    return int(np.unique(sig, axis=0).shape[0])


def auc_unrealizable_split(space: RankingSpace, X: FeatureSpace | None = None) -> Certificate:
    """Uniform ID/OOD split of X that no ranker orders perfectly."""
    S = space.scores
    m = S.shape[1]
    X = X or _default_X(m)
    total = 2**m - 2
    if total > SPLIT_CAP:
        raise SpaceSizeError(f"{total} splits exceeds the cap of {SPLIT_CAP}")
    realized = realized_splits(S)
    for mask in range(1, total + 1):
        if mask not in realized:
            break
    else:
        raise NoCounterexampleError("every split has a perfect ranker")
    a = [i for i in range(m) if mask >> i & 1]
    b = [i for i in range(m) if not mask >> i & 1]
    idj = IdJoint.from_atoms(m, 1, [(i, 1, 1.0 / len(a)) for i in a])
    dom = FiniteDomain(X, idj, OodMarginal.uniform(m, b), 0.5)
    best, _ = sup_auc(space, dom)
    types = order_type_count(S)
    q = {
        "id_points": a,
        "ood_points": b,
        "sup_auc": best,
        "realized_splits": len(realized),
        "total_splits": total,
        "order_types": types,
    }
    checks = {"sup_auc_below_one": best < 1.0, "count_bound": len(realized) <= (m - 1) * types}
    return Certificate("separate-auc-counting", [dom], q, checks, "no perfect ranker for this separate split")


def dirac_auc_overlap_pair(id_part: IdJoint, x: int, xp: int, space: RankingSpace, X: FeatureSpace | None = None) -> Certificate:
    """Two point-mass OOD parts, each sitting on ID mass, tested for the AUC linear condition."""
    if x == xp:
        raise DomainParameterError("the two OOD points must differ")
    fi = id_part.marginal
    if fi[x] <= 0 or fi[xp] <= 0:
        raise DomainParameterError("both OOD points must carry ID mass")
    m = fi.size
    X = X or _default_X(m)
    o1, o2 = OodMarginal.dirac(m, x), OodMarginal.dirac(m, xp)
    d1 = FiniteDomain(X, id_part, o1, 0.5)
    d2 = FiniteDomain(X, id_part, o2, 0.5)
    P, Pp = overlap_set(d1), overlap_set(d2)
    both = float(sum(fi[i] for i in P & Pp))
    smaller = float(min(sum(fi[i] for i in P), sum(fi[i] for i in Pp)))
    rep = check_linear_auc(space, id_part, o1, o2)
    q = {"overlap_mass_both": both, "overlap_mass_min": smaller, "linear_auc": rep.to_dict()}
    checks = {"overlap_inequality": both < smaller}
    verdict = "linear condition under AUC fails" if not rep.holds else "linear condition under AUC holds for this space"
    return Certificate("dirac-auc-overlap", [d1, d2], q, checks, verdict, {"linear_auc_holds": rep.holds})


def auc_impossibility_size(d: int) -> int:
    """Smallest |X| meeting ``(28d + 14) ln(14d + 7)`` (natural log)."""
    return math.ceil((28 * d + 14) * math.log(14 * d + 7))
