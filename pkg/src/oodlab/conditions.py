"""Exact condition checkers and a rule table for learnability verdicts.

Every infimum here is attained, so epsilon-ball conditions reduce to
intersections of exact argmin sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .auc import RankingSpace, auc_matrix
from .domain import DomainSpaceSpec, FiniteDomain, IdJoint, OodMarginal, id_equivalence_key, overlap_set
from .errors import DomainParameterError
from .loss import LossTable, argmin_set, check_loss_dominance, risks_from_masses, space_risks
from .spaces import (
    HypothesisSpace,
    all_binary,
    check_constant_closure,
    check_separate_assumption,
    check_separate_ranking,
    phi_labels,
    phi_project,
    vc_dimension,
)

AUC_TOL = 1e-9
DEFAULT_ALPHAS = tuple(round(0.1 * k, 1) for k in range(10))
DEFAULT_EPSILONS = (1.0, 0.1, 0.01)
NETWORK_PROVENANCE = ("fcnn-induced", "score-induced")


@dataclass
class ConditionReport:
    condition: str
    holds: bool
    witness: dict | None = None
    citations: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError("a failing report needs a witness")

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "holds": self.holds,
            "witness": self.witness,
            "citations": list(self.citations),
            "details": self.details,
        }


def check_linear_risk(space: HypothesisSpace, domain: FiniteDomain, loss: LossTable) -> ConditionReport:
    """Holds iff some member minimises the ID risk and the OOD risk at once."""
    r_in, r_out = space_risks(space, domain, loss)
    inf_in, arg_in = argmin_set(r_in)
    inf_out, arg_out = argmin_set(r_out)
    common = sorted(set(arg_in) & set(arg_out))
    details = {"inf_in": inf_in, "inf_out": inf_out, "common_minimisers": common[:16]}
    if common:
        return ConditionReport("linear-risk", True, None, ["linear-risk"], details)
    inf_half = float((0.5 * r_in + 0.5 * r_out).min())
    gap = inf_half - (0.5 * inf_in + 0.5 * inf_out)
    witness = {"alpha": 0.5, "gap": gap, "inf_alpha": inf_half, "inf_in": inf_in, "inf_out": inf_out}
    return ConditionReport("linear-risk", False, witness, ["linear-risk"], details)


def linear_risk_grid(space: HypothesisSpace, domain: FiniteDomain, loss: LossTable, alphas=DEFAULT_ALPHAS, tol: float = 1e-12) -> bool:
    """Direct test: inf of the alpha-risk equals the alpha-combination of the pure infima on a grid."""
    r_in, r_out = space_risks(space, domain, loss)
    lo_in, lo_out = r_in.min(), r_out.min()
    for a in alphas:
        lhs = ((1 - a) * r_in + a * r_out).min()
        if abs(lhs - ((1 - a) * lo_in + a * lo_out)) > tol:
            return False
    return True


def check_multilinear(space: HypothesisSpace, id_part: IdJoint, decomposition: Sequence[OodMarginal], loss: LossTable) -> ConditionReport:
    """Some member minimises the ID risk and every OOD component's risk at once."""
    if not decomposition:
        raise DomainParameterError("decomposition must be non-empty")
    members = space.members
    r_in, _ = risks_from_masses(members, id_part.mass, decomposition[0].mass, loss)
    _, common = argmin_set(r_in)
    common = set(common)
    infs = []
    failed_at = None
    for j, q in enumerate(decomposition):
        _, r_q = risks_from_masses(members, id_part.mass, q.mass, loss)
        v, arg = argmin_set(r_q)
        infs.append(v)
        common &= set(arg)
        if not common and failed_at is None:
            failed_at = j
    details = {"inf_components": infs}
    if common:
        return ConditionReport("multi-linear", True, None, ["multi-linear"], details)
    return ConditionReport("multi-linear", False, {"component": failed_at}, ["multi-linear"], details)


def _marg(part) -> np.ndarray:
    if isinstance(part, IdJoint):
        return part.marginal
    if isinstance(part, OodMarginal):
        return part.mass
    return np.asarray(part, dtype=float)


def _sup_auc(S: np.ndarray, p_in, p_out) -> float:
    return float(auc_matrix(S, p_in, p_out).max())


def check_linear_auc(space: RankingSpace, id_part, ood1, ood2, alpha_grid=DEFAULT_ALPHAS) -> ConditionReport:
    """Sup AUC against the mixed OOD part versus the mix of the two sups."""
    S = space.scores
    pi, o1, o2 = _marg(id_part), _marg(ood1), _marg(ood2)
    s1, s2 = _sup_auc(S, pi, o1), _sup_auc(S, pi, o2)
    worst = None
    for a in alpha_grid:
        lhs = _sup_auc(S, pi, a * o1 + (1 - a) * o2)
        rhs = a * s1 + (1 - a) * s2
        if worst is None or abs(lhs - rhs) > worst["difference"]:
            worst = {"alpha": float(a), "sup_mixture": lhs, "mixed_sups": rhs, "difference": abs(lhs - rhs)}
    holds = worst["difference"] <= AUC_TOL
    return ConditionReport("linear-auc", holds, None if holds else worst, ["linear-auc"], {"worst": worst})


def check_compatibility(space: HypothesisSpace, equivalence_class: Sequence[FiniteDomain], loss: LossTable, epsilon_grid=DEFAULT_EPSILONS) -> ConditionReport:
    """One member that is ID-optimal and OOD-optimal for every domain of the class."""
    if not equivalence_class:
        raise DomainParameterError("equivalence class is empty")
    keys = {id_equivalence_key(d) for d in equivalence_class}
    if len(keys) != 1:
        raise DomainParameterError("domains in an equivalence class must share the ID part")
    r_in, _ = space_risks(space, equivalence_class[0], loss)
    inf_in = r_in.min()
    excess = r_in - inf_in
    for d in equivalence_class:
        _, r_out = space_risks(space, d, loss)
        excess = np.maximum(excess, r_out - r_out.min())
    per_eps = {str(e): bool((excess <= e + 1e-12).any()) for e in epsilon_grid}
    best = float(excess.min())
    holds = best <= 1e-12
    details = {"epsilon_grid": per_eps, "canonical": int(np.argmin(excess)), "class_size": len(equivalence_class)}
    witness = None if holds else {"min_max_excess": best}
    return ConditionReport("compatibility", holds, witness, ["finite-id-compatibility"], details)


def check_risk_realizability(space: HypothesisSpace, domain: FiniteDomain, loss: LossTable) -> bool:
    r_in, r_out = space_risks(space, domain, loss)
    a = domain.pi_out
    return bool(((1 - a) * r_in + a * r_out).min() == 0.0)


def perfect_pair_mask(S: np.ndarray, p_in, p_out) -> np.ndarray:
    """Which rankers put every ID-support point strictly above every OOD-support point."""
    need = np.outer(np.asarray(p_in) > 0, np.asarray(p_out) > 0)
    above = S[:, :, None] > S[:, None, :]
    return (above | ~need[None]).all(axis=(1, 2))


def check_auc_realizability(space: RankingSpace, domain: FiniteDomain) -> bool:
    return bool(perfect_pair_mask(space.scores, domain.id_marginal, domain.ood_marginal).any())


def realized_splits(S: np.ndarray) -> set[int]:
    """Bitmasks of ID sets A (proper, non-empty) that some ranker separates strictly above X \\ A."""
    S = np.atleast_2d(S)
    m = S.shape[1]
    out: set[int] = set()
    for row in S:
        vals = np.unique(row)
        for t in vals[:-1]:
            mask = 0
            for i in np.flatnonzero(row > t):
                mask |= 1 << int(i)
            out.add(mask)
    full = (1 << m) - 1
    out.discard(0)
    out.discard(full)
    return out


@dataclass
class Verdict:
    verdict: str
    mode: str
    fired: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "mode": self.mode, "fired": list(self.fired)}


def _rule(rule_id: str, premise: str, **extra) -> dict:
    out = {"id": rule_id, "premise": premise}
    out.update(extra)
    return out


def _is_network_space(space) -> bool:
    return getattr(space, "provenance", None) in NETWORK_PROVENANCE


def learnability_verdict(spec: DomainSpaceSpec, space, mode: str = "risk", loss: LossTable | None = None, constant_pool=None) -> Verdict:
    """Apply the rule table; not-learnable rules are tried before learnable ones."""
    if mode == "risk":
        return _risk_verdict(spec, space, loss or LossTable.zero_one(space.K))
    if mode == "auc":
        return _auc_verdict(spec, space, constant_pool)
    raise ValueError(f"unknown mode {mode!r}")


def _risk_verdict(spec: DomainSpaceSpec, H: HypothesisSpace, loss: LossTable) -> Verdict:
    def no(rule):
        return Verdict("not-learnable", "risk", [rule])

    network_binary = H.K == 1 and _is_network_space(H)
    for k, d in enumerate(spec.members):
        rep = check_linear_risk(H, d, loss)
        ov = overlap_set(d)
        if ov and rep.details["inf_in"] == 0.0 and rep.details["inf_out"] == 0.0:
            return no(_rule("overlap-impossibility", "a member has ID/OOD overlap while both partial infima are zero", member=k))
        if ov and network_binary and spec.prior_unknown:
            return no(_rule("network-overlap", "binary network-induced space and a member with ID/OOD overlap", member=k))
        if not rep.holds:
            return no(_rule("linear-condition-failure", "a member violates the linear condition under risk", member=k, gap=rep.witness["gap"]))

    phi = phi_project(H)
    if spec.kind == "total":
        if len(phi) > 1:
            return no(_rule("total-space", "total space with more than one distinct ID/OOD pattern"))
        return Verdict("undetermined", "risk")

    if spec.kind == "single":
        return Verdict("learnable", "risk", [_rule("single-linear", "single-distribution space satisfying the linear condition")])

    if spec.kind == "separate":
        return _separate_risk(H, phi, loss)

    if spec.kind == "finite_id":
        for cls in spec.equivalence_classes():
            rep = check_compatibility(H, cls, loss)
            if not rep.holds:
                return no(_rule("finite-id-compatibility", "an ID-equivalence class violates compatibility", witness=rep.witness))
        return Verdict("learnable", "risk", [_rule("finite-id-compatibility", "finite-ID space where every equivalence class is compatible")])

    # density-based
    real = [check_risk_realizability(H, d, loss) for d in spec.members]
    if spec.members and all(real):
        return Verdict("learnable", "risk", [_rule("density-realizable", "density-based space, finite base, every member risk-realizable")])
    if network_binary and not all(real):
        k = real.index(False)
        return no(_rule("density-network-equivalence", "binary network-induced space and a member that is not risk-realizable", member=k))
    return Verdict("undetermined", "risk")


def _separate_risk(H: HypothesisSpace, phi: HypothesisSpace, loss: LossTable) -> Verdict:
    m = H.m
    ass1 = check_separate_assumption(H)
    if ass1 and len(phi) > 1 and m <= 24:
        v = vc_dimension(phi)
        most_id = int((H.members <= H.K).sum(axis=1).max())
        if most_id >= v + 2:
            return Verdict("not-learnable", "risk", [_rule(
                "separate-sauer", "separate space, every point rejectable, finite VC of the projection v, some member labels at least v+2 points as ID",
                vc=v, max_id_points=most_id)])
    everything_but_reject = _all_but_reject(m)
    if H.K == 1 and ass1 and np.any((H.members == 1).all(axis=1)):
        if _contains_rows(H.members, everything_but_reject):
            return Verdict("learnable", "risk", [_rule("separate-binary-rich", "binary separate space containing every labeling except constant reject")])
        return Verdict("not-learnable", "risk", [_rule("separate-binary-rich", "binary separate space missing a non-constant-reject labeling")])
    if H.factors is not None:
        _, h_b = H.factors
        if _contains_rows(h_b.members, everything_but_reject) and check_loss_dominance(loss):
            return Verdict("learnable", "risk", [_rule("separate-composed", "composed space whose binary factor has every labeling except constant reject, with loss dominance")])
    return Verdict("undetermined", "risk")


def _all_but_reject(m: int) -> np.ndarray:
    rows = all_binary(m).members
    return rows[~(rows == 2).all(axis=1)]


def _contains_rows(have: np.ndarray, need: np.ndarray) -> bool:
    got = {r.tobytes() for r in np.ascontiguousarray(have, dtype=np.int64)}
    return all(r.tobytes() in got for r in np.ascontiguousarray(need, dtype=np.int64))


def _auc_verdict(spec: DomainSpaceSpec, R: RankingSpace, constant_pool) -> Verdict:
    def no(rule):
        return Verdict("not-learnable", "auc", [rule])

    for cls in spec.equivalence_classes():
        for i in range(len(cls)):
            for j in range(i + 1, len(cls)):
                rep = check_linear_auc(R, cls[i].id_part, cls[i].ood_part, cls[j].ood_part)
                if not rep.holds:
                    return no(_rule("linear-auc-failure", "two members sharing the ID part violate the linear condition under AUC", witness=rep.witness))

    S = R.scores
    if spec.kind == "total":
        above = (S[:, :, None] > S[:, None, :]).any(axis=0)
        if np.any(above & above.T):
            return no(_rule("total-space-auc", "two rankers order some pair of points in opposite ways"))
        return Verdict("undetermined", "auc")

    if spec.kind == "separate" and check_separate_ranking(R):
        m = S.shape[1]
        if 2**m - 2 > 10**6:
            return Verdict("undetermined", "auc")
        missing = (2**m - 2) - len(realized_splits(S))
        if missing == 0:
            return Verdict("learnable", "auc", [_rule("separate-auc-realizable", "separate ranking space, finite X, every separate domain has a perfect ranker")])
        return no(_rule("separate-auc-realizable", "separate ranking space with a separate domain lacking a perfect ranker", unrealized_splits=missing))

    if spec.kind == "finite_id":
        return Verdict("undetermined", "auc")

    if spec.kind == "density" and check_separate_ranking(R):
        closed = _is_network_space(R) or (constant_pool is not None and check_constant_closure(R, constant_pool))
        if closed and spec.members and all(check_auc_realizability(R, d) for d in spec.members):
            return Verdict("learnable", "auc", [_rule("density-auc-realizable", "constant-closed separate ranking space, finite base, every member AUC-realizable")])
    return Verdict("undetermined", "auc")
