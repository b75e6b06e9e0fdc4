"""Experiment configs, learning curves, condition reports and counterexample runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as lab_io
from .auc import auc, sup_auc
from .conditions import (
    DEFAULT_ALPHAS,
    check_auc_realizability,
    check_compatibility,
    check_linear_auc,
    check_linear_risk,
    check_risk_realizability,
    learnability_verdict,
)
from .counterexamples import (
    alpha_risk_gap,
    auc_unrealizable_split,
    dirac_auc_overlap_pair,
    overlap_domain,
    overlap_risk_bound,
    sauer_pattern_domain,
)
from .domain import sample_id
from .errors import LabFileError
from .learners import (
    TrainingSet,
    composite_learner,
    constrained_auc_learner,
    constrained_reject_learner,
    erm_id,
    nn_rate_bound,
    nn_threshold_learner,
    threshold_pairs,
)
from .loss import space_risks
from .spaces import HypothesisSpace, exhaustive_space

MODES = ("curve", "check", "counterexample", "verdict")
LEARNERS = ("nn", "constrained-reject", "composite", "constrained-auc")
NOISE_FLOOR = -1e-9


@dataclass
class ExperimentConfig:
    mode: str
    domain: str | dict | None = None
    domain_space: str | dict | None = None
    space: str | dict | None = None
    rankers: str | dict | None = None
    loss: object = "zero-one"
    n_grid: list[int] = field(default_factory=lambda: [1, 2, 4, 8, 16])
    trials: int = 1
    seed: int = 0
    alpha_grid: list[float] = field(default_factory=lambda: list(DEFAULT_ALPHAS))
    theta: float = 0.5
    out: str | None = None
    learner: str = "nn"
    metric: str = "risk"
    counterexample: str = "overlap"
    points: list[int] = field(default_factory=list)
    base_dir: str = "."

    def __post_init__(self):
        if self.mode not in MODES:
            raise LabFileError(f"mode must be one of {MODES}, got {self.mode!r}")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])) or not self.n_grid or self.n_grid[0] < 1:
            raise LabFileError("n_grid must be a strictly increasing list of positive sizes")
        if self.trials < 1:
            raise LabFileError("trials must be >= 1")
        if not 0 < self.theta < 1:
            raise LabFileError("theta must lie in (0, 1)")
        if self.learner not in LEARNERS:
            raise LabFileError(f"learner must be one of {LEARNERS}")
        if self.metric not in ("risk", "auc"):
            raise LabFileError("metric must be 'risk' or 'auc'")
        if self.mode == "curve" and (self.metric == "auc") != (self.learner == "constrained-auc"):
            raise LabFileError("AUC curves use the constrained-auc learner and risk curves use the others")

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        raw = lab_io.read_json(path)
        if not isinstance(raw, dict):
            raise LabFileError(f"{path}: config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise LabFileError(f"{path}: unknown config keys {sorted(unknown)}")
        raw.setdefault("base_dir", str(Path(path).resolve().parent))
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)

    def _load(self, ref, what: str):
        if ref is None:
            raise LabFileError(f"config needs a {what!r} entry")
        if isinstance(ref, dict):
            return ref
        return lab_io.read_json(Path(self.base_dir) / ref)

    def load_domain(self):
        return lab_io.domain_from_dict(self._load(self.domain, "domain"), str(self.domain))

    def load_spec(self):
        return lab_io.spec_from_dict(self._load(self.domain_space, "domain_space"), str(self.domain_space))

    def load_space(self, m: int, K: int) -> HypothesisSpace:
        if self.space is None:
            return exhaustive_space(m, K)
        return lab_io.space_from_dict(self._load(self.space, "space"), m, str(self.space))

    def load_rankers(self, X):
        return lab_io.rankers_from_dict(self._load(self.rankers, "rankers"), X, str(self.rankers))


def _alpha_key(a: float) -> str:
    return f"excess_a{a:g}"


def curve_header(config: ExperimentConfig) -> list[str]:
    if config.metric == "auc":
        cols = ["n", "auc_regret"]
    else:
        cols = ["n"] + [_alpha_key(a) for a in config.alpha_grid] + ["risk_in", "risk_out"]
    return cols + ["nn_rate", "rate_theta", "rate_one_over_n"]


def _learn(config, S, D, H, loss, aux):
    X = D.X
    if config.learner == "nn":
        return nn_threshold_learner(S, X)
    if config.learner == "constrained-reject":
        return constrained_reject_learner(S, aux, H, loss)
    # composite: ERM over the ID factor (or the reject-free members) plus the NN rejector
    if H.factors is not None:
        h_in_space = H.factors[0]
    else:
        keep = H.members[(H.members <= H.K).all(axis=1)]
        if keep.size == 0:
            raise LabFileError("composite learner needs a member without reject labels")
        h_in_space = HypothesisSpace(keep, H.K)
    out = composite_learner(S, lambda s: erm_id(s, h_in_space, loss), lambda s: nn_threshold_learner(s, X), H.K, loss)
    return out.hypothesis


def run_learning_curve(config: ExperimentConfig) -> list[dict]:
    """Mean excess alpha-risk (or AUC regret) per sample size, with rate anchors."""
    D = config.load_domain()
    X = D.X
    aux = list(range(X.size))
    rows = []
    if config.metric == "auc":
        R = config.load_rankers(X)
        pairs = threshold_pairs(R)
        best, _ = sup_auc(R, D)
    else:
        H = config.load_space(X.size, D.K)
        loss = lab_io.loss_from_spec(config.loss, D.K)
        r_in_all, r_out_all = space_risks(H, D, loss)
        infs = {a: float(((1 - a) * r_in_all + a * r_out_all).min()) for a in config.alpha_grid}
    for n in config.n_grid:
        row = {"n": n}
        if config.metric == "auc":
            regrets = []
            for t in range(config.trials):
                S = TrainingSet(tuple(sample_id(D, n, config.seed + t)), D.K)
                r, _ = constrained_auc_learner(S, aux, pairs)
                regrets.append(best - auc(r, D))
            row["auc_regret"] = float(np.mean(regrets))
        else:
            ins, outs = [], []
            for t in range(config.trials):
                S = TrainingSet(tuple(sample_id(D, n, config.seed + t)), D.K)
                h = _learn(config, S, D, H, loss, aux)
                ri, ro = space_risks(HypothesisSpace([h.labels], D.K), D, loss)
                ins.append(float(ri[0]))
                outs.append(float(ro[0]))
            ins, outs = np.asarray(ins), np.asarray(outs)
            for a in config.alpha_grid:
                row[_alpha_key(a)] = float(np.mean((1 - a) * ins + a * outs) - infs[a])
            row["risk_in"] = float(ins.mean())
            row["risk_out"] = float(outs.mean())
        row["nn_rate"] = nn_rate_bound(X.dim, n)
        row["rate_theta"] = 1.0 / math.sqrt(n ** (1 - config.theta))
        row["rate_one_over_n"] = 1.0 / n
        rows.append(row)
    return rows


def fitted_slope(rows: list[dict], column: str) -> float | None:
    """Least-squares slope of log(value) against log(n) over rows with positive values."""
    pts = [(math.log(r["n"]), math.log(r[column])) for r in rows if r.get(column, 0) > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def run_condition_report(config: ExperimentConfig) -> dict:
    """One report per member (and per equivalence class) plus the verdict."""
    spec = config.load_spec()
    if not spec.members:
        return {"reports": [], "verdict": {"verdict": "undetermined", "mode": config.metric, "fired": []}}
    X = spec.members[0].X
    reports = []
    if config.metric == "auc":
        R = config.load_rankers(X)
        for k, D in enumerate(spec.members):
            reports.append({"member": k, "condition": "auc-realizability", "holds": check_auc_realizability(R, D)})
        for c, cls in enumerate(spec.equivalence_classes()):
            for i in range(len(cls)):
                for j in range(i + 1, len(cls)):
                    rep = check_linear_auc(R, cls[i].id_part, cls[i].ood_part, cls[j].ood_part, config.alpha_grid)
                    reports.append({"class": c, "pair": [i, j], **rep.to_dict()})
        verdict = learnability_verdict(spec, R, "auc")
    else:
        K = spec.members[0].K
        H = config.load_space(X.size, K)
        loss = lab_io.loss_from_spec(config.loss, K)
        for k, D in enumerate(spec.members):
            reports.append({"member": k, **check_linear_risk(H, D, loss).to_dict()})
            reports.append({"member": k, "condition": "risk-realizability", "holds": check_risk_realizability(H, D, loss)})
        for c, cls in enumerate(spec.equivalence_classes()):
            reports.append({"class": c, **check_compatibility(H, cls, loss).to_dict()})
        verdict = learnability_verdict(spec, H, "risk", loss)
    return {"reports": reports, "verdict": verdict.to_dict()}


def run_verdict(config: ExperimentConfig) -> dict:
    spec = config.load_spec()
    if config.metric == "auc":
        X = spec.members[0].X if spec.members else None
        return learnability_verdict(spec, config.load_rankers(X), "auc").to_dict()
    m = spec.members[0].X.size if spec.members else 0
    K = spec.members[0].K if spec.members else 1
    H = config.load_space(m, K)
    return learnability_verdict(spec, H, "risk", lab_io.loss_from_spec(config.loss, H.K)).to_dict()


def certificate_to_dict(cert) -> dict:
    return {
        "rule": cert.rule,
        "domains": [lab_io.domain_to_dict(D) for D in cert.domains],
        "quantities": cert.quantities,
        "checks": cert.checks,
        "valid": cert.valid,
        "verdict": cert.verdict,
        "extra": cert.extra,
    }


def run_counterexample(config: ExperimentConfig) -> dict:
    """Build the requested counterexample; raises when none exists."""
    kind = config.counterexample
    D = config.load_domain() if config.domain is not None else None
    if kind in ("overlap", "sauer"):
        if D is None:
            raise LabFileError("counterexample search needs a 'domain' entry for its feature space")
        H = config.load_space(D.X.size, D.K)
        loss = lab_io.loss_from_spec(config.loss, H.K)
        if kind == "sauer":
            return certificate_to_dict(sauer_pattern_domain(H, D.X, loss))
        dom = overlap_domain(H, D.X)
        gap = alpha_risk_gap(dom, H, loss, 0.5)
        bound, m0 = overlap_risk_bound(dom, loss, 0.5)
        return {
            "rule": "overlap-impossibility",
            "domains": [lab_io.domain_to_dict(dom)],
            "quantities": {"alpha": 0.5, "gap": gap, "bound": bound, "m0": m0},
            "checks": {"gap_positive": gap > 0, "gap_above_bound": gap >= bound - 1e-12},
            "valid": gap > 0 and gap >= bound - 1e-12,
            "verdict": "linear condition under risk fails",
            "extra": {},
        }
    X = D.X if D is not None else None
    R = config.load_rankers(X)
    if kind == "auc-split":
        return certificate_to_dict(auc_unrealizable_split(R, X))
    if kind == "dirac-auc":
        if D is None or len(config.points) != 2:
            raise LabFileError("dirac-auc needs a 'domain' and two 'points'")
        return certificate_to_dict(dirac_auc_overlap_pair(D.id_part, config.points[0], config.points[1], R, D.X))
    raise LabFileError(f"unknown counterexample kind {kind!r}")
