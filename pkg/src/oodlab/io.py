"""JSON/CSV persistence for domains, spaces, networks, losses and results."""

from __future__ import annotations

import csv
import io
import json
import warnings
from pathlib import Path
from typing import Any

import numpy as np

from .auc import RankingSpace, linear_rankers_1d, order_type_space
from .domain import DomainSpaceSpec, FeatureSpace, FiniteDomain, IdJoint, OodMarginal, id_equivalence_key
from .errors import LabFileError
from .fcnn import ReluNetwork
from .loss import LossTable
from .spaces import HypothesisSpace, exhaustive_space

LOAD_TOL = 1e-9


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise LabFileError(f"{path}: {e.strerror}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise LabFileError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def to_jsonable(obj):
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, FiniteDomain):
        return domain_to_dict(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _renormalize(total: float, what: str, where: str) -> float:
    if abs(total - 1.0) > LOAD_TOL:
        raise LabFileError(f"{where}: {what} masses sum to {total!r}, outside 1e-9 of 1")
    if abs(total - 1.0) > 1e-12:
        warnings.warn(f"{where}: {what} masses sum to {total!r}; renormalised", stacklevel=3)
    return total


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise LabFileError(f"{where}: missing field {key!r}")
    return d[key]


# domains


def domain_to_dict(D: FiniteDomain) -> dict:
    idm = D.id_part.mass
    return {
        "points": D.X.coords.tolist(),
        "K": D.K,
        "pi_out": D.pi_out,
        "id": [{"point": int(i), "label": int(y) + 1, "p": float(idm[i, y])} for i, y in zip(*np.nonzero(idm))],
        "ood": [{"point": int(i), "p": float(D.ood_marginal[i])} for i in np.flatnonzero(D.ood_marginal)],
    }


def _id_from_atoms(atoms, m: int, K: int, where: str) -> IdJoint:
    table = np.zeros((m, K))
    try:
        for a in atoms:
            table[int(a["point"]), int(a["label"]) - 1] += float(a["p"])
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise LabFileError(f"{where}: bad ID atom ({e})") from e
    total = _renormalize(float(table.sum()), "ID", where)
    return IdJoint(table / total)


def _ood_from_atoms(atoms, m: int, where: str) -> OodMarginal:
    vec = np.zeros(m)
    try:
        for a in atoms:
            vec[int(a["point"])] += float(a["p"])
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise LabFileError(f"{where}: bad OOD atom ({e})") from e
    total = _renormalize(float(vec.sum()), "OOD", where)
    return OodMarginal(vec / total)


def domain_from_dict(d: dict, where: str = "<domain>") -> FiniteDomain:
    X = FeatureSpace(np.asarray(_need(d, "points", where), dtype=float))
    K = int(_need(d, "K", where))
    idj = _id_from_atoms(_need(d, "id", where), X.size, K, where)
    ood = _ood_from_atoms(_need(d, "ood", where), X.size, where)
    return FiniteDomain(X, idj, ood, float(d.get("pi_out", 0.5)))


def load_domain(path) -> FiniteDomain:
    return domain_from_dict(read_json(path), str(path))


def save_domain(D: FiniteDomain, path) -> None:
    write_json(domain_to_dict(D), path)


def spec_from_dict(d: dict, where: str = "<domain space>") -> DomainSpaceSpec:
    kind = _need(d, "kind", where)
    members = tuple(domain_from_dict(m, f"{where} member {k}") for k, m in enumerate(d.get("members", [])))
    id_parts = ()
    if kind == "finite_id":
        if "id_parts" in d:
            m = members[0].X.size if members else len(d["points"])
            K = members[0].K if members else int(d["K"])
            id_parts = tuple(_id_from_atoms(p, m, K, where) for p in d["id_parts"])
        else:
            seen = {}
            for D in members:
                seen.setdefault(id_equivalence_key(D), D.id_part)
            id_parts = tuple(seen.values())
    return DomainSpaceSpec(kind, members, id_parts, d.get("base"), d.get("b"))


def spec_to_dict(spec: DomainSpaceSpec) -> dict:
    out = {"kind": spec.kind, "members": [domain_to_dict(D) for D in spec.members]}
    if spec.base is not None:
        out["base"] = spec.base.tolist()
        out["b"] = spec.b
    return out


def load_spec(path) -> DomainSpaceSpec:
    return spec_from_dict(read_json(path), str(path))


# spaces


def space_from_dict(d: dict, m: int | None = None, where: str = "<space>") -> HypothesisSpace:
    K = int(_need(d, "K", where))
    if d.get("exhaustive"):
        size = int(d.get("m", m if m is not None else 0))
        return exhaustive_space(size, K)
    return HypothesisSpace(_need(d, "members", where), K, d.get("provenance", "explicit"))


def space_to_dict(H: HypothesisSpace) -> dict:
    return {"K": H.K, "members": H.members.tolist(), "provenance": H.provenance}


def rankers_from_dict(d: dict, X: FeatureSpace | None = None, where: str = "<rankers>") -> RankingSpace:
    if "order_types" in d:
        return order_type_space(int(d["order_types"]))
    if d.get("linear_1d"):
        if X is None or X.dim != 1:
            raise LabFileError(f"{where}: linear_1d rankers need a 1-D feature space")
        return linear_rankers_1d(X.coords[:, 0])
    return RankingSpace(_need(d, "rankers", where), d.get("provenance", "explicit"))


def rankers_to_dict(R: RankingSpace) -> dict:
    return {"rankers": R.scores.tolist(), "provenance": R.provenance}


# networks and losses


def network_to_dict(net: ReluNetwork) -> dict:
    return {
        "widths": list(net.arch),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def network_from_dict(d: dict, where: str = "<network>") -> ReluNetwork:
    net = ReluNetwork(tuple(_need(d, "weights", where)), tuple(_need(d, "biases", where)))
    if "widths" in d and list(net.arch) != [int(w) for w in d["widths"]]:
        raise LabFileError(f"{where}: widths {d['widths']} do not match weight shapes {list(net.arch)}")
    return net


def loss_from_spec(spec, K: int) -> LossTable:
    if spec is None or spec == "zero-one":
        return LossTable.zero_one(K)
    if isinstance(spec, str):
        raise LabFileError(f"unknown named loss {spec!r}")
    return LossTable(np.asarray(spec, dtype=float))


# tabular output


def fmt_num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if v is None or isinstance(v, (list, tuple, dict)):
        return json.dumps(to_jsonable(v), sort_keys=True)
    return str(v)


def rows_to_csv(rows: list[dict], header: list[str] | None = None) -> str:
    header = header or (list(rows[0].keys()) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_num(r.get(h, "")) for h in header])
    return buf.getvalue()


def rows_to_table(rows: list[dict], header: list[str] | None = None) -> str:
    header = header or (list(rows[0].keys()) if rows else [])
    cells = [[fmt_num(r.get(h, "")) for h in header] for r in rows]
    widths = [max([len(h)] + [len(c[i]) for c in cells]) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"
