"""Finite feature spaces, ID/OOD distributions and domain spaces.

Every measure in the lab is a finite discrete distribution over the points of
a :class:`FeatureSpace`. The counting measure is the reference measure, so a
density is a plain mass lookup and every support computation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainParameterError

TOL = 1e-12

KINDS = ("single", "total", "separate", "finite_id", "density")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FeatureSpace:
    """Ordered, duplicate-free point cloud in R^d.

    ``d0`` (the minimum pairwise Euclidean distance) is computed eagerly; the
    nearest-neighbour learner needs it. For a single point ``d0`` is ``inf``.
    """

    coords: np.ndarray
    d0: float = field(init=False)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] == 0 or coords.shape[1] == 0:
            raise DomainParameterError("feature space needs a non-empty (m, d) point array")
        if not np.all(np.isfinite(coords)):
            raise DomainParameterError("feature space coordinates must be finite")
        dist = _pairwise(coords)
        m = coords.shape[0]
        if m > 1:
            off = dist[~np.eye(m, dtype=bool)]
            d0 = float(off.min())
            if d0 <= 0.0:
                raise DomainParameterError("feature space points must be distinct")
        else:
            d0 = float("inf")
        coords.setflags(write=False)
        dist.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "_dist", dist)

    @classmethod
    def line(cls, values: Iterable[float]) -> "FeatureSpace":
        return cls(np.asarray(list(values), dtype=float)[:, None])

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def distances(self) -> np.ndarray:
        return self._dist

    def __len__(self):
        return self.size

    def __eq__(self, other):
        return isinstance(other, FeatureSpace) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())


def _pairwise(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def _check_total(mass: np.ndarray, what: str):
    if np.any(mass < 0) or not np.all(np.isfinite(mass)):
        raise DomainParameterError(f"{what} masses must be finite and nonnegative")
    total = float(mass.sum())
    if abs(total - 1.0) > TOL:
        raise DomainParameterError(f"{what} masses sum to {total!r}, expected 1")


@dataclass(frozen=True, eq=False)
class IdJoint:
    """ID joint distribution stored as a dense ``(m, K)`` mass table.

    ``mass[i, y-1]`` is the probability of point ``i`` with ID label ``y``.
    """

    mass: np.ndarray

    def __post_init__(self):
        mass = _frozen(self.mass)
        if mass.ndim != 2 or mass.shape[1] < 1:
            raise DomainParameterError("ID mass table must be (m, K) with K >= 1")
        _check_total(mass, "ID")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_atoms(cls, m: int, K: int, atoms: Iterable[tuple[int, int, float]]) -> "IdJoint":
        table = np.zeros((m, K))
        for i, y, p in atoms:
            if not 1 <= y <= K:
                raise DomainParameterError(f"ID label {y} outside 1..{K}")
            table[i, y - 1] += p
        return cls(table)

    @classmethod
    def dirac(cls, m: int, K: int, point: int, label: int) -> "IdJoint":
        return cls.from_atoms(m, K, [(point, label, 1.0)])

    @property
    def K(self) -> int:
        return self.mass.shape[1]

    @property
    def marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    def __eq__(self, other):
        return (
            isinstance(other, IdJoint)
            and self.mass.shape == other.mass.shape
            and bool(np.all(np.abs(self.mass - other.mass) <= TOL))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class OodMarginal:
    """OOD marginal over points; the label is implicitly K+1."""

    mass: np.ndarray

    def __post_init__(self):
        mass = _frozen(self.mass)
        if mass.ndim != 1:
            raise DomainParameterError("OOD mass must be a vector")
        _check_total(mass, "OOD")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_atoms(cls, m: int, atoms: Iterable[tuple[int, float]]) -> "OodMarginal":
        vec = np.zeros(m)
        for i, p in atoms:
            vec[i] += p
        return cls(vec)

    @classmethod
    def dirac(cls, m: int, point: int) -> "OodMarginal":
        return cls.from_atoms(m, [(point, 1.0)])

    @classmethod
    def uniform(cls, m: int, points: Sequence[int]) -> "OodMarginal":
        points = list(points)
        return cls.from_atoms(m, [(i, 1.0 / len(points)) for i in points])

    def __eq__(self, other):
        return (
            isinstance(other, OodMarginal)
            and self.mass.shape == other.mass.shape
            and bool(np.all(np.abs(self.mass - other.mass) <= TOL))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FiniteDomain:
    """``(1 - pi_out) * ID joint + pi_out * OOD joint`` over a finite space."""

    X: FeatureSpace
    id_part: IdJoint
    ood_part: OodMarginal
    pi_out: float

    def __post_init__(self):
        if not 0.0 <= self.pi_out < 1.0:
            raise DomainParameterError(f"pi_out must lie in [0, 1), got {self.pi_out}")
        m = self.X.size
        if self.id_part.mass.shape[0] != m or self.ood_part.mass.shape[0] != m:
            raise DomainParameterError("distribution sizes do not match the feature space")
        object.__setattr__(self, "pi_out", float(self.pi_out))

    @property
    def K(self) -> int:
        return self.id_part.K

    @property
    def id_marginal(self) -> np.ndarray:
        return self.id_part.marginal

    @property
    def ood_marginal(self) -> np.ndarray:
        return self.ood_part.mass

    def joint(self) -> np.ndarray:
        """Joint mass table of shape ``(m, K+1)``; the last column is OOD."""
        out = np.empty((self.X.size, self.K + 1))
        out[:, : self.K] = (1.0 - self.pi_out) * self.id_part.mass
        out[:, self.K] = self.pi_out * self.ood_part.mass
        return out

    def marginal(self) -> np.ndarray:
        return (1.0 - self.pi_out) * self.id_marginal + self.pi_out * self.ood_marginal

    def with_parts(self, id_part: IdJoint | None = None, ood_part: OodMarginal | None = None) -> "FiniteDomain":
        return FiniteDomain(
            self.X,
            self.id_part if id_part is None else id_part,
            self.ood_part if ood_part is None else ood_part,
            self.pi_out,
        )


def mix_alpha(domain: FiniteDomain, alpha: float) -> FiniteDomain:
    """Re-mix the same ID and OOD parts with OOD prior ``alpha``."""
    if not 0.0 <= alpha < 1.0:
        raise DomainParameterError(f"alpha must lie in [0, 1), got {alpha}")
    return FiniteDomain(domain.X, domain.id_part, domain.ood_part, alpha)


def overlap_set(domain: FiniteDomain) -> frozenset[int]:
    both = (domain.id_marginal > 0) & (domain.ood_marginal > 0)
    return frozenset(int(i) for i in np.flatnonzero(both))


def is_separate(domain: FiniteDomain) -> bool:
    return not overlap_set(domain)


def check_density_bounds(domain: FiniteDomain, base, b: float) -> bool:
    """Whether the balanced ID/OOD mixture has density in ``[1/b, b]`` w.r.t. ``base``.

    Mass outside the support of ``base`` makes the density undefined, which is
    reported as a violation.
    """
    base = np.asarray(base, dtype=float)
    if b < 1:
        raise DomainParameterError("density bound b must be >= 1")
    if base.shape != (domain.X.size,) or np.any(base < 0):
        raise DomainParameterError("base weights must be a nonnegative vector over X")
    mix = 0.5 * domain.id_marginal + 0.5 * domain.ood_marginal
    on = base > 0
    if np.any(mix[~on] > 0):
        return False
    f = mix[on] / base[on]
    return bool(np.all(f >= 1.0 / b - TOL) and np.all(f <= b + TOL))


def sample_id(domain: FiniteDomain, n: int, seed: int) -> list[tuple[int, int]]:
    """Draw ``n`` i.i.d. ``(point, label)`` pairs from the ID joint."""
    if n < 1:
        raise DomainParameterError("sample size must be >= 1")
    flat = domain.id_part.mass.ravel()
    rng = np.random.default_rng(seed)
    idx = rng.choice(flat.size, size=n, p=flat / flat.sum())
    K = domain.K
    return [(int(j // K), int(j % K) + 1) for j in idx]


def id_equivalence_key(domain: FiniteDomain) -> tuple:
    """Canonical encoding of the ID joint: sorted ``(point, label, p)`` rounded to 12 places."""
    mass = domain.id_part.mass
    items = []
    for i, y in zip(*np.nonzero(mass)):
        p = round(float(mass[i, y]), 12)
        if p > 0:
            items.append((int(i), int(y) + 1, p))
    return (domain.K, tuple(sorted(items)))


@dataclass(frozen=True, eq=False)
class DomainSpaceSpec:
    """One of the five domain-space families plus an explicit member list.

    ``members`` is what enumerable checks iterate over; ``contains`` is the
    family's membership predicate.
    """

    kind: str
    members: tuple[FiniteDomain, ...] = ()
    id_parts: tuple[IdJoint, ...] = ()
    base: np.ndarray | None = None
    b: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainParameterError(f"unknown domain-space kind {self.kind!r}")
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "id_parts", tuple(self.id_parts))
        if self.kind == "density":
            if self.b is None or self.b < 1:
                raise DomainParameterError("density-based space needs b >= 1")
            if self.base is None:
                raise DomainParameterError("density-based space needs base weights")
            base = _frozen(self.base)
            if np.any(base < 0) or not np.any(base > 0):
                raise DomainParameterError("base weights must be nonnegative with non-empty support")
            object.__setattr__(self, "base", base)
        if self.kind == "finite_id":
            if not self.id_parts:
                raise DomainParameterError("finite-ID space needs at least one ID joint")
            for i, a in enumerate(self.id_parts):
                for c in self.id_parts[i + 1 :]:
                    if a == c:
                        raise DomainParameterError("finite-ID list contains duplicates")
        if self.kind == "single" and len(self.members) != 1:
            raise DomainParameterError("single-distribution space has exactly one member")
        for k, d in enumerate(self.members):
            if not self.contains(d):
                raise DomainParameterError(f"member {k} is not in the {self.kind} space")

    @property
    def prior_unknown(self) -> bool:
        return self.kind != "single"

    def contains(self, domain: FiniteDomain) -> bool:
        if self.kind == "single":
            d = self.members[0]
            return (
                domain.id_part == d.id_part
                and domain.ood_part == d.ood_part
                and abs(domain.pi_out - d.pi_out) <= TOL
            )
        if self.kind == "total":
            return True
        if self.kind == "separate":
            return is_separate(domain)
        if self.kind == "finite_id":
            return any(domain.id_part == p for p in self.id_parts)
        return check_density_bounds(domain, self.base, self.b)

    def extended(self, domains: Iterable[FiniteDomain]) -> "DomainSpaceSpec":
        return DomainSpaceSpec(self.kind, self.members + tuple(domains), self.id_parts, self.base, self.b)

    def equivalence_classes(self) -> list[list[FiniteDomain]]:
        """Members grouped by ID consistency, in first-seen order."""
        groups: dict[tuple, list[FiniteDomain]] = {}
        for d in self.members:
            groups.setdefault(id_equivalence_key(d), []).append(d)
        return list(groups.values())
