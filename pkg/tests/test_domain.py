import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gen import random_domain
from oodlab.domain import (
    DomainSpaceSpec,
    FeatureSpace,
    FiniteDomain,
    IdJoint,
    OodMarginal,
    check_density_bounds,
    id_equivalence_key,
    is_separate,
    mix_alpha,
    overlap_set,
    sample_id,
)
from oodlab.errors import DomainParameterError

X4 = FeatureSpace.line(range(4))


def dom(id_part, ood_part, pi=0.5, X=X4):
    return FiniteDomain(X, id_part, ood_part, pi)


class TestFeatureSpace:
    def test_d0_computed_eagerly(self):
        X = FeatureSpace([[0, 0], [3, 4], [0, 1]])
        assert X.d0 == 1.0
        assert X.size == 3 and X.dim == 2

    def test_duplicate_points_rejected(self):
        with pytest.raises(DomainParameterError):
            FeatureSpace.line([0, 1, 1])

    def test_empty_rejected(self):
        with pytest.raises(DomainParameterError):
            FeatureSpace(np.zeros((0, 1)))

    def test_single_point_has_infinite_d0(self):
        assert FeatureSpace.line([2.0]).d0 == float("inf")


class TestParts:
    def test_mass_must_sum_to_one(self):
        with pytest.raises(DomainParameterError):
            IdJoint(np.array([[0.5], [0.4]]))
        with pytest.raises(DomainParameterError):
            OodMarginal(np.array([0.5, 0.6]))

    def test_negative_mass_rejected(self):
        with pytest.raises(DomainParameterError):
            OodMarginal(np.array([1.5, -0.5]))

    def test_pi_out_range(self):
        with pytest.raises(DomainParameterError):
            dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 1), 1.0)


class TestMixAlpha:
    D = dom(IdJoint.from_atoms(4, 1, [(0, 1, 0.5), (1, 1, 0.5)]), OodMarginal.dirac(4, 2), 0.3)

    def test_alpha_zero_keeps_parts(self):
        E = mix_alpha(self.D, 0.0)
        assert E.pi_out == 0.0
        assert E.id_part == self.D.id_part and E.ood_part == self.D.ood_part

    def test_midpoint_joint(self):
        E = mix_alpha(self.D, 0.5)
        J = E.joint()
        assert np.allclose(J[:, 0], 0.5 * self.D.id_part.mass[:, 0], atol=1e-12)
        assert np.allclose(J[:, 1], 0.5 * self.D.ood_marginal, atol=1e-12)

    def test_remix(self):
        a = mix_alpha(mix_alpha(self.D, 0.2), 0.7)
        b = mix_alpha(self.D, 0.7)
        assert a.id_part == b.id_part and a.ood_part == b.ood_part and a.pi_out == b.pi_out

    @pytest.mark.parametrize("alpha", [-0.1, 1.0, 1.5])
    def test_bad_alpha(self, alpha):
        with pytest.raises(DomainParameterError):
            mix_alpha(self.D, alpha)


class TestOverlap:
    def test_disjoint(self):
        D = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 1))
        assert overlap_set(D) == frozenset()
        assert is_separate(D)

    def test_identical(self):
        D = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 0))
        assert overlap_set(D) == {0}
        assert not is_separate(D)

    def test_partial(self):
        D = dom(IdJoint.from_atoms(4, 1, [(0, 1, 0.5), (1, 1, 0.5)]), OodMarginal.dirac(4, 0))
        assert overlap_set(D) == {0}

    def test_shared_middle(self):
        D = dom(IdJoint.from_atoms(4, 1, [(0, 1, 0.5), (1, 1, 0.5)]), OodMarginal.uniform(4, [1, 2]))
        assert not is_separate(D)


class TestDensity:
    def test_disjoint_halves_uniform(self):
        D = dom(IdJoint.from_atoms(4, 1, [(0, 1, 0.5), (1, 1, 0.5)]), OodMarginal.uniform(4, [2, 3]))
        assert check_density_bounds(D, np.full(4, 0.25), 2)

    def test_dirac_exceeds_bound(self):
        D = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 0))
        assert not check_density_bounds(D, np.full(4, 0.25), 2)

    def test_b_one_exact(self):
        D = dom(IdJoint.from_atoms(4, 1, [(0, 1, 0.5), (1, 1, 0.5)]), OodMarginal.uniform(4, [2, 3]))
        assert check_density_bounds(D, 0.5 * D.id_marginal + 0.5 * D.ood_marginal, 1)

    def test_mass_off_base_support(self):
        D = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 3))
        assert not check_density_bounds(D, np.array([0.5, 0.5, 0, 0]), 4)


class TestSampling:
    def test_point_mass(self):
        D = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 1))
        assert sample_id(D, 3, seed=7) == [(0, 1)] * 3

    def test_seeded(self):
        D = dom(IdJoint.from_atoms(4, 2, [(0, 1, 0.5), (1, 2, 0.5)]), OodMarginal.dirac(4, 3))
        assert sample_id(D, 50, 11) == sample_id(D, 50, 11)

    def test_frequencies(self):
        D = dom(IdJoint.from_atoms(4, 2, [(0, 1, 0.5), (1, 2, 0.5)]), OodMarginal.dirac(4, 3))
        s = sample_id(D, 10_000, 0)
        assert abs(sum(1 for a in s if a == (0, 1)) / len(s) - 0.5) < 0.05
        assert set(s) == {(0, 1), (1, 2)}


class TestEquivalenceKey:
    def test_mix_invariant(self):
        D = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 1))
        assert id_equivalence_key(D) == id_equivalence_key(mix_alpha(D, 0.9))

    def test_label_matters(self):
        a = dom(IdJoint.dirac(4, 2, 0, 1), OodMarginal.dirac(4, 1))
        b = dom(IdJoint.dirac(4, 2, 0, 2), OodMarginal.dirac(4, 1))
        assert id_equivalence_key(a) != id_equivalence_key(b)

    def test_atom_order_irrelevant(self):
        a = IdJoint.from_atoms(4, 1, [(0, 1, 0.25), (2, 1, 0.75)])
        b = IdJoint.from_atoms(4, 1, [(2, 1, 0.75), (0, 1, 0.25)])
        o = OodMarginal.dirac(4, 1)
        assert id_equivalence_key(dom(a, o)) == id_equivalence_key(dom(b, o, 0.1))


class TestDomainSpaceSpec:
    def test_density_needs_b(self):
        with pytest.raises(DomainParameterError):
            DomainSpaceSpec("density", base=np.ones(4), b=0.5)

    def test_finite_id_duplicates(self):
        p = IdJoint.dirac(4, 1, 0, 1)
        with pytest.raises(DomainParameterError):
            DomainSpaceSpec("finite_id", id_parts=(p, p))

    def test_member_must_belong(self):
        D = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 0))
        with pytest.raises(DomainParameterError):
            DomainSpaceSpec("separate", members=(D,))

    def test_classes_group_by_id_part(self):
        a = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 1))
        b = dom(IdJoint.dirac(4, 1, 0, 1), OodMarginal.dirac(4, 2))
        c = dom(IdJoint.dirac(4, 1, 3, 1), OodMarginal.dirac(4, 2))
        spec = DomainSpaceSpec("separate", members=(a, b, c))
        assert [len(g) for g in spec.equivalence_classes()] == [2, 1]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.1, 0.5, 0.9]))
def test_mixture_marginal_is_affine(seed, alpha):
    D = random_domain(np.random.default_rng(seed), 5, K=2)
    E = mix_alpha(D, alpha)
    assert np.allclose(E.marginal(), (1 - alpha) * D.id_marginal + alpha * D.ood_marginal, atol=1e-12)
    assert id_equivalence_key(E) == id_equivalence_key(D)
    assert (overlap_set(D) == frozenset()) == is_separate(D)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_prior_unknown_closure(seed):
    rng = np.random.default_rng(seed)
    D = random_domain(rng, 5, separate=True)
    base = 0.5 * D.id_marginal + 0.5 * D.ood_marginal
    specs = [
        DomainSpaceSpec("total", members=(D,)),
        DomainSpaceSpec("separate", members=(D,)),
        DomainSpaceSpec("finite_id", members=(D,), id_parts=(D.id_part,)),
        DomainSpaceSpec("density", members=(D,), base=base, b=1),
    ]
    for spec in specs:
        assert spec.prior_unknown
        for a in np.arange(10) / 10:
            assert spec.contains(mix_alpha(D, float(a)))
