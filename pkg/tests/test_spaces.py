import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oodlab.auc import RankingSpace, linear_rankers_1d
from oodlab.errors import LabelRangeError, SpaceSizeError
from oodlab.spaces import (
    Hypothesis,
    HypothesisSpace,
    all_binary,
    bullet_compose,
    check_constant_closure,
    check_separate_assumption,
    check_separate_ranking,
    exhaustive_space,
    natarajan_dimension,
    phi_project,
    sauer_bound,
    threshold_space,
    vc_dimension,
)


def test_members_deduplicated_and_ranged():
    H = HypothesisSpace([[1, 2], [1, 2], [2, 1]], 1)
    assert len(H) == 2
    with pytest.raises(LabelRangeError):
        HypothesisSpace([[1, 3]], 1)


class TestPhi:
    def test_constants_k2(self):
        H = HypothesisSpace([[1, 1], [2, 2], [3, 3]], 2)
        P = phi_project(H)
        assert len(P) == 2 and P.K == 1

    def test_reject_only(self):
        P = phi_project(HypothesisSpace([[3, 3]], 2))
        assert P.members.tolist() == [[2, 2]]

    def test_exhaustive(self):
        assert len(phi_project(exhaustive_space(2, 2))) == 4


class TestCompose:
    H_in = HypothesisSpace([[1, 2], [2, 2]], 2)

    def test_accept_all(self):
        C = bullet_compose(self.H_in, HypothesisSpace([[1, 1]], 1))
        assert set(map(tuple, C.members.tolist())) == set(map(tuple, self.H_in.members.tolist()))

    def test_reject_all(self):
        C = bullet_compose(self.H_in, HypothesisSpace([[2, 2]], 1))
        assert C.members.tolist() == [[3, 3]]

    def test_against_enumeration(self):
        Hb = all_binary(2)
        C = bullet_compose(self.H_in, Hb)
        direct = {tuple(a if b == 1 else 3 for a, b in zip(hi, hb)) for hi in self.H_in.members.tolist() for hb in Hb.members.tolist()}
        assert set(map(tuple, C.members.tolist())) == direct
        assert len(C) <= 8
        assert C.provenance == "composed"

    def test_label_mismatch(self):
        with pytest.raises(LabelRangeError):
            bullet_compose(HypothesisSpace([[3, 1]], 2), all_binary(2))


@pytest.mark.parametrize("m,K,n", [(1, 1, 2), (3, 1, 8), (2, 2, 9)])
def test_exhaustive_sizes(m, K, n):
    assert len(exhaustive_space(m, K)) == n


def test_exhaustive_cap():
    with pytest.raises(SpaceSizeError):
        exhaustive_space(24, 1)


class TestDimensions:
    def test_vc_full(self):
        for m in range(1, 6):
            assert vc_dimension(all_binary(m)) == m

    def test_vc_singleton(self):
        assert vc_dimension(HypothesisSpace([[1, 2, 1]], 1)) == 0

    def test_vc_thresholds(self):
        assert vc_dimension(threshold_space([0.0, 1.0, 2.0])) == 1

    def test_vc_needs_binary(self):
        with pytest.raises(LabelRangeError):
            vc_dimension(exhaustive_space(2, 2))

    def test_natarajan(self):
        assert natarajan_dimension(threshold_space([0.0, 1.0, 2.0])) == 1
        for m in range(1, 4):
            assert natarajan_dimension(exhaustive_space(m, 2)) == m
        assert natarajan_dimension(HypothesisSpace([[3, 1, 2]], 2)) == 0

    def test_natarajan_needs_two_functions(self):
        # labels 1/2/3 at one point, but no two members differ at both points
        H = HypothesisSpace([[1, 1], [2, 1], [3, 1]], 2)
        assert natarajan_dimension(H) == 1


@pytest.mark.parametrize("v,m,expect", [(0, 5, 1), (2, 4, 16), (7, 3, 16), (4, 3, 16)])
def test_sauer_bound(v, m, expect):
    assert sauer_bound(v, m) == expect


def test_separate_assumption():
    assert check_separate_assumption(HypothesisSpace([[1, 2], [2, 2]], 1))
    assert not check_separate_assumption(HypothesisSpace([[1, 1]], 1))
    assert check_separate_assumption(exhaustive_space(3, 2))


def test_separate_ranking():
    iso = RankingSpace(1 - np.eye(3))
    assert check_separate_ranking(iso)
    assert not check_separate_ranking(RankingSpace([[1, 1, 1], [2, 2, 2]]))
    assert not check_separate_ranking(linear_rankers_1d([0.0, 1.0, 2.0]))


def test_constant_closure():
    R = RankingSpace([[0, 0, 0], [1, 1, 1], [0, 1, 2]])
    assert check_constant_closure(R, [0.0, 1.0])
    assert not check_constant_closure(RankingSpace([[0, 1, 2]]), [0.0])
    assert check_constant_closure(RankingSpace([[0, 1, 2]]), [])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dimension_properties(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    H = HypothesisSpace(rng.integers(1, 4, size=(int(rng.integers(1, 20)), m)), 2)
    P = phi_project(H)
    v = vc_dimension(P)
    assert v <= math.log2(len(P))
    assert natarajan_dimension(H) <= m
    B = HypothesisSpace(rng.integers(1, 3, size=(int(rng.integers(1, 20)), m)), 1)
    assert natarajan_dimension(B) == vc_dimension(B)
    assert vc_dimension(phi_project(B.union(B))) <= vc_dimension(B)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_compose_with_exhaustive_binary_gives_all_patterns(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 5))
    H_in = HypothesisSpace(rng.integers(1, 3, size=(3, m)), 2)
    C = bullet_compose(H_in, all_binary(m))
    assert len(phi_project(C)) == 2**m
