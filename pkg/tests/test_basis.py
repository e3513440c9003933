import math

import pytest
from hypothesis import given, strategies as st

from topcert.basis import (
    BlockSpec,
    WangIndex,
    WignerIndex,
    block_spec,
    lex_rank,
    level_dim,
    wang_expansion,
    wang_kp_pairs,
)


def enumerate_triples(level_max):
    """Independent enumeration oracle for the lexicographic rank."""
    out = []
    for l in range(level_max + 1):
        for tau in range(-l, l + 1):
            for m in range(-l, l + 1):
                out.append((l, tau, m))
    return out


class TestLexRank:
    def test_first_elements(self):
        assert lex_rank(0, 0, 0) == 0
        assert lex_rank(1, -1, -1) == 1

    def test_enumeration_value(self):
        triples = enumerate_triples(1)
        assert triples.index((1, 1, 1)) == 9
        assert lex_rank(1, 1, 1) == 9

    def test_matches_enumeration(self):
        triples = enumerate_triples(4)
        for rank, t in enumerate(triples):
            assert lex_rank(*t) == rank

    @given(st.integers(0, 6), st.integers(0, 6),
           st.data())
    def test_order_preserving(self, l1, l2, data):
        t1 = data.draw(st.integers(-l1, l1))
        m1 = data.draw(st.integers(-l1, l1))
        t2 = data.draw(st.integers(-l2, l2))
        m2 = data.draw(st.integers(-l2, l2))
        a, b = (l1, t1, m1), (l2, t2, m2)
        if a < b:
            assert lex_rank(*a) < lex_rank(*b)
        elif a > b:
            assert lex_rank(*a) > lex_rank(*b)
        else:
            assert lex_rank(*a) == lex_rank(*b)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            lex_rank(1, 2, 0)
        with pytest.raises(ValueError):
            lex_rank(1, 0, -2)


class TestIndices:
    def test_wigner_validation(self):
        WignerIndex(2, -2, 1)
        with pytest.raises(ValueError):
            WignerIndex(1, 2, 0)
        with pytest.raises(ValueError):
            WignerIndex(-1, 0, 0)

    def test_wang_validation(self):
        WangIndex(2, 1, -2, 1)
        with pytest.raises(ValueError):
            WangIndex(1, 0, 0, 1)  # k = 0 forces p = 0
        with pytest.raises(ValueError):
            WangIndex(1, -1, 0, 0)
        with pytest.raises(ValueError):
            WangIndex(1, 1, 0, 2)

    def test_kp_count_matches_wigner(self):
        for j in range(6):
            assert len(wang_kp_pairs(j)) == 2 * j + 1


class TestWangExpansion:
    def test_k0_trivial(self):
        terms = wang_expansion(WangIndex(1, 0, 0, 0))
        assert terms == [(WignerIndex(1, 0, 0), 1.0 + 0.0j)]

    def test_unit_norm(self):
        for j in range(4):
            for k in range(j + 1):
                for p in (0, 1):
                    if k == 0 and p == 1:
                        continue
                    terms = wang_expansion(WangIndex(j, k, 0, p))
                    assert sum(abs(c) ** 2 for _, c in terms) == pytest.approx(1.0)

    def test_even_k_signs(self):
        # for even k the relative sign is (-1)**p as in the plain symmetric
        # combination; odd k carries the extra alternating sign
        r = 1 / math.sqrt(2)
        terms = dict(wang_expansion(WangIndex(2, 2, 1, 0)))
        assert terms[WignerIndex(2, 2, 1)] == pytest.approx(r)
        assert terms[WignerIndex(2, -2, 1)] == pytest.approx(r)
        terms = dict(wang_expansion(WangIndex(2, 2, 1, 1)))
        assert terms[WignerIndex(2, -2, 1)] == pytest.approx(-r)

    def test_odd_k_signs(self):
        r = 1 / math.sqrt(2)
        terms = dict(wang_expansion(WangIndex(1, 1, 0, 0)))
        assert terms[WignerIndex(1, -1, 0)] == pytest.approx(-r)
        terms = dict(wang_expansion(WangIndex(1, 1, 0, 1)))
        assert terms[WignerIndex(1, -1, 0)] == pytest.approx(r)


class TestBlockSpec:
    @pytest.mark.parametrize("j,dim", [(0, 10), (1, 34), (2, 74)])
    def test_dimensions(self, j, dim):
        assert block_spec(j).dimension == dim
        assert level_dim(j) + level_dim(j + 1) == dim

    def test_members_cover_two_levels(self):
        bs = block_spec(2)
        levels = {t[0] for t in bs.members}
        assert levels == {2, 3}
        assert len(bs.members) == bs.dimension
        assert list(bs.members) == sorted(bs.members)

    def test_consecutive_blocks_overlap(self):
        for j in range(4):
            assert block_spec(j).index_set() & block_spec(j + 1).index_set()

    def test_distant_blocks_disjoint(self):
        for j in range(3):
            for j2 in range(j + 2, j + 5):
                assert not (block_spec(j).index_set() & block_spec(j2).index_set())

    def test_is_frozen(self):
        bs = block_spec(0)
        assert isinstance(bs, BlockSpec)
        with pytest.raises(AttributeError):
            bs.j = 3
