
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarse_cancel.errors import InvalidInput
from coarse_cancel.grouptheory import (
    AmalgamData,
    GroupTable,
    automorphism_group,
    automorphisms,
    bass_serre_ball,
    group_exponent,
    has_involution,
    holomorph,
    is_proper_power,
    malnormality_check,
)

import oracles


@pytest.mark.parametrize("n", [1, 2, 3, 5, 7])
def test_holomorph_exponent_matches_affine_oracle(n):
    G = GroupTable.cyclic(n) if n > 1 else GroupTable.trivial()
    assert group_exponent(holomorph(G)) == oracles.affine_holomorph_exponent(n)


def test_affine_oracle_frozen_values():
    assert [oracles.affine_holomorph_exponent(n) for n in (1, 2, 3, 5, 7)] == [1, 2, 6, 20, 42]


@pytest.mark.parametrize("n,count", [(2, 1), (3, 2), (5, 4), (8, 4), (12, 4)])
def test_cyclic_automorphism_counts_are_euler_phi(n, count):
    assert len(automorphisms(GroupTable.cyclic(n))) == count


def test_s3_automorphisms_are_inner():
    S3 = GroupTable.symmetric(3)
    assert len(automorphisms(S3)) == 6
    assert len(automorphism_group(S3)) == 6
    assert len(holomorph(S3)) == 36


def test_klein_four_automorphisms():
    V = GroupTable.direct_product(GroupTable.cyclic(2), GroupTable.cyclic(2))
    assert len(automorphisms(V)) == 6
    assert has_involution(V)
    assert not has_involution(GroupTable.cyclic(5))


def test_automorphisms_fix_identity_and_respect_table():
    G = GroupTable.direct_product(GroupTable.cyclic(2), GroupTable.cyclic(4))
    for phi in automorphisms(G):
        p = np.array(phi)
        assert p[G.identity] == G.identity
        assert np.array_equal(p[G.mult], G.mult[np.ix_(p, p)])


def test_malnormality():
    S3 = GroupTable.symmetric(3)
    involution = next(a for a in range(6) if S3.element_order(a) == 2)
    three = next(a for a in range(6) if S3.element_order(a) == 3)
    assert malnormality_check(S3, [S3.elements[S3.identity], S3.elements[involution]])
    assert not malnormality_check(S3, [S3.elements[x] for x in S3.closure([three])])
    with pytest.raises(InvalidInput):
        malnormality_check(S3, [S3.elements[involution]])


def test_bad_tables_rejected():
    with pytest.raises(InvalidInput):
        GroupTable(["e", "a"], [[0, 1], [1, 1]])
    with pytest.raises(InvalidInput):
        GroupTable(["e", "a"], [[0, 1]])


def test_amalgam_over_whole_factor_rejected():
    Z3 = GroupTable.cyclic(3)
    with pytest.raises(InvalidInput, match="collapses"):
        AmalgamData(Z3, GroupTable.cyclic(6), Z3, list(Z3.elements),
                    [GroupTable.cyclic(6).elements[k] for k in (0, 2, 4)])


def test_free_product_normal_forms():
    data = AmalgamData.free_product(3, 5)
    nf = data.normal_form("abab")
    assert nf.length == 4 and data.cyclic_length(nf) == 4
    assert data.normal_form("aaa").length == 0
    assert data.normal_form("aAbB").length == 0
    assert data.cyclic_length(data.normal_form("abA")) == 1


@given(st.lists(st.sampled_from("aAbB"), max_size=10), st.lists(st.sampled_from("aAbB"), max_size=10))
@settings(max_examples=60, deadline=None)
def test_normal_form_multiplication_is_concatenation(u, v):
    data = AmalgamData.free_product(3, 5)
    nu, nv = data.normal_form(u), data.normal_form(v)
    assert data.multiply(nu, nv) == data.normal_form(u + v)
    assert data.multiply(nu, data.inverse(nu)) == data.identity


@given(st.lists(st.sampled_from("aAbB"), max_size=8))
@settings(max_examples=60, deadline=None)
def test_cyclic_length_matches_syllable_oracle(word):
    data = AmalgamData.free_product(3, 5)
    expected = oracles.syllable_translation_length("".join(word), 3, 5)
    got = data.cyclic_length(data.normal_form(word))
    assert (got if got >= 2 else 0) == expected


def test_proper_powers():
    data = AmalgamData.free_product(3, 5)
    found = is_proper_power(data, "abab", 4)
    assert found is not None and found.k == 2 and found.root_word == "ab"
    assert is_proper_power(data, "abb", 4) is None


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_element_count_by_syllable_length(k):
    # alternating syllables from Z/3 \ {0} and Z/5 \ {0}: 2 starting factors, sizes 2 and 4
    expected = 1
    for j in range(1, k + 1):
        for first in (2, 4):
            sizes = [first if i % 2 == 0 else 6 - first for i in range(j)]
            expected += int(np.prod(sizes))
    assert len(AmalgamData.free_product(3, 5).elements_up_to(k)) == expected


def test_bass_serre_ball_is_a_tree():
    vertices, edges = bass_serre_ball(AmalgamData.free_product(3, 5), 3)
    assert len(edges) == len(vertices) - 1
    degrees = {}
    for u, v in edges:
        degrees[u] = degrees.get(u, 0) + 1
        degrees[v] = degrees.get(v, 0) + 1
    assert max(degrees.values()) == 5
