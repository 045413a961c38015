import numpy as np
import pytest

from coarse_cancel.action import (
    PartialIsometry,
    ActionWindow,
    acylindricity_table,
    axis,
    characteristic_set,
    classify,
    cylinder,
    displacement_excess,
    find_loxodromic_pair,
    free_subgroup_certificate,
    nerve,
    non_elementary_pair_certificate,
    rotation_window,
    stable_translation_length,
    translation_length,
)
from coarse_cancel.errors import InvalidInput
from coarse_cancel.geodesy import path_quality
from coarse_cancel.grouptheory import AmalgamData, bass_serre_window
from coarse_cancel.metric_core import build_space, cycle_graph

import oracles
from conftest import CORPUS


@pytest.fixture(scope="module")
def z3z5_r6():
    return bass_serre_window(AmalgamData.free_product(3, 5), 6)


@pytest.fixture(scope="module")
def z3z5_mid():
    from coarse_cancel.io import load_window
    space, window, _ = load_window(CORPUS / "windows" / "z3z5_mid.json")
    return space, window


def test_translation_lengths_match_syllable_oracle(z3z5_r6):
    _, window = z3z5_r6
    for word in oracles.all_words("aAbB", 4):
        expected = oracles.syllable_translation_length(word, 3, 5)
        length = translation_length(window, word)
        stable = stable_translation_length(window, word)
        assert length.value == expected, word
        assert stable.value <= length.value + 1e-12
        # delta = 0: the sandwich collapses to equality
        assert length.value <= stable.value + 32 * 0.0 + 1e-12


def test_syllable_oracle_on_known_words():
    assert oracles.syllable_translation_length("ab", 3, 5) == 2
    assert oracles.syllable_translation_length("aaa", 3, 5) == 0
    assert oracles.syllable_translation_length("abA", 3, 5) == 0
    assert oracles.syllable_translation_length("abab", 3, 5) == 4


def test_classification_on_tree(z3z5):
    _, window = z3z5
    assert classify(window, "ab").kind == "LoxodromicEstimate"
    assert not classify(window, "a").loxodromic
    assert not classify(window, "abA").loxodromic
    assert classify(window, "abaA").loxodromic


def test_acylindricity_of_free_product(z3z5):
    _, window = z3z5
    table = dict(acylindricity_table(window, 0.0))
    assert all(count == 1 for d, count in table.items() if d >= 3)
    assert table[0.0] == 5


def test_acylindricity_rejects_negative_l(z3z5):
    with pytest.raises(InvalidInput):
        acylindricity_table(z3z5[1], -1.0)


def test_axis_contains_minimisers(z3z5):
    space, window = z3z5
    disp = window.displacement("ab")
    A = set(axis(window, "ab", 0.0))
    minimisers = {space.points[i] for i in np.flatnonzero(disp == np.nanmin(disp))}
    assert minimisers and minimisers <= A


def test_nerve_is_local_geodesic_on_tree(z3z5):
    space, window = z3z5
    nv = nerve(window, "ab", 0.0)
    assert nv.fundamental_length == 2.0
    assert nv.periods >= 2
    assert path_quality(space, nv.path).l == 0.0


def test_nerve_rejects_elliptic(z3z5):
    with pytest.raises(InvalidInput):
        nerve(z3z5[1], "a", 0.0)


def test_cylinder_outer_approximation(z3z5):
    c = cylinder(z3z5[1], "ab", 0.0)
    assert c.outer_approximation and c.loxodromic
    assert set(axis(z3z5[1], "ab", 0.0)) == set(c.members)


def test_ping_pong_depends_on_base_point(z3z5_mid):
    space, window = z3z5_mid
    assert not free_subgroup_certificate(window, ["ab", "ba"], window.base_point, 0.0).ok
    assert free_subgroup_certificate(window, ["ab", "ba"], "A/~B/#1", 0.0).ok


def test_ping_pong_rejects_trivial_and_repeated(z3z5):
    window = z3z5[1]
    assert not free_subgroup_certificate(window, ["aaa"], window.base_point, 0.0).ok
    assert not free_subgroup_certificate(window, ["ab", "ab"], window.base_point, 0.0).ok
    assert not free_subgroup_certificate(window, [], window.base_point, 0.0).ok


def test_non_elementary_pair_at_edge_midpoint(z3z5_mid):
    _, window = z3z5_mid
    mid = "A/~B/#1"
    # 2(abx|bAx)_x = 1 against min displacement 2 - A
    assert non_elementary_pair_certificate(window, "ab", "ba", mid, 0.0, 0.0).ok
    assert non_elementary_pair_certificate(window, "ab", "ba", mid, 0.5, 0.0).ok
    assert not non_elementary_pair_certificate(window, "ab", "ba", mid, 1.0, 0.0).ok
    assert not non_elementary_pair_certificate(window, "ab", "ba", window.base_point, 0.0, 0.0).ok
    with pytest.raises(InvalidInput):
        non_elementary_pair_certificate(window, "ab", "ba", "A/~B/#1", -1.0, 0.0)


def test_loxodromic_pair_from_two_elliptic_moves(z3z5):
    space, window = z3z5
    pair = find_loxodromic_pair(window, "a", "b", "B/", 0.0)
    if pair is not None:
        assert pair.classification.loxodromic
    assert find_loxodromic_pair(window, "a", "a", "B/", 0.0) is None


def test_characteristic_set_of_finite_factor(z3z5):
    assert characteristic_set(z3z5[1], ["a"], 0.0) == ("A/",)


def test_displacement_excess_is_nonpositive_on_tree(z3z5):
    assert displacement_excess(z3z5[1], "ab", 0.0) <= 1e-9


def test_rotation_of_c6():
    space = build_space(cycle_graph(6))
    window = rotation_window(space)
    assert translation_length(window, "r").value == 1.0
    assert np.all(window.displacement("rrr") == 3.0)
    assert window.is_trivial("rrrrrr")
    assert not classify(window, "r").loxodromic


def test_non_isometry_rejected():
    space = build_space(cycle_graph(6))
    with pytest.raises(InvalidInput, match="isometry"):
        ActionWindow(space, [PartialIsometry("g", {"0": "0", "1": "3"})])
    with pytest.raises(InvalidInput, match="injective"):
        ActionWindow(space, [PartialIsometry("g", {"0": "1", "3": "1"})])
