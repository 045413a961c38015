import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarse_cancel.errors import InvalidInput
from coarse_cancel.metric_core import (
    FiniteMetricSpace,
    GraphSpec,
    build_space,
    cycle_graph,
    four_point_defect,
    gromov_product,
    grid_graph,
    hyperbolicity_delta,
    metric_axiom_defects,
    path_graph,
    random_tree,
    verify_four_point_forms,
    verify_metric_inequalities,
)

import oracles
from conftest import DELTA_GOLDEN


@pytest.mark.parametrize("name", sorted(DELTA_GOLDEN))
def test_corpus_delta_matches_frozen_oracle(corpus_spaces, name):
    assert hyperbolicity_delta(corpus_spaces[name]).delta == pytest.approx(DELTA_GOLDEN[name], abs=1e-12)


def test_c7_delta_frozen():
    assert hyperbolicity_delta(build_space(cycle_graph(7))).delta == 1.0


def test_cycle_delta_grows_like_a_quarter_of_length():
    # C_n for n = 4k has delta k: the antipodal quadruple is optimal
    for k in (1, 2, 3):
        assert hyperbolicity_delta(build_space(cycle_graph(4 * k))).delta == k


@pytest.mark.parametrize("seed", range(5))
def test_apsp_matches_fraction_floyd_warshall(seed):
    rng = np.random.default_rng(seed)
    spec = random_tree(12, rng)
    extra = [(spec.vertices[0], spec.vertices[-1], 0.5), (spec.vertices[3], spec.vertices[7], 1.25)]
    spec = GraphSpec(spec.vertices, spec.edges + tuple(extra))
    space = build_space(spec)
    ref = oracles.floyd_warshall(list(spec.vertices), list(spec.edges))
    for i, j in itertools.product(range(space.n), repeat=2):
        assert space.dist[i, j] == pytest.approx(float(ref[i][j]), abs=1e-12)
    assert hyperbolicity_delta(space).delta == pytest.approx(float(oracles.gromov_delta(ref)), abs=1e-12)


@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_random_trees_have_zero_delta(n, seed):
    space = build_space(random_tree(n, np.random.default_rng(seed)))
    assert hyperbolicity_delta(space).delta == 0.0


@given(st.integers(3, 9), st.integers(1, 3))
@settings(max_examples=20, deadline=None)
def test_subdivision_preserves_vertex_distances(n, k):
    spec = cycle_graph(n)
    coarse = build_space(spec)
    fine = build_space(spec, k)
    for u, v in itertools.combinations(spec.vertices, 2):
        assert fine.d(u, v) == pytest.approx(coarse.d(u, v))
    assert fine.n == n * k


@given(st.integers(4, 10))
@settings(max_examples=7, deadline=None)
def test_metric_axioms_on_cycles(n):
    defects = metric_axiom_defects(build_space(cycle_graph(n)).dist)
    assert all(v <= 1e-12 for v in defects.values())


def test_gromov_product_on_c4():
    space = build_space(cycle_graph(4))
    assert gromov_product(space, "0", "2", "1") == 0.0
    assert gromov_product(space, "1", "2", "0") == 1.0
    assert gromov_product(space, "0", "1", "0") == 0.0


def test_witness_realises_delta(corpus_spaces):
    for name, space in corpus_spaces.items():
        report = hyperbolicity_delta(space)
        assert four_point_defect(space, report.witness) == pytest.approx(report.delta)


@pytest.mark.parametrize("name", sorted(DELTA_GOLDEN))
def test_both_four_point_forms_agree(corpus_spaces, name):
    space = corpus_spaces[name]
    delta = hyperbolicity_delta(space).delta
    assert verify_four_point_forms(space, delta).ok
    if delta > 0:
        assert not verify_four_point_forms(space, delta - 0.25).ok


def test_five_point_inequalities_on_c4_exhaustive():
    report = verify_metric_inequalities(build_space(cycle_graph(4)), 1.0)
    assert report.exhaustive and report.tuples_checked == 4**5
    assert report.violations == 0 and report.base_condition_ok


def test_five_point_below_delta_reports_base_failure():
    report = verify_metric_inequalities(build_space(cycle_graph(4)), 0.5)
    assert not report.base_condition_ok
    assert "four-point" in report.base_failure


def test_five_point_sampling_is_seeded():
    space = build_space(grid_graph(4, 4))
    a = verify_metric_inequalities(space, 3.0, sample_budget=5000, seed=3)
    b = verify_metric_inequalities(space, 3.0, sample_budget=5000, seed=3, workers=4)
    assert not a.exhaustive
    assert a.to_json() == b.to_json()
    assert a.violations == 0


def test_worker_count_does_not_change_witness():
    space = build_space(grid_graph(4, 4))
    reports = {hyperbolicity_delta(space, workers=w) for w in (1, 4, 8)}
    assert len(reports) == 1


@pytest.mark.parametrize("spec,message", [
    (GraphSpec((), ()), "no vertices"),
    (GraphSpec(("a", "a"), ()), "duplicate"),
    (GraphSpec(("a", "b"), (("a", "c", 1.0),)), "unknown vertex"),
    (GraphSpec(("a",), (("a", "a", 1.0),)), "self-loop"),
    (GraphSpec(("a", "b"), (("a", "b", 0.0),)), "non-positive"),
    (GraphSpec(("a", "b"), (("a", "b", -1.0),)), "non-positive"),
])
def test_build_space_rejects_bad_graphs(spec, message):
    with pytest.raises(InvalidInput, match=message):
        build_space(spec)


def test_disconnected_graph_rejected():
    with pytest.raises(InvalidInput):
        build_space(GraphSpec(("a", "b", "c"), (("a", "b", 1.0),)))


def test_from_matrix_rejects_asymmetric():
    with pytest.raises(InvalidInput):
        FiniteMetricSpace.from_matrix(["x", "y"], np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_string_edge_lengths_are_rational():
    spec = GraphSpec.from_json({"vertices": ["a", "b", "c"], "edges": [["a", "b", "1/3"], ["b", "c", "2/3"]]})
    assert build_space(spec).d("a", "c") == pytest.approx(1.0)
    with pytest.raises(InvalidInput):
        GraphSpec.from_json({"vertices": ["a"], "edges": [["a", "b", "x/y"]]})


def test_path_graph_is_a_tree():
    assert hyperbolicity_delta(build_space(path_graph(8))).delta == 0.0
