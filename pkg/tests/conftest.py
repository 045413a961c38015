from pathlib import Path

import pytest

from coarse_cancel.io import load_space, load_window

CORPUS = Path(__file__).resolve().parents[1] / "src" / "coarse_cancel" / "corpus"

# Four-point delta of each corpus space, computed once by oracles.gromov_delta
# over Fraction-valued Floyd-Warshall distances and frozen here.
DELTA_GOLDEN = {"c4": 1.0, "c5": 0.5, "c6": 1.0, "c8": 2.0, "grid4x4": 3.0, "c6_sub2": 1.5, "tree30": 0.0}


@pytest.fixture(scope="session")
def corpus_spaces():
    return {name: load_space(CORPUS / "spaces" / f"{name}.json") for name in DELTA_GOLDEN}


@pytest.fixture(scope="session")
def z3z5():
    space, window, _ = load_window(CORPUS / "windows" / "z3z5_r5.json")
    return space, window


def coneoff_instances():
    """(name, space, family, rho) for the toy cone-off checks."""
    from coarse_cancel.metric_core import build_space, cycle_graph, grid_graph, path_graph

    c6 = build_space(cycle_graph(6))
    c40 = build_space(cycle_graph(40))
    c12 = build_space(cycle_graph(12))
    grid = build_space(grid_graph(4, 4))
    path = build_space(path_graph(9))
    return [
        ("c6_whole", c6, [{"subset": list(c6.points)}], 1.0),
        ("c40_pair", c40, [{"subset": [str(i) for i in range(10)]},
                           {"subset": [str(i) for i in range(20, 30)]}], 0.5),
        ("c12_arcs", c12, [{"subset": [str(i) for i in range(5)]},
                           {"subset": [str(i) for i in range(4, 9)]}], 1.5),
        ("grid_rows", grid, [{"subset": [f"0,{c}" for c in range(4)]},
                             {"subset": [f"3,{c}" for c in range(4)]}], 0.8),
        ("path_segment", path, [{"subset": [str(i) for i in range(2, 8)]}], 2.0),
    ]
