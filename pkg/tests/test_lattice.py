import numpy as np
import pytest

from glt.lattice import build_lattice, cartesian_cycle, cycle, path, torus


def test_cycle_metric():
    lat = cycle(4)
    assert lat.dist[0, 2] == 2
    assert lat.dist[0, 3] == 1
    assert lat.cycle_period == 4


def test_torus_metric_periodic_taxicab():
    lat = torus(3, 3)
    a = lat.site_at(0, 0)
    b = lat.site_at(2, 2)
    assert lat.dist[a, b] == 2
    assert lat.cycle_period == 3


def test_cartesian_cycle_product_count():
    adj = np.array([[0, 1], [1, 0]])
    lat = cartesian_cycle(6, adj, 2)
    assert lat.n_sites == 12
    assert lat.cycle_period == 6
    # product metric: cycle distance plus transverse hop
    assert lat.dist[lat.site_at(0, 0), lat.site_at(3, 1)] == 4


def test_metric_axioms_random_spot_checks():
    lat = torus(4, 3)
    d = lat.dist
    assert np.all(d == d.T)
    assert np.all(np.diag(d) == 0)
    rng = np.random.default_rng(0)
    for _ in range(50):
        i, j, k = rng.integers(0, lat.n_sites, 3)
        assert d[i, j] <= d[i, k] + d[k, j]


def test_invalid_sizes_raise():
    with pytest.raises(ValueError):
        cycle(1)
    with pytest.raises(ValueError):
        torus(1, 3)
    with pytest.raises(ValueError):
        build_lattice("hypercube", L=3)


def test_path_has_no_translation():
    lat = path(6)
    assert lat.cycle_period is None
    assert lat.dist[0, 5] == 5


def test_set_distance_and_diameter():
    lat = cycle(8)
    assert lat.set_distance([0], [3, 4]) == 3
    assert lat.diameter([0, 1, 2]) == 2
