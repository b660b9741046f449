import numpy as np
import pytest
import scipy.sparse as sp

from glt.models import (TwistSpec, build_model, flux_torus_hamiltonian,
                        gapped_test_chain, heisenberg_chain, lr_constants,
                        majumdar_ghosh, polarized_chain, strength_and_range,
                        twisted_hamiltonian, xxz_torus)
from glt.operators import embed, op_norm, spin_matrices
from glt.spectral import ground_state


def total_charge_matrix(ham, charge):
    return sp.diags(charge.total_diagonal(ham.indexer).astype(float))


def test_mg_exact_degeneracy_and_energy():
    ham, _ = majumdar_ghosh(8, 1.0, 0.5)
    res = ground_state(ham, k=3)
    assert res.energies[0] == pytest.approx(-3.0, abs=1e-12)
    assert res.energies[1] - res.energies[0] == pytest.approx(0.0, abs=1e-10)
    assert res.degenerate


def test_mg_perturbed_gap_ordering():
    # splitting shrinks as the coupling approaches the solvable point
    g = {}
    for j2 in (0.40, 0.45):
        res = ground_state(majumdar_ghosh(8, 1.0, j2)[0], k=2, sector=4)
        g[j2] = res.gap
    assert 0 < g[0.45] < g[0.40]


def test_mg_charge_commutes():
    ham, charge = majumdar_ghosh(8, 1.0, 0.5)
    q = total_charge_matrix(ham, charge)
    h = ham.matrix()
    assert abs(q @ h - h @ q).max() == 0.0


def test_mg_rejects_odd_length():
    with pytest.raises(ValueError):
        majumdar_ghosh(7, 1.0, 0.5)


def test_heisenberg_l4_ground_energy():
    ham, _ = heisenberg_chain(4, 0.5, 1.0)
    res = ground_state(ham, k=2)
    assert res.energies[0] == pytest.approx(-2.0, abs=1e-10)


def test_heisenberg_half_filling():
    ham, charge = heisenberg_chain(8, 0.5, 1.0)
    res = ground_state(ham, k=2)
    qdiag = charge.total_diagonal(ham.indexer).astype(float)
    psi = res.ground_state
    filling = float(np.real(np.vdot(psi, qdiag * psi))) / 8
    assert filling == pytest.approx(0.5, abs=1e-10)


def test_heisenberg_coupling_linearity():
    w1 = np.linalg.eigvalsh(heisenberg_chain(4, 0.5, 1.0)[0].dense())
    w3 = np.linalg.eigvalsh(heisenberg_chain(4, 0.5, 3.0)[0].dense())
    assert np.allclose(3 * w1, w3, atol=1e-12)


def test_heisenberg_invalid_spin():
    with pytest.raises(ValueError):
        heisenberg_chain(4, 0.4, 1.0)


@pytest.mark.parametrize("L", [2, 4, 6, 8, 10])
def test_gapped_chain_unique_gap(L):
    res = ground_state(gapped_test_chain(L, 2.0)[0], k=2)
    assert not res.degenerate
    assert res.gap >= 1.0


def test_gapped_chain_strong_field_limit():
    L, h = 6, 50.0
    res = ground_state(gapped_test_chain(L, h)[0], k=2)
    assert abs(res.energies[0] / L + h) < 2.0 / h
    # all-up product state dominates
    psi = np.abs(res.ground_state)
    assert psi[0] > 0.999


def test_gapped_chain_correlation_monotone():
    ham, _ = gapped_test_chain(4, 2.0)
    res = ground_state(ham, k=2)
    psi = res.ground_state
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    def conn(i, j):
        zi = embed(z, [i], ham.indexer).matrix
        zj = embed(z, [j], ham.indexer).matrix
        return abs(np.vdot(psi, zi @ (zj @ psi))
                   - np.vdot(psi, zi @ psi) * np.vdot(psi, zj @ psi))
    assert conn(0, 2) < conn(0, 1)


def test_polarized_chain_product_ground_state():
    ham, _ = polarized_chain(6, 4.0)
    res = ground_state(ham, k=2)
    assert res.energies[0] == pytest.approx(-6 * 4.0 * 0.5, abs=1e-12)
    assert res.gap == pytest.approx(4.0, abs=1e-10)


# ---------------------------------------------------------------------------
# twists

@pytest.fixture(scope="module")
def heis8():
    return heisenberg_chain(8, 0.5, 1.0)


def test_twist_zero_is_identity(heis8):
    ham, charge = heis8
    tw = twisted_hamiltonian(ham, charge, TwistSpec(0.0, 0.0))
    assert abs(tw.matrix() - ham.matrix()).max() == 0.0


def test_twist_gauge_relation():
    # MG needs L > 4R = 8, so use L = 10
    ham, charge = majumdar_ghosh(10, 1.0, 0.5)
    th, tp, f = 0.3, 0.7, 0.5
    lhs = twisted_hamiltonian(ham, charge, TwistSpec(th + f, tp - f)).matrix()
    left = [s for s in ham.lattice.sites() if ham.lattice.coords[s][0] < 5]
    qleft = charge.region_diagonal(left, ham.indexer).astype(float)
    d = sp.diags(np.exp(1j * f * qleft))
    rhs = (d @ twisted_hamiltonian(ham, charge, TwistSpec(th, tp)).matrix()
           @ d.conj()).tocsr()
    assert abs(lhs - rhs).max() < 1e-12


def test_twist_opposite_angles_isospectral(heis8):
    ham, charge = heis8
    w0 = np.linalg.eigvalsh(ham.dense())
    for th in (0.5, 1.0, 2.0):
        w = np.linalg.eigvalsh(twisted_hamiltonian(ham, charge, TwistSpec(th, -th)).dense())
        assert np.abs(w - w0).max() < 1e-10


def test_twist_full_turn_is_identity(heis8):
    ham, charge = heis8
    tw = twisted_hamiltonian(ham, charge, TwistSpec(2 * np.pi, 0.0))
    assert abs(tw.matrix() - ham.matrix()).max() < 1e-12


def test_twist_preserves_selfadjointness_and_strength(heis8):
    ham, charge = heis8
    tw = twisted_hamiltonian(ham, charge, TwistSpec(0.9, 0.4))
    j0, r0 = strength_and_range(ham)
    j1, r1 = strength_and_range(tw)
    assert j1 == pytest.approx(j0, rel=1e-10)
    assert r1 <= r0
    m = tw.matrix()
    assert abs(m - m.conj().T).max() < 1e-12


def test_twist_range_precondition():
    ham, charge = majumdar_ghosh(8, 1.0, 0.5)  # R = 2, needs L > 8
    with pytest.raises(ValueError):
        twisted_hamiltonian(ham, charge, TwistSpec(0.5, 0.0))


# ---------------------------------------------------------------------------
# flux torus

@pytest.fixture(scope="module")
def torus33():
    return xxz_torus(3, 3, 1.0, 1.0, 2.0)


def test_flux_zero_is_identity(torus33):
    ham, charge = torus33
    assert abs(flux_torus_hamiltonian(ham, charge, 0.0, 0.0).matrix()
               - ham.matrix()).max() == 0.0


def test_flux_two_pi_periodicity(torus33):
    ham, charge = torus33
    h2pi = flux_torus_hamiltonian(ham, charge, 2 * np.pi, 0.0).matrix()
    assert abs(h2pi - ham.matrix()).max() < 1e-12
    h2pi_y = flux_torus_hamiltonian(ham, charge, 0.0, 2 * np.pi).matrix()
    assert abs(h2pi_y - ham.matrix()).max() < 1e-12


def test_flux_gauge_relation_each_direction(torus33):
    ham, charge = torus33
    lat = ham.lattice
    th, ph, f = 0.4, 1.1, 0.9
    left = [s for s in lat.sites() if lat.coords[s][0] < 1]
    qleft = charge.region_diagonal(left, ham.indexer).astype(float)
    d = sp.diags(np.exp(1j * f * qleft))
    lhs = flux_torus_hamiltonian(ham, charge, th + f, ph, -f, 0.0).matrix()
    rhs = (d @ flux_torus_hamiltonian(ham, charge, th, ph).matrix() @ d.conj()).tocsr()
    assert abs(lhs - rhs).max() < 1e-12
    bottom = [s for s in lat.sites() if lat.coords[s][1] < 1]
    qbot = charge.region_diagonal(bottom, ham.indexer).astype(float)
    db = sp.diags(np.exp(1j * f * qbot))
    lhs = flux_torus_hamiltonian(ham, charge, th, ph + f, 0.0, -f).matrix()
    rhs = (db @ flux_torus_hamiltonian(ham, charge, th, ph).matrix() @ db.conj()).tocsr()
    assert abs(lhs - rhs).max() < 1e-12


def test_flux_requires_torus():
    ham, charge = heisenberg_chain(8, 0.5, 1.0)
    with pytest.raises(ValueError):
        flux_torus_hamiltonian(ham, charge, 0.3, 0.3)


# ---------------------------------------------------------------------------
# strength, range, light-cone constants

def test_strength_and_range_mg():
    ham, _ = majumdar_ghosh(8, 1.0, 0.5)
    j, r = strength_and_range(ham)
    assert r == 2
    assert j == pytest.approx(0.75, abs=1e-12)  # Heisenberg bond norm 3/4


def test_strength_single_term():
    ham, _ = polarized_chain(4, 3.0)
    j, r = strength_and_range(ham)
    assert j == pytest.approx(1.5, abs=1e-12)
    assert r == 0


def test_lr_constants_single_term():
    # one 2-site term of norm 1, diameter 1: s = 2e, v = 8e
    from glt.lattice import cycle
    from glt.models import TermSum
    from glt.operators import BasisIndexer
    lat = cycle(4)
    idx = BasisIndexer(lat)
    sx, _, _ = spin_matrices(0.5)
    term = embed(np.kron(sx, sx) * 4.0, [0, 1], idx)  # norm (1/2)^2 * 4 = 1
    ham = TermSum(lat, idx, [term])
    s, v = lr_constants(ham, 1.0)
    assert s == pytest.approx(2 * np.e, rel=1e-12)
    assert v == pytest.approx(8 * np.e, rel=1e-12)


def test_lr_constants_scale_linearly():
    s1, _ = lr_constants(heisenberg_chain(6, 0.5, 1.0)[0], 1.0)
    s3, _ = lr_constants(heisenberg_chain(6, 0.5, 3.0)[0], 1.0)
    assert s3 == pytest.approx(3 * s1, rel=1e-12)


def test_lr_constants_brute_force_oracle():
    ham, _ = majumdar_ghosh(10, 1.0, 0.5)
    mu = 1.0
    lat = ham.lattice
    per_site = {}
    for i in lat.sites():
        tot = 0.0
        for t in ham.terms:
            if i in t.support:
                tot += op_norm(t) * len(t.support) * np.exp(mu * lat.diameter(t.support))
        per_site[i] = tot
    s, _ = lr_constants(ham, mu)
    assert s == pytest.approx(max(per_site.values()), rel=1e-12)


def test_build_model_registry():
    ham, charge = build_model({"kind": "heisenberg_chain", "L": 4, "spin": 0.5, "j": 1.0})
    assert ham.lattice.n_sites == 4
    with pytest.raises(ValueError):
        build_model({"kind": "hubbard"})
