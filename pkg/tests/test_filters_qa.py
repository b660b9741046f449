import numpy as np
import pytest
from scipy import integrate

from glt.filters_qa import (QaFilter, connected_correlation, decay_fit,
                            filtered_correlation, filtered_correlation_error_bound,
                            ground_state_derivative, qa_generator, qa_transport,
                            step_filter)
from glt.models import gapped_test_chain, polarized_chain
from glt.operators import embed
from glt.spectral import full_spectrum, ground_state

Z = np.array([[1, 0], [0, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


@pytest.fixture(scope="module")
def tfi8():
    ham, _ = gapped_test_chain(8, 2.0)
    return ham, full_spectrum(ham)


@pytest.fixture(scope="module")
def tfi10():
    ham, _ = gapped_test_chain(10, 2.0)
    return ham, full_spectrum(ham)


# ---------------------------------------------------------------------------
# step filter

def test_step_filter_half_at_zero():
    assert step_filter(0.0, 0.7) == pytest.approx(0.5, abs=1e-15)


def test_step_filter_near_one_above_gap():
    gap = 1.8
    alpha = gap ** 2 / 16
    assert abs(step_filter(gap, alpha) - 1.0) <= np.exp(-gap ** 2 / (4 * alpha)) + 1e-15


def test_step_filter_matches_quadrature():
    """Closed form equals the Gaussian frequency integral at random points."""
    rng = np.random.default_rng(12)
    for _ in range(50):
        e = rng.uniform(-4, 4)
        alpha = rng.uniform(0.05, 4.0)

        def integrand(om):
            return np.exp(-(om + e) ** 2 / (4 * alpha))

        val, _ = integrate.quad(integrand, -np.inf, 0, epsabs=1e-13, epsrel=1e-13)
        val *= np.sqrt(np.pi / alpha) / (2 * np.pi)
        assert step_filter(e, alpha) == pytest.approx(val, abs=1e-10)


def test_step_filter_params_validation_and_scale():
    from glt.filters_qa import StepFilterParams
    params = StepFilterParams(alpha=0.5, delta_e=2.0)
    assert params.error_scale() == pytest.approx(np.exp(-4.0 / 2.0), rel=1e-12)
    with pytest.raises(ValueError):
        StepFilterParams(alpha=0.0)


def test_step_filter_sum_identity_and_monotone():
    rng = np.random.default_rng(13)
    es = rng.uniform(-5, 5, 200)
    alpha = 0.9
    vals = step_filter(es, alpha)
    assert np.all((vals > 0) & (vals < 1))
    assert np.abs(step_filter(es, alpha) + step_filter(-es, alpha) - 1.0).max() == 0.0
    sorted_vals = step_filter(np.sort(es), alpha)
    assert np.all(np.diff(sorted_vals) >= 0)


# ---------------------------------------------------------------------------
# correlators

def test_connected_identity_is_zero(tfi8):
    ham, spec = tfi8
    a = embed(Z, [0], ham.indexer)
    ident = embed(np.eye(2), [3], ham.indexer)
    assert abs(connected_correlation(a, ident, spec)) < 1e-12


def test_connected_no_fluctuation_in_product_state():
    ham, _ = polarized_chain(6, 3.0)
    spec = ground_state(ham, k=2)
    a = embed(Z, [0], ham.indexer)
    assert abs(connected_correlation(a, a, spec)) < 1e-12


def test_connected_monotone_decay(tfi10):
    ham, spec = tfi10
    mags = []
    for l in range(1, 6):
        a = embed(Z, [0], ham.indexer)
        b = embed(Z, [l], ham.indexer)
        mags.append(abs(connected_correlation(a, b, spec)))
    assert all(m1 > m2 for m1, m2 in zip(mags, mags[1:]))


def test_connected_degenerate_block_projector_form():
    from glt.models import majumdar_ghosh
    ham, _ = majumdar_ghosh(8, 1.0, 0.5)
    spec = ground_state(ham, k=3)
    a = embed(Z, [0], ham.indexer)
    ident = embed(np.eye(2), [4], ham.indexer)
    assert abs(connected_correlation(a, ident, spec)) < 1e-12


def test_filtered_limit_alpha_to_zero(tfi8):
    ham, spec = tfi8
    a = embed(Z, [0], ham.indexer)
    b = embed(Z, [3], ham.indexer)
    conn = connected_correlation(a, b, spec)
    filt = filtered_correlation(a, b, spec, 1e-6 * spec.gap ** 2)
    assert abs(filt - conn) < 1e-8


def test_filtered_error_bound(tfi8):
    ham, spec = tfi8
    a = embed(Z, [0], ham.indexer)
    b = embed(Z, [3], ham.indexer)
    alpha = spec.gap ** 2 / 8
    conn = connected_correlation(a, b, spec)
    filt = filtered_correlation(a, b, spec, alpha)
    assert abs(filt - conn) <= 2 * 1 * 1 * np.exp(-2.0)


def test_filtered_bound_random_single_site_ops(tfi8):
    """Randomized centered observables keep the contract in every trial."""
    ham, spec = tfi8
    rng = np.random.default_rng(21)
    psi0 = spec.ground_state
    alpha = spec.gap ** 2 / 8
    for _ in range(20):
        def random_site_op():
            m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            m = m + m.conj().T
            site = int(rng.integers(0, 8))
            op = embed(m, [site], ham.indexer)
            mean = np.vdot(psi0, op.matrix @ psi0)
            return embed(m - mean.real * np.eye(2), [site], ham.indexer)

        a, b = random_site_op(), random_site_op()
        conn = connected_correlation(a, b, spec)
        filt = filtered_correlation(a, b, spec, alpha)
        bound = filtered_correlation_error_bound(a, b, spec.gap, alpha)
        assert abs(filt - conn) <= bound + 1e-12


def test_filtered_rejects_degenerate_block():
    from glt.models import majumdar_ghosh
    ham, _ = majumdar_ghosh(8, 1.0, 0.5)
    spec = full_spectrum(ham)
    a = embed(Z, [0], ham.indexer)
    with pytest.raises(ValueError):
        filtered_correlation(a, a, spec, 0.1)


def test_filtered_matches_time_quadrature(tfi8):
    """Eigenbasis evaluation equals the regularized time-integral form.

    i/(2 pi) int dt <[A(t),B]> exp(-alpha t^2)/(t + i eps) in the eps -> 0
    limit equals PV(i/2pi int g(t)/t) + g(0)/2 with g the damped commutator
    expectation.
    """
    ham, spec = tfi8
    a = embed(Z, [0], ham.indexer)
    b = embed(Z, [2], ham.indexer)
    alpha = spec.gap ** 2 / 8
    v, w = spec.states, spec.energies
    psi0 = v[:, 0]
    om = w - w[0]
    a_row = (v.conj().T @ (a.matrix.toarray().conj().T @ psi0)).conj()
    b_col = v.conj().T @ (b.matrix.toarray() @ psi0)
    b_row = (v.conj().T @ (b.matrix.toarray().conj().T @ psi0)).conj()
    a_col = v.conj().T @ (a.matrix.toarray() @ psi0)

    def damped_comm(t):
        return (np.sum(a_row[1:] * b_col[1:] * np.exp(-1j * om[1:] * t))
                - np.sum(b_row[1:] * a_col[1:] * np.exp(+1j * om[1:] * t))) \
            * np.exp(-alpha * t ** 2)

    # lim_{eps->0} 1/(t + i eps) = PV(1/t) - i pi delta(t), so the integral
    # becomes i/(2 pi) PV int g/t dt + g(0)/2
    def diff_over_t(t):
        return (damped_comm(t) - damped_comm(-t)) / t

    re, _ = integrate.quad(lambda t: diff_over_t(t).real, 1e-12, 12.0, limit=800)
    im, _ = integrate.quad(lambda t: diff_over_t(t).imag, 1e-12, 12.0, limit=800)
    quad_value = 1j / (2 * np.pi) * (re + 1j * im) + 0.5 * damped_comm(0.0)

    filt = filtered_correlation(a, b, spec, alpha)
    assert abs(filt - quad_value) < 1e-8


# ---------------------------------------------------------------------------
# decay fit

def test_decay_fit_exact_exponential():
    ell = np.arange(1, 7)
    fit = decay_fit(ell, np.exp(-ell / 2.0))
    assert fit.correlation_length == pytest.approx(2.0, abs=1e-9)
    assert fit.residual < 1e-12


def test_decay_fit_constant_flags_no_decay():
    fit = decay_fit([1, 2, 3, 4], [0.5, 0.5, 0.5, 0.5])
    assert fit.no_decay


def test_decay_fit_rejects_nonpositive():
    with pytest.raises(ValueError):
        decay_fit([1, 2, 3], [0.1, 0.0, 0.1])
    with pytest.raises(ValueError):
        decay_fit([1, 2], [0.1, 0.2])


def test_decay_fit_tfi_correlators():
    ham, _ = gapped_test_chain(12, 2.0)
    spec = ground_state(ham, k=2)
    mags = []
    for l in range(1, 6):
        a = embed(Z, [0], ham.indexer)
        b = embed(Z, [l], ham.indexer)
        mags.append(abs(connected_correlation(a, b, spec)))
    fit = decay_fit(np.arange(1, 6), mags)
    assert np.isfinite(fit.correlation_length) and fit.correlation_length > 0
    assert fit.residual < 0.1


# ---------------------------------------------------------------------------
# quasi-adiabatic pieces

def tfi_path(L, h0, h1):
    def at(s):
        h = h0 + (h1 - h0) * s
        ham, _ = gapped_test_chain(L, h)
        idx = ham.indexer
        dterms = [embed(-(h1 - h0) * Z, [i], idx) for i in range(L)]
        from glt.models import TermSum
        return ham, TermSum(ham.lattice, idx, dterms)
    return at


def test_qa_filter_odd_and_error_form():
    filt = QaFilter(0.5)
    xs = np.linspace(-8, 8, 1001)
    assert np.abs(filt(xs) + filt(-xs)).max() == 0.0
    assert filt(np.array([0.0]))[0] == 0.0
    nz = xs[np.abs(xs) > 1e-9]
    err = np.abs(filt(nz) + 1.0 / nz)
    assert np.all(err <= np.exp(-nz ** 2 / (2 * 0.25)) / np.abs(nz) + 1e-15)


def test_qa_generator_hermitian_and_zero_diagonal():
    path = tfi_path(6, 2.0, 3.0)
    ham, dham = path(0.3)
    spec = full_spectrum(ham)
    gen = qa_generator(dham, spec, QaFilter(spec.gap / 2))
    assert np.abs(gen - gen.conj().T).max() < 1e-10
    psi0 = spec.ground_state
    assert abs(np.vdot(psi0, gen @ psi0)) < 1e-12


def test_qa_generator_first_order_vs_finite_difference():
    """iD psi0 tracks the exact ground-state derivative on a 6-spin family."""
    L, h0 = 6, 2.2
    step = 1e-5

    def state_at(h, ref=None):
        spec = full_spectrum(gapped_test_chain(L, h)[0])
        psi = spec.ground_state
        if ref is not None:
            phase = np.vdot(ref, psi)
            psi = psi * (phase.conj() / abs(phase))
        return spec, psi

    spec, psi0 = state_at(h0)
    _, psi_p = state_at(h0 + step, psi0)
    _, psi_m = state_at(h0 - step, psi0)
    dpsi_fd = (psi_p - psi_m) / (2 * step)

    idx = gapped_test_chain(L, h0)[0].indexer
    dham = sum(embed(-Z, [i], idx).matrix.toarray() for i in range(L))
    gen = qa_generator(dham, spec, QaFilter(spec.gap / 4))
    qa_vec = 1j * (gen @ psi0)
    assert np.linalg.norm(qa_vec - dpsi_fd) <= 1e-3
    dpsi_pt = ground_state_derivative(spec, dham)
    assert np.linalg.norm(qa_vec - dpsi_pt) <= 1e-3
    assert np.linalg.norm(dpsi_pt - dpsi_fd) <= 1e-6


def test_transport_constant_path_is_identity():
    ham, _ = gapped_test_chain(6, 2.0)
    from glt.models import TermSum
    zero = TermSum(ham.lattice, ham.indexer, [])
    res = qa_transport(lambda s: (ham, zero), 8, QaFilter(0.5))
    assert res.fidelity == pytest.approx(1.0, abs=1e-12)
    assert abs(res.phase) < 1e-12
    assert np.all(res.generator_norms < 1e-14)


def test_transport_gapped_path_fidelity_and_unitarity():
    path = tfi_path(6, 2.0, 3.0)
    res = qa_transport(path, 32, QaFilter(1.0))
    assert res.fidelity >= 0.999
    assert res.step_unitarity < 1e-9
    assert abs(np.linalg.norm(res.final_state) - 1.0) < 1e-10


def test_transport_fidelity_monotone_in_steps():
    path = tfi_path(6, 2.0, 3.0)
    fids = [qa_transport(path, n, QaFilter(1.0)).fidelity for n in (8, 16, 32)]
    assert fids[0] <= fids[1] + 1e-12 <= fids[2] + 2e-12


def test_transport_filter_width_degrades_fidelity():
    path = tfi_path(6, 2.0, 3.0)
    gap = full_spectrum(gapped_test_chain(6, 2.0)[0]).gap
    tight = qa_transport(path, 32, QaFilter(gap / 2)).fidelity
    wide = qa_transport(path, 32, QaFilter(2 * gap)).fidelity
    assert tight >= wide


def test_transport_closed_loop_returns_with_pure_phase():
    L = 6

    def loop(s):
        h = 2.5 + 0.5 * np.cos(2 * np.pi * s)
        ham, _ = gapped_test_chain(L, h)
        idx = ham.indexer
        dh = 0.5 * -np.sin(2 * np.pi * s) * 2 * np.pi
        from glt.models import TermSum
        dterms = [embed(-dh * Z, [i], idx) for i in range(L)]
        return ham, TermSum(ham.lattice, idx, dterms)

    res = qa_transport(loop, 48, QaFilter(1.0))
    assert res.fidelity >= 0.999
