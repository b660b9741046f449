"""Spectral step filter, filtered correlators, and continuation transport.

The step filter is the Gaussian-smoothed indicator of negative frequencies;
its closed form is an error function.  The continuation generator applies
an odd regularized -1/x filter to energy differences in the eigenbasis;
path-ordered exponentials of it transport gapped ground states along
Hamiltonian families.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .models import TermSum
from .operators import LocalOperator, op_norm
from .spectral import SpectralResult, full_spectrum


def step_filter(energy, alpha: float):
    """Smoothed step (1 + erf(E / (2 sqrt(alpha)))) / 2, values in (0, 1).

    Equals the Gaussian-weighted fraction of the negative-frequency axis;
    alpha is the Gaussian width parameter in squared energy units.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return 0.5 * (1.0 + erf(np.asarray(energy) / (2.0 * np.sqrt(alpha))))


@dataclass(frozen=True)
class StepFilterParams:
    alpha: float
    delta_e: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def error_scale(self) -> float:
        """exp(-delta_e^2 / (4 alpha)): the filter's advertised accuracy."""
        return float(np.exp(-self.delta_e ** 2 / (4.0 * self.alpha)))


@dataclass(frozen=True)
class QaFilter:
    """Odd filter f(x) = -(1 - exp(-x^2 / (2 delta^2))) / x with f(0) = 0.

    Approximates -1/x for |x| >> delta; the pointwise error is exactly
    exp(-x^2 / (2 delta^2)) / |x|.
    """

    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        nz = x != 0.0
        out[nz] = -(1.0 - np.exp(-x[nz] ** 2 / (2.0 * self.delta ** 2))) / x[nz]
        return out


def _as_dense(op):
    if isinstance(op, LocalOperator):
        return op.matrix.toarray()
    if isinstance(op, TermSum):
        return op.dense()
    if hasattr(op, "toarray"):
        return op.toarray()
    return np.asarray(op)


def _as_applicable(op):
    """Something supporting `@ vector` cheaply (sparse stays sparse)."""
    if isinstance(op, LocalOperator):
        return op.matrix
    if isinstance(op, TermSum):
        return op.matrix()
    return np.asarray(op)


def connected_correlation(a_op, b_op, spectral: SpectralResult) -> complex:
    """<A B> - <A P0 B> in the ground state or ground block.

    For a q-fold (near-)degenerate lowest level the expectation is
    (1/q) tr(P0 .) and P0 projects onto the block, which reduces to
    <AB> - <A><B> when the ground state is unique.
    """
    a_mat, b_mat = _as_applicable(a_op), _as_applicable(b_op)
    block = spectral.ground_block()
    q = block.shape[1]
    a_dag_psi = a_mat.conj().T @ block     # columns A† psi_m
    b_psi = b_mat @ block
    full = np.trace(a_dag_psi.conj().T @ b_psi) / q
    inside = np.trace((a_dag_psi.conj().T @ block) @ (block.conj().T @ b_psi)) / q
    return complex(full - inside)


def filtered_correlation(a_op, b_op, spectral: SpectralResult, alpha: float) -> complex:
    """Step-filtered extraction of the connected correlator.

    Needs the complete eigenbasis of a Hamiltonian with a unique ground
    state.  Satisfies |filtered - connected| <= 2 ||A|| ||B||
    exp(-gap^2 / (4 alpha)).
    """
    if spectral.degenerate:
        raise ValueError("filtered extraction requires a unique ground state")
    if spectral.states.shape[1] != spectral.states.shape[0]:
        raise ValueError("filtered_correlation needs the full eigenbasis "
                         "(use full_spectrum)")
    a_mat, b_mat = _as_applicable(a_op), _as_applicable(b_op)
    v, w = spectral.states, spectral.energies
    psi0 = v[:, 0]
    omega = w - w[0]
    # row/col projections as vector-matrix products (no basis-matrix copies)
    a_row = (a_mat.conj().T @ psi0).conj() @ v              # <psi0| A |psi_n>
    b_col = ((b_mat @ psi0).conj() @ v).conj()              # <psi_n| B |psi0>
    b_row = (b_mat.conj().T @ psi0).conj() @ v
    a_col = ((a_mat @ psi0).conj() @ v).conj()
    pos = step_filter(omega[1:], alpha)
    neg = step_filter(-omega[1:], alpha)
    return complex(np.sum(a_row[1:] * b_col[1:] * pos)
                   - np.sum(b_row[1:] * a_col[1:] * neg))


def filtered_correlation_error_bound(a_op, b_op, gap: float, alpha: float) -> float:
    return 2.0 * op_norm(a_op) * op_norm(b_op) \
        * float(np.exp(-gap ** 2 / (4.0 * alpha)))


@dataclass
class DecayFit:
    correlation_length: float
    prefactor: float
    residual: float
    no_decay: bool = False


def decay_fit(distances, magnitudes) -> DecayFit:
    """Least-squares fit of log|C| against distance; xi = -1/slope.

    residual is the RMS misfit of the log data normalized by its range
    (dimensionless; 0 for an exact exponential).  A nonnegative slope sets
    the no_decay flag instead of raising.
    """
    distances = np.asarray(distances, dtype=float)
    magnitudes = np.asarray(magnitudes, dtype=float)
    if len(distances) < 3:
        raise ValueError("need at least 3 points to fit a decay")
    if np.any(magnitudes <= 0):
        raise ValueError("magnitudes must be positive")
    logs = np.log(magnitudes)
    slope, intercept = np.polyfit(distances, logs, 1)
    misfit = logs - (slope * distances + intercept)
    spread = logs.max() - logs.min()
    residual = float(np.sqrt(np.mean(misfit ** 2)) / spread) if spread > 0 else 0.0
    if slope >= 0:
        return DecayFit(np.inf, float(np.exp(intercept)), residual, no_decay=True)
    return DecayFit(-1.0 / slope, float(np.exp(intercept)), residual)


# ---------------------------------------------------------------------------
# quasi-adiabatic continuation

def qa_generator(d_ham, spectral: SpectralResult, filt: QaFilter) -> np.ndarray:
    """Self-adjoint transport generator for one point of a Hamiltonian path.

    In the eigenbasis of H_s, <a| iD |b> = f(E_a - E_b) <a| dH/ds |b>; for
    an odd filter the returned D is Hermitian, and f(0) = 0 leaves the
    ground-state diagonal untouched.
    """
    if spectral.states.shape[1] != spectral.states.shape[0]:
        raise ValueError("qa_generator needs the full eigenbasis (use full_spectrum)")
    v, w = spectral.states, spectral.energies
    dh = _as_dense(d_ham)
    dh_eig = v.conj().T @ dh @ v
    gen_eig = -1j * filt(w[:, None] - w[None, :]) * dh_eig
    return v @ gen_eig @ v.conj().T


def ground_state_derivative(spectral: SpectralResult, d_ham) -> np.ndarray:
    """First-order perturbation theory derivative of the ground state."""
    v, w = spectral.states, spectral.energies
    dh = _as_dense(d_ham)
    coef = v.conj().T @ (dh @ v[:, 0])
    denom = w[0] - w[1:]
    return v[:, 1:] @ (coef[1:] / denom)


@dataclass
class TransportResult:
    final_state: np.ndarray
    generator_norms: np.ndarray
    fidelity: float
    phase: float
    step_unitarity: float = 0.0
    path_min_gap: float = float("nan")
    meta: dict = field(default_factory=dict)


def qa_transport(path, n_steps: int, filt: QaFilter, initial=None,
                 reference=None, sector: int | None = None) -> TransportResult:
    """Path-ordered transport of the ground state along a Hamiltonian path.

    path: callable s in [0, 1] -> (H_s, dH_s/ds); each may be a TermSum or
    a matrix.  Steps use the midpoint rule, each factor exp(i ds D_s) built
    from the dense eigenbasis.  fidelity and phase compare the transported
    state against the exact ground state at s = 1 (or `reference`).
    """
    if n_steps < 2:
        raise ValueError("need at least 2 steps")

    def spectrum_at(s):
        h_s, dh_s = path(s)
        if isinstance(h_s, TermSum):
            spec = full_spectrum(h_s, sector=sector)
            dh = dh_s.dense(sector) if isinstance(dh_s, TermSum) else _as_dense(dh_s)
        else:
            spec = full_spectrum(h_s)
            dh = _as_dense(dh_s)
        return spec, dh

    if initial is None:
        spec0, _ = spectrum_at(0.0)
        psi = spec0.ground_state.astype(complex).copy()
    else:
        psi = np.asarray(initial, dtype=complex).copy()
        psi /= np.linalg.norm(psi)

    ds = 1.0 / n_steps
    norms = np.empty(n_steps)
    unitarity_worst = 0.0
    min_gap = np.inf
    for step in range(n_steps):
        s_mid = (step + 0.5) * ds
        spec, dh = spectrum_at(s_mid)
        min_gap = min(min_gap, spec.gap)
        gen = qa_generator(dh, spec, filt)
        lam, u = np.linalg.eigh(gen)
        norms[step] = np.abs(lam).max()
        factor = u @ (np.exp(1j * ds * lam)[:, None] * u.conj().T)
        unitarity_worst = max(unitarity_worst, float(np.abs(
            factor.conj().T @ factor - np.eye(len(lam))).max()))
        psi = factor @ psi

    if reference is None:
        spec1, _ = spectrum_at(1.0)
        reference = spec1.ground_state
    overlap = np.vdot(reference, psi)
    return TransportResult(psi, norms, float(abs(overlap)),
                           float(np.angle(overlap)), unitarity_worst,
                           float(min_gap))
