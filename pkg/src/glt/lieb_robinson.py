"""Light cones: exact evolved-commutator norms and their two upper bounds.

The exact profile evolves A in the Heisenberg picture and measures
||[A(t), B]||.  Two independent upper bounds are evaluated against it: a
chain-sum series whose k-th term counts weighted walks of overlapping term
supports from the support of A to that of B, and the closed exponential
form built from the per-site constants (s, v = 4s/mu).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .models import TermSum, lr_constants
from .operators import LocalOperator, op_norm
from .spectral import full_spectrum

DEFAULT_MU_GRID = (0.5, 1.0, 1.5, 2.0)
DEFAULT_KMAX = 12
HARD_KMAX = 40
TAIL_RATIO = 1e-3


def heisenberg_evolve(op, ham, t: float, dense_threshold: int = 4096):
    """exp(iHt) A exp(-iHt).

    Dense eigenbasis evolution below `dense_threshold`; above it the full
    propagator is built column-by-column with Krylov matrix exponentials,
    which is exact to solver tolerance but slow (desk-scale certification
    always takes the dense path).
    """
    a_mat = op.matrix.toarray() if isinstance(op, LocalOperator) else np.asarray(op)
    if isinstance(ham, TermSum):
        dim = ham.indexer.dim
    else:
        dim = ham.shape[0]
    if dim <= dense_threshold:
        spec = full_spectrum(ham)
        v, w = spec.states, spec.energies
        a_eig = v.conj().T @ a_mat @ v
        phases = np.exp(1j * w * t)
        evolved = (phases[:, None] * a_eig) * phases.conj()[None, :]
        return v @ evolved @ v.conj().T
    from scipy.sparse.linalg import expm_multiply
    h_mat = ham.matrix() if isinstance(ham, TermSum) else sp.csr_matrix(ham)
    u = expm_multiply(1j * t * h_mat.tocsc(), np.eye(dim, dtype=complex))
    return u @ a_mat @ u.conj().T


@dataclass
class LightConeProfile:
    """Exact commutator norms with series and exponential bounds per time."""

    times: np.ndarray
    exact_norms: np.ndarray
    series_bounds: np.ndarray | None = None
    tails: np.ndarray | None = None
    exp_bounds: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def rows(self):
        for i, t in enumerate(self.times):
            yield (t, self.exact_norms[i],
                   None if self.series_bounds is None else self.series_bounds[i],
                   None if self.tails is None else self.tails[i],
                   None if self.exp_bounds is None else self.exp_bounds[i])


@dataclass
class SeriesBoundState:
    """Per-order data of the chain-sum bound."""

    term_values: np.ndarray        # value of the k-th series term, k = 1..k_max
    partial_sum: float
    k_max: int
    tail_estimate: float
    weights: np.ndarray            # final per-term weight vector w_{k_max}


def commutator_norm_profile(a_op, b_op, ham, times) -> LightConeProfile:
    """Exact ||[A(t), B]|| on a time grid via one dense eigenbasis.

    The commutator of evolved self-adjoint operators is anti-Hermitian, so
    each norm is an eigvalsh of i[A(t), B] in the eigenbasis of H (the norm
    is invariant under the basis rotation).
    """
    spec = full_spectrum(ham)
    v, w = spec.states, spec.energies
    a_mat = a_op.matrix.toarray() if isinstance(a_op, LocalOperator) else np.asarray(a_op)
    b_mat = b_op.matrix.toarray() if isinstance(b_op, LocalOperator) else np.asarray(b_op)
    a_eig = v.conj().T @ a_mat @ v
    b_eig = v.conj().T @ b_mat @ v
    norms = np.empty(len(times))
    herm = (np.abs(a_mat - a_mat.conj().T).max() < 1e-12
            and np.abs(b_mat - b_mat.conj().T).max() < 1e-12)
    for i, t in enumerate(np.asarray(times, dtype=float)):
        phases = np.exp(1j * w * t)
        a_t = (phases[:, None] * a_eig) * phases.conj()[None, :]
        comm = a_t @ b_eig - b_eig @ a_t
        if herm:
            norms[i] = np.abs(np.linalg.eigvalsh(1j * comm)).max()
        else:
            norms[i] = np.linalg.norm(comm, 2)
    return LightConeProfile(np.asarray(times, dtype=float), norms)


def _term_geometry(ham: TermSum):
    supports = [t.support for t in ham.terms]
    norms = np.array([op_norm(t) for t in ham.terms])
    overlap = np.array([[bool(s1 & s2) for s2 in supports] for s1 in supports])
    return supports, norms, overlap


def lr_series_bound(ham: TermSum, x_sites, y_sites, t: float,
                    k_max: int | None = None, norm_a: float = 1.0,
                    norm_b: float = 1.0, mu_grid=DEFAULT_MU_GRID,
                    auto: bool | None = None) -> SeriesBoundState:
    """Chain-sum upper bound on ||[A(t), B]|| for A on X, B on Y.

    The k-th term is 2||A|| ||B|| (2|t|)^k / k! times the total weight of
    walks Z_1..Z_k over Hamiltonian term supports with Z_1 meeting X,
    consecutive Z's overlapping, and Z_k meeting Y; weights are products of
    term norms, accumulated by dynamic programming.  The tail beyond k_max
    is estimated from the closed exponential form restricted to orders
    > k_max, minimized over the mu grid.

    With auto (default when k_max is None), k_max grows from the default
    until the tail drops below 1e-3 of the partial sum or the hard cap.
    """
    x_set, y_set = set(x_sites), set(y_sites)
    if x_set & y_set:
        raise ValueError("supports X and Y must be disjoint")
    if auto is None:
        auto = k_max is None
    if k_max is None:
        k_max = DEFAULT_KMAX
    if k_max < 1:
        raise ValueError("k_max must be at least 1")

    supports, norms, overlap = _term_geometry(ham)
    touches_x = np.array([bool(s & x_set) for s in supports])
    touches_y = np.array([bool(s & y_set) for s in supports])
    pre = 2.0 * norm_a * norm_b
    abst = abs(t)

    def tail_for(k):
        best = np.inf
        for mu in mu_grid:
            s_mu, _ = lr_constants(ham, mu)
            geom = sum(np.exp(-mu * ham.lattice.dist[i, list(y_set)].min())
                       for i in x_set)
            x_arg = 2.0 * s_mu * abst
            # sum_{j>k} x^j/j! computed stably by forward recursion
            term = 1.0
            partial = 1.0
            for j in range(1, k + 1):
                term *= x_arg / j
                partial += term
            tail = np.exp(x_arg) - partial
            best = min(best, pre * geom * max(tail, 0.0))
        return best

    term_values = []
    weights = norms * touches_x
    partial = 0.0
    factor = 1.0
    k = 0
    while True:
        k += 1
        factor *= 2.0 * abst / k
        term_k = pre * factor * float(weights[touches_y].sum())
        term_values.append(term_k)
        partial += term_k
        if k >= k_max:
            tail = tail_for(k)
            if not auto or tail <= TAIL_RATIO * max(partial, 1e-300) or k >= HARD_KMAX:
                return SeriesBoundState(np.array(term_values), float(partial), k,
                                        float(tail), weights)
        weights = norms * (overlap @ weights)


def lr_exponential_bound(norm_a: float, norm_b: float, x_sites, y_sites,
                         lattice, mu: float, s: float, t: float):
    """Closed-form bound 2||A|| ||B|| sum_{i in X} e^{-mu d(i,Y)} (e^{2s|t|} - 1).

    Returns (value, corollary) where corollary is the simplified form
    |X| ||A|| ||B|| exp(-mu/2 d(X,Y)), reported only inside its validity
    region d(X,Y) >= v t with v = 4s/mu (None otherwise).
    """
    x_list, y_list = list(x_sites), list(y_sites)
    dists = lattice.dist[np.ix_(x_list, y_list)].min(axis=1)
    value = 2.0 * norm_a * norm_b * float(np.exp(-mu * dists).sum()) \
        * (np.exp(2.0 * s * abs(t)) - 1.0)
    corollary = None
    if lattice.set_distance(x_list, y_list) >= (4.0 * s / mu) * abs(t):
        corollary = len(x_list) * norm_a * norm_b \
            * np.exp(-0.5 * mu * lattice.set_distance(x_list, y_list))
    return float(value), corollary


def light_cone_study(ham: TermSum, a_op: LocalOperator, b_op: LocalOperator,
                     times, mu_grid=DEFAULT_MU_GRID, k_max: int | None = None) -> LightConeProfile:
    """Exact profile plus both bounds for one (A, B) pair.

    The exponential bound reports, per time, the tightest value over the mu
    grid (each mu gives a valid bound).
    """
    profile = commutator_norm_profile(a_op, b_op, ham, times)
    na, nb = op_norm(a_op), op_norm(b_op)
    x_sites, y_sites = sorted(a_op.support), sorted(b_op.support)
    series = np.empty(len(profile.times))
    tails = np.empty(len(profile.times))
    exps = np.empty(len(profile.times))
    consts = {mu: lr_constants(ham, mu) for mu in mu_grid}
    for i, t in enumerate(profile.times):
        state = lr_series_bound(ham, x_sites, y_sites, t, k_max=k_max,
                                norm_a=na, norm_b=nb, mu_grid=mu_grid)
        series[i], tails[i] = state.partial_sum, state.tail_estimate
        exps[i] = min(lr_exponential_bound(na, nb, x_sites, y_sites, ham.lattice,
                                           mu, consts[mu][0], t)[0]
                      for mu in mu_grid)
    profile.series_bounds = series
    profile.tails = tails
    profile.exp_bounds = exps
    profile.meta = {"mu_grid": tuple(mu_grid), "norm_a": na, "norm_b": nb,
                    "x": tuple(x_sites), "y": tuple(y_sites)}
    return profile
