"""Hamiltonian families: local-term sums, conserved charges, twisted variants.

Every builder returns (TermSum, ChargeSpec).  Terms are stored one local
operator per interaction unit (bond, plaquette, site field), self-adjoint,
with minimized supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import lattice as lat
from .lattice import Lattice
from .operators import BasisIndexer, LocalOperator, embed, op_norm, spin_matrices


@dataclass(frozen=True)
class ChargeSpec:
    """Per-site integer-spectrum charge q_i with a norm bound.

    diagonals[i] holds the eigenvalues of q_i in the local basis (all
    charges used here are diagonal).  additive=False marks models where
    only the parity exp(i*pi*Q) commutes with H, not Q itself; such a
    charge cannot drive twist or LSM constructions.
    """

    lattice: Lattice
    diagonals: tuple
    q_max: float
    additive: bool = True

    def __post_init__(self):
        for i, d in enumerate(self.diagonals):
            d = np.asarray(d)
            if len(d) != self.lattice.local_dims[i]:
                raise ValueError(f"charge diagonal at site {i} has wrong length")
            if np.abs(d - np.rint(d)).max() > 1e-10:
                raise ValueError("charge eigenvalues must be integers")
            if np.abs(d).max() > self.q_max + 1e-12:
                raise ValueError("charge diagonal exceeds q_max")

    def site_operator(self, site: int, indexer: BasisIndexer) -> LocalOperator:
        return embed(np.diag(np.asarray(self.diagonals[site], dtype=float)),
                     [site], indexer)

    def region_diagonal(self, sites, indexer: BasisIndexer) -> np.ndarray:
        """Eigenvalues of sum_{i in sites} q_i on every basis state."""
        configs = indexer.configs()
        out = np.zeros(indexer.dim, dtype=np.int64)
        for s in sites:
            d = np.rint(np.asarray(self.diagonals[s])).astype(np.int64)
            out += d[configs[:, s]]
        return out

    def total_diagonal(self, indexer: BasisIndexer) -> np.ndarray:
        return self.region_diagonal(range(self.lattice.n_sites), indexer)

    def sector_indexer(self, sector: int) -> BasisIndexer:
        if not self.additive:
            raise ValueError("charge is not additively conserved; no sectors")
        return BasisIndexer(self.lattice, charge_diagonals=self.diagonals, sector=sector)


@dataclass(frozen=True)
class TwistSpec:
    """Twist angles (radians, stored mod 2*pi) and cut columns.

    cut_prime defaults to L/2 when left as None.
    """

    theta: float = 0.0
    theta_prime: float = 0.0
    cut: int = 0
    cut_prime: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % (2 * np.pi))
        object.__setattr__(self, "theta_prime", float(self.theta_prime) % (2 * np.pi))


class TermSum:
    """Hamiltonian as a list of local self-adjoint terms H = sum_X h_X."""

    def __init__(self, lattice: Lattice, indexer: BasisIndexer, terms,
                 charge: ChargeSpec | None = None, check: bool = True):
        self.lattice = lattice
        self.indexer = indexer
        self.terms = tuple(terms)
        self.charge = charge
        self._matrix_cache = {}
        if check:
            for t in self.terms:
                if not t.is_hermitian():
                    raise ValueError("Hamiltonian terms must be self-adjoint")

    def matrix(self, sector: int | None = None) -> sp.csr_matrix:
        """Assembled sparse matrix, optionally restricted to a charge sector."""
        if None not in self._matrix_cache:
            full = sp.csr_matrix((self.indexer.dim, self.indexer.dim), dtype=complex)
            for t in self.terms:
                full = full + t.matrix
            self._matrix_cache[None] = full
        if sector is not None and sector not in self._matrix_cache:
            idx = self.sector_indexer(sector).states
            self._matrix_cache[sector] = \
                self._matrix_cache[None][np.ix_(idx, idx)].tocsr()
        return self._matrix_cache[sector]

    def dense(self, sector: int | None = None) -> np.ndarray:
        return self.matrix(sector).toarray()

    def sector_indexer(self, sector: int) -> BasisIndexer:
        if self.charge is None:
            raise ValueError("TermSum has no charge; cannot restrict to a sector")
        if self.indexer.states is not None:
            raise ValueError("TermSum is already sector-restricted")
        return self.charge.sector_indexer(sector)

    def norm_bound(self) -> float:
        """Triangle-inequality upper bound sum_X ||h_X||."""
        return float(sum(op_norm(t) for t in self.terms))

    def map_terms(self, fn) -> "TermSum":
        return TermSum(self.lattice, self.indexer, [fn(t) for t in self.terms],
                       self.charge, check=False)


def strength_and_range(ham: TermSum):
    """(J, R): largest term norm and largest term support diameter."""
    j = max(op_norm(t) for t in ham.terms)
    r = max(ham.lattice.diameter(t.support) for t in ham.terms)
    return float(j), int(r)


def lr_constants(ham: TermSum, mu: float):
    """Light-cone constants (s, v) for decay rate mu.

    s bounds, per site, the sum over touching terms of
    ||h_X|| * |X| * exp(mu * diam(X)); v = 4 s / mu.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    per_site = np.zeros(ham.lattice.n_sites)
    for t in ham.terms:
        w = op_norm(t) * len(t.support) * np.exp(mu * ham.lattice.diameter(t.support))
        for s in t.support:
            per_site[s] += w
    s_const = float(per_site.max())
    return s_const, 4.0 * s_const / mu


# ---------------------------------------------------------------------------
# builders

def _heisenberg_pair(spin: float) -> np.ndarray:
    sx, sy, sz = spin_matrices(spin)
    return np.kron(sx, sx) + np.kron(sy, sy) + np.kron(sz, sz)


def majumdar_ghosh(L: int, j1: float = 1.0, j2: float = 0.5):
    """Spin-1/2 ring with nearest and next-nearest Heisenberg couplings.

    At j2 = j1/2 the two dimer coverings are exact degenerate ground
    states.  L must be even (>= 4) for the dimer coverings to close.
    Charge: q_i = Sz_i + 1/2.
    """
    if L < 4 or L % 2:
        raise ValueError("majumdar_ghosh needs even L >= 4")
    lattice = lat.cycle(L, 2)
    indexer = BasisIndexer(lattice)
    pair = _heisenberg_pair(0.5)
    terms = []
    for i in range(L):
        terms.append(embed(j1 * pair, [i, (i + 1) % L], indexer))
        terms.append(embed(j2 * pair, [i, (i + 2) % L], indexer))
    charge = ChargeSpec(lattice, tuple(np.array([1, 0]) for _ in range(L)), q_max=1.0)
    ham = TermSum(lattice, indexer, terms, charge)
    return ham, charge


def heisenberg_chain(L: int, spin: float = 0.5, j: float = 1.0):
    """Spin-s Heisenberg ring H = j * sum_i S_i . S_{i+1}; q_i = s + Sz_i."""
    if L < 2:
        raise ValueError("heisenberg_chain needs L >= 2")
    two_s = 2 * spin
    if two_s != round(two_s) or spin <= 0:
        raise ValueError("spin must be a positive half-integer")
    d = int(round(two_s)) + 1
    lattice = lat.cycle(L, d)
    indexer = BasisIndexer(lattice)
    pair = _heisenberg_pair(spin)
    terms = [embed(j * pair, [i, (i + 1) % L], indexer) for i in range(L)]
    qdiag = spin + np.diag(spin_matrices(spin)[2]).real
    charge = ChargeSpec(lattice, tuple(qdiag.copy() for _ in range(L)), q_max=float(2 * spin))
    ham = TermSum(lattice, indexer, terms, charge)
    return ham, charge


def gapped_test_chain(L: int, h: float = 2.0):
    """Transverse-field Ising ring H = -sum X_i X_{i+1} - h sum Z_i.

    For h > 1 this has a unique ground state with an order-one gap; it is
    the workhorse for correlation-decay and transport experiments.  The
    returned charge counts down-spins but is only parity-conserved
    (additive=False), so it cannot feed twist constructions.
    """
    if L < 2:
        raise ValueError("gapped_test_chain needs L >= 2")
    lattice = lat.cycle(L, 2)
    indexer = BasisIndexer(lattice)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    terms = []
    for i in range(L):
        terms.append(embed(-np.kron(x, x), [i, (i + 1) % L], indexer))
        terms.append(embed(-h * z, [i], indexer))
    charge = ChargeSpec(lattice, tuple(np.array([0, 1]) for _ in range(L)),
                        q_max=1.0, additive=False)
    ham = TermSum(lattice, indexer, terms, charge)
    return ham, charge


def polarized_chain(L: int, h: float = 4.0):
    """Field-only ring H = -h sum Sz_i; integer-filling control model."""
    if L < 2:
        raise ValueError("polarized_chain needs L >= 2")
    lattice = lat.cycle(L, 2)
    indexer = BasisIndexer(lattice)
    _, _, sz = spin_matrices(0.5)
    terms = [embed(-h * sz, [i], indexer) for i in range(L)]
    charge = ChargeSpec(lattice, tuple(np.array([1, 0]) for _ in range(L)), q_max=1.0)
    return TermSum(lattice, indexer, terms, charge), charge


def xxz_torus(Lx: int, Ly: int, jxy: float = 1.0, jz: float = 1.0,
              field_scale: float = 2.0):
    """XXZ model on an Lx-by-Ly torus with a frozen quasi-random field pattern.

    H = sum_<ij> [ jxy (Sx Sx + Sy Sy) + jz Sz Sz ] + sum_i h_i Sz_i with
    h_i = field_scale * cos(2*pi * i * (2 - golden ratio)).  The fields
    break translation symmetry and keep every charge sector gapped over the
    whole flux torus at desk sizes; q_i = Sz_i + 1/2.
    """
    lattice = lat.torus(Lx, Ly, 2)
    indexer = BasisIndexer(lattice)
    n = lattice.n_sites
    fields = field_scale * np.cos(2 * np.pi * np.arange(n) * 0.3819660112501051)
    sx, sy, sz = spin_matrices(0.5)
    bond = jxy * (np.kron(sx, sx) + np.kron(sy, sy)) + jz * np.kron(sz, sz)
    terms = []
    for s in range(n):
        x, y = lattice.coords[s]
        right = lattice.site_at((x + 1) % Lx, y)
        up = lattice.site_at(x, (y + 1) % Ly)
        terms.append(embed(bond, [s, right], indexer))
        terms.append(embed(bond, [s, up], indexer))
        terms.append(embed(fields[s] * sz, [s], indexer))
    charge = ChargeSpec(lattice, tuple(np.array([1, 0]) for _ in range(n)), q_max=1.0)
    return TermSum(lattice, indexer, terms, charge), charge


# ---------------------------------------------------------------------------
# twisted Hamiltonians

def _left_region(lattice: Lattice, cut: int, width: int) -> list:
    """Sites whose first coordinate lies in [cut, cut + width) mod L."""
    L = lattice.cycle_period
    cols = [(cut + k) % L for k in range(width)]
    return [s for s in lattice.sites() if lattice.coords[s][0] in cols]


def _conjugate_by_phases(term: LocalOperator, phase_exp: np.ndarray) -> LocalOperator:
    """exp(i a Q_region) h exp(-i a Q_region) for diagonal charge phases.

    The support cannot grow (phases outside the support cancel exactly) so
    the recorded support is kept.
    """
    d = sp.diags(phase_exp)
    mat = (d @ term.matrix @ d.conj()).tocsr()
    return LocalOperator(mat, term.support, term.indexer, None, None)


def _near(lattice: Lattice, support, cut: int, radius: int) -> bool:
    """Support within graph distance `radius` of the column at `cut`."""
    col = lattice.column(cut)
    return lattice.set_distance(support, col) <= radius


def _straddles(lattice: Lattice, support, cut: int, radius: int) -> bool:
    """Support has sites on both sides of the cut edge (columns cut-1 | cut)."""
    L = lattice.cycle_period
    firsts = {(lattice.coords[s][0] - cut) % L for s in support}
    return bool(firsts & set(range(radius))) and bool(firsts & set(range(L - radius, L)))


def twisted_hamiltonian(ham: TermSum, charge: ChargeSpec, twist: TwistSpec) -> TermSum:
    """Two-angle twisted Hamiltonian on a lattice with a cycle direction.

    Terms near the first cut are conjugated by exp(+i theta Q_left), terms
    near the second cut by exp(-i theta_prime Q_left); Q_left is the charge
    on the half ring starting at the first cut.  "Near" means within graph
    distance R (the interaction range) of the cut column.  Requires
    L > 4R so the two cut neighborhoods cannot overlap.
    """
    lattice = ham.lattice
    if lattice.cycle_period is None:
        raise ValueError("twisting needs a lattice with a cycle direction")
    if not charge.additive:
        raise ValueError("twisting needs an additively conserved charge")
    L = lattice.cycle_period
    _, radius = strength_and_range(ham)
    if L <= 4 * radius:
        raise ValueError(f"cycle length {L} too short for range {radius}: "
                         "cut neighborhoods overlap (need L > 4R)")
    cut = twist.cut % L
    cut_prime = (cut + L // 2) % L if twist.cut_prime is None else twist.cut_prime % L
    left = _left_region(lattice, cut, L // 2)
    qleft = charge.region_diagonal(left, ham.indexer).astype(float)

    new_terms = []
    for t in ham.terms:
        near0 = _near(lattice, t.support, cut, radius)
        near1 = _near(lattice, t.support, cut_prime, radius)
        if near0 and near1:
            # A support can sit within R of both cut columns once L <= 6R.
            # Such a term straddles at most one of the two cut edges (its
            # diameter is <= R < L/2), so classify it by the edge it crosses;
            # a term crossing neither edge commutes with the conjugations of
            # any term-wise conserved charge and is left untouched.
            near0 = _straddles(lattice, t.support, cut, radius)
            near1 = _straddles(lattice, t.support, cut_prime, radius)
        if near0 and twist.theta:
            new_terms.append(_conjugate_by_phases(t, np.exp(1j * twist.theta * qleft)))
        elif near1 and twist.theta_prime:
            new_terms.append(_conjugate_by_phases(t, np.exp(-1j * twist.theta_prime * qleft)))
        else:
            new_terms.append(t)
    return TermSum(lattice, ham.indexer, new_terms, charge, check=False)


def _direction_geometry(lattice: Lattice, coord: int):
    """(period, first-coordinate accessor) for one torus direction."""
    if coord == 0:
        return lattice.cycle_period, lambda s: lattice.coords[s][0]
    ys = [c[1] for c in lattice.coords]
    return max(ys) + 1, lambda s: lattice.coords[s][1]


def _crossing_mask(lattice: Lattice, terms, coord: int, cut: int, radius: int):
    """Which terms straddle the cut edge of one direction."""
    L, first = _direction_geometry(lattice, coord)
    mask = []
    for t in terms:
        firsts = {(first(s) - cut) % L for s in t.support}
        mask.append(bool(firsts & set(range(radius)))
                    and bool(firsts & set(range(L - radius, L))))
    return mask


def _half_charge_diagonal(ham: TermSum, charge: ChargeSpec, coord: int) -> np.ndarray:
    lattice = ham.lattice
    L, first = _direction_geometry(lattice, coord)
    half = [s for s in lattice.sites() if first(s) < L // 2]
    return charge.region_diagonal(half, ham.indexer).astype(float)


def _twist_direction(ham: TermSum, charge: ChargeSpec, coord: int, angle: float,
                     angle_prime: float, radius: int) -> TermSum:
    """Twist terms crossing the cut(s) orthogonal to one torus direction.

    coord 0 twists the x cuts (columns 0 and Lx/2) with the charge on the
    left half; coord 1 the y cuts with the charge on the bottom half.  Only
    cut-crossing terms are conjugated, which coincides with the ball-of-
    radius-R rule whenever terms conserve their local charge, and stays
    well defined down to L = 2R + 1.
    """
    lattice = ham.lattice
    L, _ = _direction_geometry(lattice, coord)
    if L < 2 * radius + 1:
        raise ValueError(f"period {L} too short for range {radius} twists")
    cross0 = _crossing_mask(lattice, ham.terms, coord, 0, radius)
    cross1 = _crossing_mask(lattice, ham.terms, coord, L // 2, radius)
    qhalf = _half_charge_diagonal(ham, charge, coord)
    new_terms = []
    for t, c0, c1 in zip(ham.terms, cross0, cross1):
        if angle and c0:
            new_terms.append(_conjugate_by_phases(t, np.exp(1j * angle * qhalf)))
        elif angle_prime and c1:
            new_terms.append(_conjugate_by_phases(t, np.exp(-1j * angle_prime * qhalf)))
        else:
            new_terms.append(t)
    return TermSum(lattice, ham.indexer, new_terms, charge, check=False)


def flux_torus_hamiltonian(ham: TermSum, charge: ChargeSpec, theta: float, phi: float,
                           theta_prime: float = 0.0, phi_prime: float = 0.0) -> TermSum:
    """Hamiltonian with fluxes threaded through both torus directions.

    theta (and the auxiliary theta_prime) twist terms crossing the x cuts
    using the charge on the left half; phi (and phi_prime) do the same in
    the y direction with the charge on the bottom half.
    """
    lattice = ham.lattice
    if lattice.cycle_period is None or len({c[1] for c in lattice.coords}) < 2:
        raise ValueError("flux insertion in two directions needs a torus lattice")
    if not charge.additive:
        raise ValueError("flux insertion needs an additively conserved charge")
    _, radius = strength_and_range(ham)
    out = _twist_direction(ham, charge, 0, theta, theta_prime, radius)
    out = _twist_direction(out, charge, 1, phi, phi_prime, radius)
    return out


def flux_torus_partial(ham: TermSum, charge: ChargeSpec, theta: float, phi: float,
                       direction: int) -> sp.csr_matrix:
    """Exact derivative of the flux Hamiltonian with respect to one angle.

    Each twisted matrix element carries exp(i angle (q_a - q_b)), so the
    derivative is i [Q_half, sum of that direction's crossing terms], with
    the terms evaluated at the current angles.
    """
    if direction not in (0, 1):
        raise ValueError("direction must be 0 (theta) or 1 (phi)")
    _, radius = strength_and_range(ham)
    twisted = flux_torus_hamiltonian(ham, charge, theta, phi)
    mask = _crossing_mask(ham.lattice, ham.terms, direction, 0, radius)
    total = sp.csr_matrix((ham.indexer.dim, ham.indexer.dim), dtype=complex)
    for t, crossing in zip(twisted.terms, mask):
        if crossing:
            total = total + t.matrix
    qhalf = _half_charge_diagonal(ham, charge, direction)
    d = sp.diags(qhalf)
    return (1j * (d @ total - total @ d)).tocsr()


# ---------------------------------------------------------------------------
# registry used by the runner

MODEL_BUILDERS = {
    "majumdar_ghosh": majumdar_ghosh,
    "heisenberg_chain": heisenberg_chain,
    "gapped_test_chain": gapped_test_chain,
    "polarized_chain": polarized_chain,
    "xxz_torus": xxz_torus,
}


def build_model(spec: dict):
    """Build (TermSum, ChargeSpec) from a plain-dict model description."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in MODEL_BUILDERS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(MODEL_BUILDERS)}")
    return MODEL_BUILDERS[kind](**spec)
