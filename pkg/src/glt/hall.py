"""Flux-torus curvature, Chern numbers, and transport loop phases.

Ground states on an N-by-N grid of flux angles feed a gauge-invariant
plaquette phase (the argument of the four-link overlap product); the total
over the torus is 2 pi times an integer by construction, and dividing by
2 pi gives the Chern number.  Quasi-adiabatic transport around small flux
loops reproduces the same curvature as a phase, which is the transverse
conductance in natural units.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GapClosureError, QuantizationError, UnreliablePhaseError
from .filters_qa import QaFilter, qa_transport
from .models import (ChargeSpec, TermSum, flux_torus_hamiltonian,
                     flux_torus_partial)
from .spectral import ground_state


class FluxTorusFamily:
    """Lattice Hamiltonian family over the two flux angles, in one sector.

    Wraps flux_torus_hamiltonian; the angle derivatives are the exact
    commutators of the crossing terms with the half-system charge.
    """

    def __init__(self, ham: TermSum, charge: ChargeSpec, sector: int | None = None):
        self.base = ham
        self.charge = charge
        self.sector = sector
        if sector is not None:
            self._states = ham.sector_indexer(sector).states
            self._dim = len(self._states)
        else:
            self._states = None
            self._dim = ham.indexer.dim

    @property
    def dim(self) -> int:
        return self._dim

    def _restrict(self, mat):
        if self._states is None:
            return mat.toarray() if hasattr(mat, "toarray") else np.asarray(mat)
        sub = mat[np.ix_(self._states, self._states)]
        return sub.toarray() if hasattr(sub, "toarray") else np.asarray(sub)

    def term_sum(self, theta: float, phi: float) -> TermSum:
        return flux_torus_hamiltonian(self.base, self.charge, theta, phi)

    def hamiltonian(self, theta: float, phi: float) -> np.ndarray:
        return self.term_sum(theta, phi).dense(self.sector)

    def d_theta(self, theta: float, phi: float) -> np.ndarray:
        return self._restrict(flux_torus_partial(self.base, self.charge,
                                                 theta, phi, 0))

    def d_phi(self, theta: float, phi: float) -> np.ndarray:
        return self._restrict(flux_torus_partial(self.base, self.charge,
                                                 theta, phi, 1))


class TwoLevelFamily:
    """Validation family H = d(theta, phi) . sigma wrapping the sphere once.

    d = (sin theta, sin phi, mass + cos theta + cos phi).  For |mass| < 2
    the lower band carries Chern number +-1; mass = sqrt(pi) - 2 places
    curvature exactly 1/(2 pi) at the origin, handy for conductance checks.
    The closed-form lower-band curvature is exposed as the test oracle.
    """

    SPHERE_WRAP_MASS = float(np.sqrt(np.pi) - 2.0)

    def __init__(self, mass: float = 1.0):
        self.mass = float(mass)
        self.dim = 2
        self._sigma = (np.array([[0, 1], [1, 0]], dtype=complex),
                       np.array([[0, -1j], [1j, 0]], dtype=complex),
                       np.array([[1, 0], [0, -1]], dtype=complex))

    def d_vector(self, theta, phi):
        return np.array([np.sin(theta), np.sin(phi),
                         self.mass + np.cos(theta) + np.cos(phi)])

    def hamiltonian(self, theta, phi):
        d = self.d_vector(theta, phi)
        return sum(di * si for di, si in zip(d, self._sigma))

    def d_theta(self, theta, phi):
        return np.cos(theta) * self._sigma[0] - np.sin(theta) * self._sigma[2]

    def d_phi(self, theta, phi):
        return np.cos(phi) * self._sigma[1] - np.sin(phi) * self._sigma[2]

    def exact_curvature(self, theta, phi) -> float:
        """Lower-band curvature density in the plaquette-phase convention."""
        d = self.d_vector(theta, phi)
        dth = np.array([np.cos(theta), 0.0, -np.sin(theta)])
        dph = np.array([0.0, np.cos(phi), -np.sin(phi)])
        n = np.linalg.norm(d)
        return float(-0.5 * np.dot(d, np.cross(dth, dph)) / n ** 3)


class ConstantFamily:
    """Flux-independent family; every curvature and loop phase vanishes."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.dim = self.matrix.shape[0]

    def hamiltonian(self, theta, phi):
        return self.matrix

    def d_theta(self, theta, phi):
        return np.zeros_like(self.matrix)

    def d_phi(self, theta, phi):
        return np.zeros_like(self.matrix)


@dataclass
class FluxGrid:
    """Ground states and plaquette curvatures over the flux torus."""

    n: int
    angles: np.ndarray
    states: np.ndarray               # (n, n, dim)
    plaquette_phases: np.ndarray     # (n, n) radians in (-pi, pi]
    chern: float
    min_gap: float
    under_resolved: bool
    meta: dict = field(default_factory=dict)

    def phase_sum(self) -> float:
        return float(self.plaquette_phases.sum())


def _solve_grid_states(family, n, threads):
    angles = 2.0 * np.pi * np.arange(n) / n
    dim = family.dim
    states = np.empty((n, n, dim), dtype=complex)
    gaps = np.empty((n, n))
    points = [(a, b) for a in range(n) for b in range(n)]

    def solve(point):
        a, b = point
        mat = family.hamiltonian(angles[a], angles[b])
        res = ground_state(mat, k=2)
        return a, b, res.ground_state, res.gap

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(solve, points))
    else:
        solved = [solve(p) for p in points]
    for a, b, psi, gap in solved:
        states[a, b] = psi
        gaps[a, b] = gap
    return angles, states, gaps


def berry_curvature_grid(family, n: int, gap_tol: float = 1e-8,
                         threads: int = 1) -> FluxGrid:
    """Plaquette curvature field and Chern number on an n-by-n flux grid.

    Each plaquette phase is the argument of the cyclic product of the four
    link overlaps around it, which is invariant under per-state phase
    choices.  A plaquette phase on the branch boundary |F| >= pi flags
    under-resolution; a gap below gap_tol raises GapClosureError.
    """
    if n < 2:
        raise ValueError("grid must have at least 2 points per direction")
    angles, states, gaps = _solve_grid_states(family, n, threads)
    if gaps.min() < gap_tol:
        a, b = np.unravel_index(int(gaps.argmin()), gaps.shape)
        raise GapClosureError("spectral gap closed on the flux grid",
                              location=(float(angles[a]), float(angles[b])),
                              gap=float(gaps.min()))
    phases = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            a1, b1 = (a + 1) % n, (b + 1) % n
            prod = (np.vdot(states[a, b], states[a1, b])
                    * np.vdot(states[a1, b], states[a1, b1])
                    * np.vdot(states[a1, b1], states[a, b1])
                    * np.vdot(states[a, b1], states[a, b]))
            phases[a, b] = np.angle(prod)
    chern = float(phases.sum() / (2.0 * np.pi))
    under = bool(np.abs(phases).max() >= np.pi - 1e-12)
    return FluxGrid(n, angles, states, phases, chern, float(gaps.min()), under)


def chern_number(grid: FluxGrid, tol: float = 0.1):
    """(integer, deviation) from the plaquette phase sum."""
    nearest = int(np.rint(grid.chern))
    deviation = float(abs(grid.chern - nearest))
    if deviation > tol:
        raise QuantizationError("curvature sum is not integer within tolerance",
                                value=grid.chern, deviation=deviation)
    return nearest, deviation


@dataclass
class LoopPhaseResult:
    center: tuple
    radius: float
    orientation: int
    n_steps: int
    phase: float
    overlap: float
    curvature_reference: float | None = None
    comparison: float | None = None

    def curvature_estimate(self) -> float:
        """Loop phase divided by enclosed area."""
        return self.phase / (np.pi * self.radius ** 2)


def qa_loop_phase(family, center, radius: float, n_steps: int,
                  filt: QaFilter, orientation: int = +1,
                  curvature_reference: float | None = None,
                  min_overlap: float = 0.99) -> LoopPhaseResult:
    """Transport phase around a circle in flux space.

    orientation +1 traverses the loop in the sense whose phase matches the
    plaquette-product curvature sign convention (clockwise in the
    (theta, phi) plane); -1 reverses it.  The transported state must
    return with overlap >= min_overlap or the phase is rejected.
    """
    th0, ph0 = center

    def angles_at(s):
        a = 2.0 * np.pi * s
        return (th0 + radius * np.cos(a), ph0 - orientation * radius * np.sin(a), a)

    def ham_path(s):
        th, ph, a = angles_at(s)
        dth_ds = -radius * np.sin(a) * 2.0 * np.pi
        dph_ds = -orientation * radius * np.cos(a) * 2.0 * np.pi
        h = family.hamiltonian(th, ph)
        dh = dth_ds * family.d_theta(th, ph) + dph_ds * family.d_phi(th, ph)
        return h, dh

    res = qa_transport(ham_path, n_steps, filt)
    if res.fidelity < min_overlap:
        raise UnreliablePhaseError("loop transport overlap too small for a phase",
                                   overlap=res.fidelity)
    comparison = None
    if curvature_reference is not None:
        comparison = float(abs(res.phase - curvature_reference * np.pi * radius ** 2))
    return LoopPhaseResult(tuple(center), float(radius), orientation, n_steps,
                           res.phase, res.fidelity, curvature_reference, comparison)


@dataclass
class HallConductanceResult:
    sigma_xy: float
    nearest_integer: int
    certificate: float
    loop: LoopPhaseResult
    grid_chern: float
    grid_phase_sum: float
    stokes_integer_deviation: float
    min_gap: float

    def to_json_dict(self) -> dict:
        return {
            "sigma_xy": self.sigma_xy,
            "nearest_integer": self.nearest_integer,
            "certificate": self.certificate,
            "loop_phase": self.loop.phase,
            "loop_radius": self.loop.radius,
            "grid_chern": self.grid_chern,
            "grid_phase_sum": self.grid_phase_sum,
            "stokes_integer_deviation": self.stokes_integer_deviation,
            "min_gap": self.min_gap,
        }


def hall_conductance(family, n: int, filt: QaFilter | None = None,
                     loop_radius: float | None = None, loop_steps: int = 128,
                     threads: int = 1) -> HallConductanceResult:
    """Transverse conductance estimate in natural conductance-quantum units.

    The local curvature at the flux origin comes from a small transport
    loop; scaled by the torus area over 2 pi it is the conductance, whose
    distance to the nearest integer is the certificate.  The curvature
    grid over the same family provides the global consistency check: the
    plaquette phases must sum to 2 pi times an integer.
    """
    grid = berry_curvature_grid(family, n, threads=threads)
    if loop_radius is None:
        loop_radius = 2.0 * np.pi / n
    if filt is None:
        filt = QaFilter(max(grid.min_gap / 4.0, 1e-9))
    loop = qa_loop_phase(family, (0.0, 0.0), loop_radius, loop_steps, filt)
    curvature_origin = loop.phase / (np.pi * loop_radius ** 2)
    sigma = 2.0 * np.pi * curvature_origin
    nearest = int(np.rint(sigma))
    certificate = float(abs(sigma - nearest))
    phase_sum = grid.phase_sum()
    stokes_dev = float(abs(phase_sum / (2.0 * np.pi)
                           - np.rint(phase_sum / (2.0 * np.pi))))
    return HallConductanceResult(float(sigma), nearest, certificate, loop,
                                 grid.chern, phase_sum, stokes_dev,
                                 grid.min_gap)
