"""Low-spectrum solvers: ground states, gaps, symmetry resolution, spectral flow."""

from __future__ import annotations

import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, NotAnEigenvectorError
from .models import TermSum
from .operators import BasisIndexer, LocalOperator

DENSE_EIG_THRESHOLD = 4096
DEGENERACY_TOL = 1e-8
RESIDUAL_TOL = 1e-9
DEFAULT_SEED = 7


@dataclass
class SpectralResult:
    """Lowest eigenpairs of a Hamiltonian (possibly within one charge sector)."""

    energies: np.ndarray
    states: np.ndarray
    gap: float
    degenerate: bool
    sector: int | None = None
    indexer: BasisIndexer | None = None
    quantum_numbers: dict = field(default_factory=dict)

    @property
    def ground_state(self) -> np.ndarray:
        return self.states[:, 0]

    def ground_block(self, tol: float = DEGENERACY_TOL):
        """Columns spanning the (near-)degenerate lowest level."""
        scale = max(1.0, abs(self.energies[0]))
        q = int(np.sum(self.energies - self.energies[0] < tol * scale))
        return self.states[:, :q]

    def to_json_dict(self) -> dict:
        return {
            "energies": [float(e) for e in self.energies],
            "gap": float(self.gap),
            "degenerate": bool(self.degenerate),
            "sector": self.sector,
            "quantum_numbers": {k: _jsonify(v) for k, v in self.quantum_numbers.items()},
        }


def _jsonify(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, np.ndarray):
        return [_jsonify(x) for x in v.tolist()]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _as_matrix(ham, sector=None):
    if isinstance(ham, TermSum):
        mat = ham.matrix(sector)
        indexer = ham.indexer if sector is None else ham.sector_indexer(sector)
        bound = ham.norm_bound()
        return mat, indexer, bound
    mat = ham if sp.issparse(ham) else sp.csr_matrix(ham)
    if sector is not None:
        raise ValueError("sector restriction needs a TermSum with a charge")
    return mat, None, float(abs(mat).sum(axis=1).max())


def fix_phases(states: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude component real positive.

    Pins the arbitrary eigensolver phase so that overlaps, derivatives and
    loop phases are reproducible across nearly identical inputs.
    """
    states = np.array(states, dtype=complex, copy=True)
    lead_idx = np.argmax(np.abs(states), axis=0)
    lead = states[lead_idx, np.arange(states.shape[1])]
    safe = np.where(np.abs(lead) == 0.0, 1.0, lead)
    states *= (np.abs(safe) / safe)[None, :]
    return states


def _dense_eigh(mat: sp.spmatrix):
    arr = mat.toarray()
    if np.abs(arr.imag).max() == 0.0:
        w, v = np.linalg.eigh(arr.real)
        return w, fix_phases(v)
    w, v = np.linalg.eigh(arr)
    return w, fix_phases(v)


def _block_lanczos_lowest(mat: sp.spmatrix, k: int, norm_scale: float,
                          seed: int = DEFAULT_SEED, tol: float = 1e-10,
                          max_basis: int = 800):
    """Lowest k eigenpairs by block Lanczos with full reorthogonalization.

    The block size equals k so exact degeneracies up to multiplicity k are
    resolved; the start block is seeded for reproducibility.  The projected
    matrix is extended incrementally, one block row/column per iteration.
    """
    dim = mat.shape[0]
    rng = np.random.default_rng(seed)
    block = rng.standard_normal((dim, k)) + 0j
    block, _ = np.linalg.qr(block)
    limit = min(dim, max(max_basis, 6 * k))
    span = np.empty((dim, limit + k), dtype=complex)
    h_span = np.empty((dim, limit + k), dtype=complex)
    proj = np.zeros((limit + k, limit + k), dtype=complex)
    m = 0
    while True:
        w = mat @ block
        span[:, m:m + k] = block
        h_span[:, m:m + k] = w
        proj[:m + k, m:m + k] = span[:, :m + k].conj().T @ w
        proj[m:m + k, :m] = proj[:m, m:m + k].conj().T
        m += k
        active = 0.5 * (proj[:m, :m] + proj[:m, :m].conj().T)
        vals, vecs = np.linalg.eigh(active)
        ritz_vals = vals[:k]
        ritz_vecs = span[:, :m] @ vecs[:, :k]
        resid = np.linalg.norm(h_span[:, :m] @ vecs[:, :k] - ritz_vecs * ritz_vals,
                               axis=0)
        if resid.max() <= tol * max(1.0, norm_scale):
            return ritz_vals, fix_phases(ritz_vecs)
        if m + k > limit:
            raise ConvergenceError(
                f"block Lanczos basis limit {limit} reached", residual=float(resid.max()))
        # two-pass classical Gram-Schmidt against the whole basis
        r = w - span[:, :m] @ (span[:, :m].conj().T @ w)
        r -= span[:, :m] @ (span[:, :m].conj().T @ r)
        q, rr = np.linalg.qr(r)
        # replace directions lost to rank deficiency with fresh random ones
        dead = np.abs(np.diag(rr)) < 1e-12
        if dead.any():
            fresh = rng.standard_normal((dim, int(dead.sum()))) + 0j
            fresh -= span[:, :m] @ (span[:, :m].conj().T @ fresh)
            fresh -= q @ (q.conj().T @ fresh)
            q[:, dead] = np.linalg.qr(fresh)[0]
        block = q


def ground_state(ham, k: int = 2, sector: int | None = None,
                 dense_threshold: int = DENSE_EIG_THRESHOLD,
                 seed: int = DEFAULT_SEED) -> SpectralResult:
    """k lowest eigenpairs of a TermSum (or matrix).

    Dense diagonalization below `dense_threshold`, block Lanczos with full
    reorthogonalization (deterministic seeded start block) at or above it.
    With `sector` given, the solve happens inside that charge block and the
    reported energies are the block energies.
    """
    if k < 2:
        raise ValueError("need k >= 2 to report a gap")
    mat, indexer, norm_bound = _as_matrix(ham, sector)
    dim = mat.shape[0]
    if k > dim:
        raise ValueError(f"requested {k} eigenpairs from dimension {dim}")
    if dim < dense_threshold:
        w, v = _dense_eigh(mat)
        w, v = w[:k], v[:, :k]
    else:
        w, v = _block_lanczos_lowest(mat.tocsr(), k, norm_bound, seed=seed)

    residuals = np.linalg.norm(mat @ v - v * w, axis=0)
    if residuals.max() > RESIDUAL_TOL * max(1.0, norm_bound):
        raise ConvergenceError("eigenpair residual above tolerance",
                               residual=float(residuals.max()))
    gap = float(w[1] - w[0])
    degenerate = gap < DEGENERACY_TOL * max(1.0, norm_bound)
    return SpectralResult(np.asarray(w, dtype=float), v, gap, degenerate,
                          sector=sector, indexer=indexer)


def full_spectrum(ham, sector: int | None = None) -> SpectralResult:
    """Complete dense eigenbasis; required by spectral filters and transport."""
    mat, indexer, norm_bound = _as_matrix(ham, sector)
    w, v = _dense_eigh(mat)
    gap = float(w[1] - w[0])
    return SpectralResult(w.astype(float), v, gap,
                          gap < DEGENERACY_TOL * max(1.0, norm_bound),
                          sector=sector, indexer=indexer)


def translation_eigenvalue(psi: np.ndarray, translation, tol: float = 1e-8) -> complex:
    """Eigenvalue z (|z| = 1) of the translation operator on state psi.

    Raises NotAnEigenvectorError when psi is not a translation eigenvector,
    e.g. a raw vector from a degenerate block; resolve the block first with
    simultaneous_block_diagonalize.
    """
    t_mat = translation.matrix if isinstance(translation, LocalOperator) else translation
    tpsi = t_mat @ psi
    z = np.vdot(psi, tpsi) / np.vdot(psi, psi)
    if abs(z) < 1 - tol:
        raise NotAnEigenvectorError(
            f"|<psi, T psi>| = {abs(z):.6f} < 1; state mixes translation sectors")
    return complex(z / abs(z))


def simultaneous_block_diagonalize(result: SpectralResult, ops,
                                   tol: float = DEGENERACY_TOL) -> SpectralResult:
    """Rediagonalize commuting symmetries inside each degenerate energy cluster.

    ops is a list of normal operators (unitary or Hermitian) commuting with
    the Hamiltonian and with each other.  Returned states carry sharp
    eigenvalues of every op, recorded in quantum_numbers under the ops'
    list positions.
    """
    import scipy.linalg as sla

    w = result.energies
    v = result.states.astype(complex).copy()
    scale = max(1.0, float(np.abs(w).max()))
    labels = [np.zeros(len(w), dtype=complex) for _ in ops]

    def energy_blocks():
        start = 0
        for i in range(1, len(w) + 1):
            if i == len(w) or w[i] - w[i - 1] > tol * scale:
                yield start, i
                start = i

    for lo, hi in energy_blocks():
        sub = [(lo, hi)]
        for op_i, op in enumerate(ops):
            mat = op.matrix if isinstance(op, LocalOperator) else op
            next_sub = []
            for a, b in sub:
                block = v[:, a:b].conj().T @ (mat @ v[:, a:b])
                # Schur of a normal matrix has diagonal T and unitary Z
                t_mat, z = sla.schur(block, output="complex")
                vals = np.diag(t_mat)
                order = np.lexsort((np.round(vals.imag, 8), np.round(vals.real, 8)))
                vals, z = vals[order], z[:, order]
                v[:, a:b] = v[:, a:b] @ z
                labels[op_i][a:b] = vals
                start = a
                for i in range(a + 1, b + 1):
                    if i == b or abs(vals[i - a] - vals[i - 1 - a]) > 1e-6:
                        next_sub.append((start, i))
                        start = i
            sub = next_sub
    qn = dict(result.quantum_numbers)
    qn.update({f"op{i}": labels[i] for i in range(len(ops))})
    v = fix_phases(v)
    return SpectralResult(w.copy(), v, result.gap, result.degenerate,
                          result.sector, result.indexer, qn)


@dataclass
class SpectralFlowResult:
    grid: np.ndarray
    results: list
    ground_overlaps: np.ndarray

    def min_gap(self) -> float:
        return float(min(r.gap for r in self.results))

    def energies(self) -> np.ndarray:
        return np.array([r.energies for r in self.results])


def spectral_flow(family, grid, k: int = 2, sector: int | None = None,
                  threads: int = 1, **kwargs) -> SpectralFlowResult:
    """Lowest k levels of family(theta) over a parameter grid.

    family: callable theta -> TermSum (or matrix).  Results are assembled
    in grid order regardless of the worker pool; adjacent ground-state
    overlaps |<psi0(i), psi0(i+1)>| are reported as continuity diagnostics.
    """
    grid = np.asarray(grid, dtype=float)

    def solve(theta):
        return ground_state(family(theta), k=k, sector=sector, **kwargs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, grid))
    else:
        results = [solve(t) for t in grid]
    overlaps = np.array([
        abs(np.vdot(results[i].ground_state, results[i + 1].ground_state))
        for i in range(len(results) - 1)
    ]) if len(results) > 1 else np.empty(0)
    return SpectralFlowResult(grid, results, overlaps)


# ---------------------------------------------------------------------------
# state file format: header = two little-endian uint64 (dimension, count),
# body = count * dimension pairs of little-endian float64 (re, im), state major.

def save_states(path, states: np.ndarray) -> None:
    states = np.asarray(states, dtype=complex)
    if states.ndim == 1:
        states = states[:, None]
    dim, count = states.shape
    interleaved = np.empty((count, dim, 2))
    for c in range(count):
        interleaved[c, :, 0] = states[:, c].real
        interleaved[c, :, 1] = states[:, c].imag
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", dim, count))
        fh.write(interleaved.astype("<f8").tobytes())


def load_states(path) -> np.ndarray:
    with open(path, "rb") as fh:
        dim, count = struct.unpack("<QQ", fh.read(16))
        body = np.frombuffer(fh.read(), dtype="<f8")
    if body.size != dim * count * 2:
        raise ValueError("state file body does not match its header")
    body = body.reshape(count, dim, 2)
    return (body[:, :, 0] + 1j * body[:, :, 1]).T.copy()


def result_to_json(result: SpectralResult) -> str:
    return json.dumps(result.to_json_dict(), indent=2, sort_keys=True)
