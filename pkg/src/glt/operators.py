"""Tensor-product operator algebra on a lattice Hilbert space.

Basis convention: a configuration assigns each site a local state index;
the linear index is lexicographic over site labels with the last site
least significant (site 0 is the most significant digit).  This ordering
is frozen so that stored eigenvector files remain comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError
from .lattice import Lattice

DENSE_NORM_THRESHOLD = 4096
_HERMITICITY_TOL = 1e-12


def spin_matrices(s: float):
    """Standard spin-s matrices (Sx, Sy, Sz), dimension 2s+1.

    Sz is diagonal with entries s, s-1, ..., -s.  Raises for s not a
    nonnegative half-integer.
    """
    two_s = 2 * s
    if two_s != round(two_s) or s < 0:
        raise ValueError(f"spin must be a nonnegative half-integer, got {s}")
    dim = int(round(two_s)) + 1
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    raise_amp = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.zeros((dim, dim), dtype=complex)
    s_plus[np.arange(dim - 1), np.arange(1, dim)] = raise_amp
    s_minus = s_plus.conj().T
    sx = 0.5 * (s_plus + s_minus)
    sy = -0.5j * (s_plus - s_minus)
    return sx, sy, sz


class BasisIndexer:
    """Bijection between site configurations and linear indices.

    With charge_diagonals and sector given, the basis is restricted to the
    configurations whose summed per-site charge equals the sector value;
    indices then run over that subset only.
    """

    def __init__(self, lattice: Lattice, charge_diagonals=None, sector=None):
        self.lattice = lattice
        dims = np.array(lattice.local_dims, dtype=np.int64)
        self.local_dims = dims
        strides = np.ones(len(dims), dtype=np.int64)
        for k in range(len(dims) - 2, -1, -1):
            strides[k] = strides[k + 1] * dims[k + 1]
        self.strides = strides
        self.full_dim = int(strides[0] * dims[0]) if len(dims) else 1
        self.sector = sector
        if sector is None:
            self.states = None
            self.dim = self.full_dim
        else:
            if charge_diagonals is None:
                raise ValueError("sector restriction needs per-site charge diagonals")
            total = np.zeros(self.full_dim, dtype=np.int64)
            idx = np.arange(self.full_dim)
            for k, d in enumerate(dims):
                diag = np.asarray(charge_diagonals[k])
                rounded = np.rint(diag).astype(np.int64)
                if np.abs(diag - rounded).max() > 1e-10:
                    raise ValueError("charge diagonals must be integer-valued")
                total += rounded[(idx // strides[k]) % d]
            self.states = np.nonzero(total == sector)[0]
            self.dim = len(self.states)
            if self.dim == 0:
                raise ValueError(f"charge sector {sector} is empty")
        self._configs = None

    def configs(self) -> np.ndarray:
        """(dim, n_sites) array of local state indices for every basis state."""
        if self._configs is None:
            idx = self.states if self.states is not None else np.arange(self.full_dim)
            cols = [((idx // self.strides[k]) % d) for k, d in enumerate(self.local_dims)]
            self._configs = np.stack(cols, axis=1).astype(np.int64)
        return self._configs

    def full_index(self, config) -> int:
        return int(np.dot(np.asarray(config, dtype=np.int64), self.strides))

    def position_of_full(self, full_indices):
        """Map full-space indices to positions in this basis; -1 where absent."""
        full_indices = np.asarray(full_indices, dtype=np.int64)
        if self.states is None:
            return full_indices
        pos = np.searchsorted(self.states, full_indices)
        pos = np.clip(pos, 0, self.dim - 1)
        ok = self.states[pos] == full_indices
        return np.where(ok, pos, -1)

    def compatible_with(self, other) -> bool:
        if self.lattice is not other.lattice and self.lattice != other.lattice:
            return False
        if (self.states is None) != (other.states is None):
            return False
        if self.states is not None and not np.array_equal(self.states, other.states):
            return False
        return True


@dataclass(frozen=True)
class LocalOperator:
    """A sparse operator on the full (or sector) space plus its support set.

    small/sites keep the pre-embedding matrix when known; they make norms
    and conjugations cheap but carry no extra information.
    """

    matrix: sp.csr_matrix
    support: frozenset
    indexer: BasisIndexer
    small: np.ndarray | None = field(default=None, compare=False, repr=False)
    sites: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "LocalOperator":
        small = None if self.small is None else self.small.conj().T
        return LocalOperator(self.matrix.conj().T.tocsr(), self.support, self.indexer,
                             small, self.sites)

    def is_hermitian(self, tol: float = _HERMITICITY_TOL) -> bool:
        d = self.matrix - self.matrix.conj().T
        return d.nnz == 0 or abs(d).max() <= tol

    def norm(self) -> float:
        return op_norm(self)

    def __matmul__(self, other):
        if isinstance(other, LocalOperator):
            return LocalOperator(self.matrix @ other.matrix,
                                 self.support | other.support, self.indexer)
        return self.matrix @ other

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


def _strip_identity_factors(op: np.ndarray, sites, dims):
    """Drop tensor factors on which op acts as the identity."""
    op = np.asarray(op)
    sites = list(sites)
    dims = list(dims)
    changed = True
    while changed and sites:
        changed = False
        for p in range(len(sites)):
            d = dims[p]
            pre = int(np.prod(dims[:p])) if p else 1
            post = int(np.prod(dims[p + 1:])) if p + 1 < len(dims) else 1
            m6 = op.reshape(pre, d, post, pre, d, post)
            block = m6[:, 0, :, :, 0, :]
            scale = max(1.0, np.abs(op).max())
            ok = True
            for a in range(d):
                for b in range(d):
                    ref = block if a == b else 0.0
                    if np.abs(m6[:, a, :, :, b, :] - ref).max() > 1e-14 * scale:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                op = block.reshape(pre * post, pre * post)
                del sites[p], dims[p]
                changed = True
                break
    return op, sites


def embed(op, sites, indexer: BasisIndexer) -> LocalOperator:
    """Extend a small operator over `sites` by the identity elsewhere.

    op has one tensor factor per entry of `sites`, in that order.  The
    recorded support is minimized: sites where op acts as the identity are
    dropped.  On a sector-restricted indexer the operator must preserve the
    sector.
    """
    sites = [int(s) for s in sites]
    if len(set(sites)) != len(sites):
        raise ValueError("embedding sites must be distinct")
    dims = [int(indexer.local_dims[s]) for s in sites]
    op = np.asarray(op, dtype=complex)
    want = int(np.prod(dims)) if dims else 1
    if op.shape != (want, want):
        raise ValueError(f"operator dimension {op.shape} does not match site dims {dims}")

    op, sites = _strip_identity_factors(op, sites, dims)
    dims = [int(indexer.local_dims[s]) for s in sites]
    dim = indexer.dim

    if not sites:
        scale = complex(op.reshape(1, 1)[0, 0]) if op.size else 1.0
        mat = sp.identity(dim, format="csr", dtype=complex) * scale
        return LocalOperator(mat, frozenset(), indexer, np.array([[scale]]), ())

    configs = indexer.configs()
    loc_strides = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        loc_strides[k] = loc_strides[k + 1] * dims[k + 1]
    loc_code = configs[:, sites] @ loc_strides

    coo = sp.coo_matrix(op)
    order = np.argsort(coo.col, kind="stable")
    rows_out, cols_out, vals_out = [], [], []
    site_strides = indexer.strides[sites]
    # full index with the embedded sites' digits zeroed out
    rest_full = (configs @ indexer.strides) - (configs[:, sites] @ site_strides)

    col_ids = coo.col[order]
    row_ids = coo.row[order]
    val_ids = coo.data[order]
    start = 0
    while start < len(col_ids):
        j = col_ids[start]
        stop = start
        while stop < len(col_ids) and col_ids[stop] == j:
            stop += 1
        mask = np.nonzero(loc_code == j)[0]
        if len(mask):
            base = rest_full[mask]
            for t in range(start, stop):
                i = row_ids[t]
                digits = [(i // loc_strides[k]) % dims[k] for k in range(len(dims))]
                new_full = base + np.dot(digits, site_strides)
                pos = indexer.position_of_full(new_full)
                if np.any(pos < 0):
                    raise ValueError("operator does not preserve the charge sector")
                rows_out.append(pos)
                cols_out.append(mask)
                vals_out.append(np.full(len(mask), val_ids[t], dtype=complex))
        start = stop

    if rows_out:
        mat = sp.coo_matrix(
            (np.concatenate(vals_out),
             (np.concatenate(rows_out), np.concatenate(cols_out))),
            shape=(dim, dim)).tocsr()
    else:
        mat = sp.csr_matrix((dim, dim), dtype=complex)
    return LocalOperator(mat, frozenset(sites), indexer, op.copy(), tuple(sites))


def compressed_matrix(op: LocalOperator) -> np.ndarray | None:
    """Recover the small matrix of a full-space embedded operator, if possible."""
    if op.small is not None:
        return op.small
    if op.indexer.states is not None or not op.support:
        return None
    sites = sorted(op.support)
    dims = [int(op.indexer.local_dims[s]) for s in sites]
    small_dim = int(np.prod(dims))
    if small_dim > DENSE_NORM_THRESHOLD:
        return None
    # indices of basis states with every non-support site in state 0
    loc_strides = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        loc_strides[k] = loc_strides[k + 1] * dims[k + 1]
    codes = np.arange(small_dim)
    full = np.zeros(small_dim, dtype=np.int64)
    for k, s in enumerate(sites):
        full += ((codes // loc_strides[k]) % dims[k]) * op.indexer.strides[s]
    return op.matrix[np.ix_(full, full)].toarray()


def _dense_norm(mat: np.ndarray) -> float:
    mat = np.asarray(mat)
    herm = np.abs(mat - mat.conj().T).max() <= _HERMITICITY_TOL * max(1.0, np.abs(mat).max())
    if herm:
        return float(np.abs(np.linalg.eigvalsh(mat)).max()) if mat.size else 0.0
    anti = np.abs(mat + mat.conj().T).max() <= _HERMITICITY_TOL * max(1.0, np.abs(mat).max())
    if anti:
        return float(np.abs(np.linalg.eigvalsh(1j * mat)).max())
    return float(np.linalg.norm(mat, 2)) if mat.size else 0.0


def _gram_power_norm(mat: sp.spmatrix, tol: float = 1e-10, maxiter: int = 20000,
                     seed: int = 11) -> float:
    """Largest singular value by power iteration on the Gram operator."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(mat.shape[1]) + 1j * rng.standard_normal(mat.shape[1])
    v /= np.linalg.norm(v)
    mat_h = mat.conj().T.tocsr()
    prev = 0.0
    for _ in range(maxiter):
        w = mat_h @ (mat @ v)
        lam = np.linalg.norm(w)
        if lam == 0.0:
            return 0.0
        v = w / lam
        val = np.sqrt(lam)
        if abs(val - prev) <= tol * max(val, 1e-300):
            return float(val)
        prev = val
    raise ConvergenceError("operator norm power iteration did not converge",
                           residual=abs(val - prev))


def op_norm(op, dense_threshold: int = DENSE_NORM_THRESHOLD) -> float:
    """Operator norm (largest singular value).

    LocalOperators embedded in the full space are compressed onto their
    support first, which makes Hamiltonian term norms exact and cheap.
    Dense evaluation below `dense_threshold`, Gram power iteration above.
    """
    if isinstance(op, LocalOperator):
        small = compressed_matrix(op)
        if small is not None and small.shape[0] < dense_threshold:
            return _dense_norm(small)
        op = op.matrix
    if sp.issparse(op):
        if op.shape[0] < dense_threshold:
            return _dense_norm(op.toarray())
        return _gram_power_norm(op.tocsr())
    return _dense_norm(np.asarray(op))


def commutator(a, b):
    """[a, b] as a sparse matrix (accepts LocalOperator or matrix)."""
    am = a.matrix if isinstance(a, LocalOperator) else a
    bm = b.matrix if isinstance(b, LocalOperator) else b
    return am @ bm - bm @ am


def translation_operator(indexer: BasisIndexer) -> LocalOperator:
    """Unitary permutation T shifting the first coordinate by one.

    T maps an operator supported at (i, v) to the same operator at
    (i+1, v); T**L is the identity.
    """
    lat = indexer.lattice
    if lat.cycle_period is None:
        raise ValueError("lattice has no declared translation direction")
    n = lat.n_sites
    # image[s] = site that receives the content of s
    image = np.array([lat.translated_site(s, 1) for s in range(n)])
    configs = indexer.configs()
    new_configs = np.empty_like(configs)
    new_configs[:, image] = configs
    full = new_configs @ indexer.strides
    rows = indexer.position_of_full(full)
    if np.any(rows < 0):
        raise ValueError("translation does not preserve the charge sector")
    dim = indexer.dim
    mat = sp.coo_matrix((np.ones(dim), (rows, np.arange(dim))),
                        shape=(dim, dim), dtype=complex).tocsr()
    return LocalOperator(mat, frozenset(range(n)), indexer)
