"""Finite lattices with precomputed shortest-path metrics.

Sites are plain integers 0..n-1.  Every site additionally carries a
coordinate pair (i, v): i is the position along the distinguished cycle
direction (the "first coordinate", used by twists and translations) and v
labels the transverse part.  Lattices without a cycle direction set
cycle_period to None and give every site first coordinate 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


@dataclass(frozen=True)
class Lattice:
    """A finite set of sites with a graph-hop metric.

    dist[i, j] is the number of hops between sites i and j.  local_dims[i]
    is the on-site Hilbert space dimension.  coords[i] = (first, transverse).
    """

    dist: np.ndarray
    local_dims: tuple
    coords: tuple
    cycle_period: int | None = None

    def __post_init__(self):
        d = np.asarray(self.dist)
        n = len(self.local_dims)
        if d.shape != (n, n):
            raise ValueError(f"metric shape {d.shape} does not match {n} sites")
        if np.any(d < 0) or np.any(d != d.T) or np.any(np.diag(d) != 0):
            raise ValueError("metric must be symmetric, nonnegative, zero on the diagonal")
        if np.any((d == 0) & ~np.eye(n, dtype=bool)):
            raise ValueError("metric is zero between distinct sites")
        for k in range(n):
            if np.any(d > d[:, k:k + 1] + d[k:k + 1, :]):
                raise ValueError("metric violates the triangle inequality")
        if any(dim < 1 for dim in self.local_dims):
            raise ValueError("local dimensions must be positive")
        if self.cycle_period is not None:
            L = self.cycle_period
            dims_by_v = {}
            for s, (i, v) in enumerate(self.coords):
                if not 0 <= i < L:
                    raise ValueError("first coordinates must lie in 0..L-1")
                if dims_by_v.setdefault(v, self.local_dims[s]) != self.local_dims[s]:
                    raise ValueError("local dimension must depend only on the transverse label")

    @property
    def n_sites(self) -> int:
        return len(self.local_dims)

    @property
    def hilbert_dim(self) -> int:
        return int(np.prod([int(d) for d in self.local_dims], dtype=object))

    def sites(self):
        return range(self.n_sites)

    def first_coordinate(self, site: int) -> int:
        return self.coords[site][0]

    def column(self, first: int):
        """All sites with the given first coordinate (mod the cycle period)."""
        if self.cycle_period is not None:
            first %= self.cycle_period
        return [s for s in self.sites() if self.coords[s][0] == first]

    def set_distance(self, a, b) -> int:
        a = list(a)
        b = list(b)
        if not a or not b:
            raise ValueError("set distance of an empty set")
        return int(self.dist[np.ix_(a, b)].min())

    def diameter(self, sites) -> int:
        sites = list(sites)
        if not sites:
            return 0
        return int(self.dist[np.ix_(sites, sites)].max())

    def site_at(self, first: int, transverse: int) -> int:
        """Site index with the given coordinate pair."""
        return self._coord_index()[(first, transverse)]

    def translated_site(self, site: int, shift: int = 1) -> int:
        """Site reached by shifting the first coordinate (requires a cycle direction)."""
        if self.cycle_period is None:
            raise ValueError("lattice has no translation direction")
        i, v = self.coords[site]
        return self.site_at((i + shift) % self.cycle_period, v)

    def _coord_index(self):
        cache = getattr(self, "_coord_lookup", None)
        if cache is None:
            cache = {c: s for s, c in enumerate(self.coords)}
            object.__setattr__(self, "_coord_lookup", cache)
        return cache


def _metric_from_adjacency(adj: np.ndarray) -> np.ndarray:
    d = shortest_path(csr_matrix(adj), method="D", unweighted=True)
    if np.isinf(d).any():
        raise ValueError("lattice graph must be connected")
    return d.astype(np.int64)


def cycle(L: int, local_dim: int = 2) -> Lattice:
    """Ring of L sites; dist(i, j) = min(|i-j|, L-|i-j|)."""
    if L < 2:
        raise ValueError("cycle length must be at least 2")
    idx = np.arange(L)
    diff = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(diff, L - diff)
    coords = tuple((int(i), 0) for i in idx)
    return Lattice(dist.astype(np.int64), (local_dim,) * L, coords, cycle_period=L)


def torus(Lx: int, Ly: int, local_dim: int = 2) -> Lattice:
    """Lx-by-Ly periodic square lattice; site (x, y) -> index x*Ly + y.

    The x direction is the distinguished cycle direction.
    """
    if Lx < 2 or Ly < 2:
        raise ValueError("torus sides must be at least 2")
    xs, ys = np.divmod(np.arange(Lx * Ly), Ly)
    dx = np.abs(xs[:, None] - xs[None, :])
    dy = np.abs(ys[:, None] - ys[None, :])
    dist = np.minimum(dx, Lx - dx) + np.minimum(dy, Ly - dy)
    coords = tuple((int(x), int(y)) for x, y in zip(xs, ys))
    return Lattice(dist.astype(np.int64), (local_dim,) * (Lx * Ly), coords, cycle_period=Lx)


def path(L: int, local_dim: int = 2) -> Lattice:
    """Open chain of L sites (no translation symmetry)."""
    if L < 2:
        raise ValueError("path length must be at least 2")
    idx = np.arange(L)
    dist = np.abs(idx[:, None] - idx[None, :])
    coords = tuple((0, int(i)) for i in idx)
    return Lattice(dist.astype(np.int64), (local_dim,) * L, coords, cycle_period=None)


def cartesian_cycle(L: int, transverse_adjacency, local_dims_by_v) -> Lattice:
    """Cartesian product of a cycle of length L with an arbitrary graph.

    transverse_adjacency: (m, m) boolean/0-1 adjacency of the transverse
    graph.  local_dims_by_v: per-vertex on-site dimension (scalar or
    length-m sequence).  Site (i, v) -> index i*m + v.
    """
    if L < 2:
        raise ValueError("cycle length must be at least 2")
    adj = np.asarray(transverse_adjacency)
    m = adj.shape[0]
    if adj.shape != (m, m) or np.any(adj != adj.T):
        raise ValueError("transverse adjacency must be a symmetric square matrix")
    dv = _metric_from_adjacency(adj) if m > 1 else np.zeros((1, 1), dtype=np.int64)
    if np.isscalar(local_dims_by_v):
        dims_v = [int(local_dims_by_v)] * m
    else:
        dims_v = [int(d) for d in local_dims_by_v]
        if len(dims_v) != m:
            raise ValueError("need one local dimension per transverse vertex")
    idx = np.arange(L)
    diff = np.abs(idx[:, None] - idx[None, :])
    dc = np.minimum(diff, L - diff)
    dist = (dc[:, None, :, None] + dv[None, :, None, :]).reshape(L * m, L * m)
    coords = tuple((int(i), int(v)) for i in range(L) for v in range(m))
    dims = tuple(dims_v[v] for _, v in coords)
    return Lattice(dist.astype(np.int64), dims, coords, cycle_period=L)


def build_lattice(kind: str, **kwargs) -> Lattice:
    """Dispatch on a lattice kind name; used by config-driven callers."""
    builders = {"cycle": cycle, "torus": torus, "path": path,
                "cartesian_cycle": cartesian_cycle}
    if kind not in builders:
        raise ValueError(f"unknown lattice kind {kind!r}; expected one of {sorted(builders)}")
    return builders[kind](**kwargs)
