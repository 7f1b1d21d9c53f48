"""Wide-stencil discretisation of ``P+_1``.

At an interior node ``x`` and a lattice direction ``d`` the one-sided
distances ``h+`` and ``h-`` are either ``h |d|`` (lattice neighbour is an
interior node) or the exact distance to the boundary along ``+-d``, where
the Dirichlet value is zero. The directional second difference

    2/(h+(h+ + h-)) u(x+) - 2/(h+ h-) u(x) + 2/(h-(h+ + h-)) u(x-)

has nonnegative neighbour weights, so the max over directions is a
monotone, degenerate elliptic scheme.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np
import scipy.sparse as sparse

from ..errors import DomainError, ParameterError


class DirectionSet:
    """Primitive integer vectors with max-norm at most ``order``, up to sign.

    The canonical representative has its first nonzero entry positive.
    Directions are ordered by max-norm, then squared length, then
    lexicographically, so axis directions come first and the order is
    fixed for a given ``(order, dim)``.
    """

    def __init__(self, order, dim=2):
        if order < 1:
            raise ParameterError(f"stencil order must be at least 1, got {order}")
        if dim < 1:
            raise ParameterError(f"dimension must be positive, got {dim}")
        self.order = int(order)
        self.dim = int(dim)
        vecs = []
        for v in product(range(-order, order + 1), repeat=dim):
            if not any(v):
                continue
            first = next(c for c in v if c != 0)
            if first < 0:
                continue
            if math.gcd(*[abs(c) for c in v]) != 1:
                continue
            vecs.append(v)
        vecs.sort(key=lambda v: (max(abs(c) for c in v), sum(c * c for c in v), v))
        self.vectors = np.array(vecs, dtype=np.int64)
        self.lengths = np.linalg.norm(self.vectors, axis=1)
        self.units = self.vectors / self.lengths[:, None]

    def __len__(self):
        return len(self.vectors)

    @property
    def angular_resolution(self):
        """Largest angle between a unit vector and its nearest direction.

        Exact in 2D; in higher dimensions a fixed quasi-random probe set of
        4096 unit vectors is used.
        """
        if self.dim == 1:
            return 0.0
        if self.dim == 2:
            ang = np.sort(np.mod(np.arctan2(self.units[:, 1], self.units[:, 0]), np.pi))
            gaps = np.diff(np.concatenate([ang, [ang[0] + np.pi]]))
            return float(gaps.max() / 2.0)
        rng = np.random.default_rng(12345)
        probe = rng.standard_normal((4096, self.dim))
        probe /= np.linalg.norm(probe, axis=1)[:, None]
        cos = np.abs(probe @ self.units.T).max(axis=1)
        return float(np.arccos(np.clip(cos.min(), -1.0, 1.0)))

    def __repr__(self):
        return f"DirectionSet(order={self.order}, dim={self.dim}, count={len(self)})"


class Stencil:
    """Neighbour indices and weights of every direction at every interior node.

    Attributes
    ----------
    plus, minus : ndarray of int, shape (D, M)
        Interior position of the forward/backward neighbour, or ``M`` when
        that side ends on the boundary (index ``M`` of the zero-padded
        field).
    h_plus, h_minus : ndarray, shape (D, M)
        One-sided distances.
    w_plus, w_minus, w_center : ndarray, shape (D, M)
        Second-difference weights.
    """

    def __init__(self, grid, directions):
        if directions.dim != grid.dim:
            raise ParameterError("direction set and grid dimensions differ")
        self.grid = grid
        self.directions = directions
        m = grid.size
        d = len(directions)
        self.plus = np.empty((d, m), dtype=np.int64)
        self.minus = np.empty((d, m), dtype=np.int64)
        self.h_plus = np.empty((d, m))
        self.h_minus = np.empty((d, m))
        pts = grid.interior_points
        for j, (vec, unit, length) in enumerate(
            zip(directions.vectors, directions.units, directions.lengths)
        ):
            full = grid.h * length
            for sign, idx_out, h_out in ((1, self.plus, self.h_plus), (-1, self.minus, self.h_minus)):
                nb = grid.lattice_neighbour(sign * vec)
                dist = np.full(m, full)
                cut = nb < 0
                if cut.any():
                    dist[cut] = np.minimum(grid.domain.ray_exit(pts[cut], sign * unit), full)
                nb = np.where(cut, m, nb)
                idx_out[j] = nb
                h_out[j] = dist
        if np.any(self.h_plus <= 0) or np.any(self.h_minus <= 0):
            raise DomainError("an interior node has zero distance to the boundary")
        hp, hm = self.h_plus, self.h_minus
        self.w_plus = 2.0 / (hp * (hp + hm))
        self.w_minus = 2.0 / (hm * (hp + hm))
        self.w_center = -2.0 / (hp * hm)

    @property
    def size(self):
        return self.grid.size

    @property
    def min_step_product(self):
        """``min h+ h-`` over all nodes and directions (sets the explicit time step)."""
        return float((self.h_plus * self.h_minus).min())

    def _padded(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.size,):
            raise ParameterError(f"field must have {self.size} interior values, got {u.shape}")
        return np.append(u, 0.0)

    def directional(self, u, rows=slice(None)):
        """All directional second differences, shape ``(D, M)`` (or a node slice)."""
        up = self._padded(u)
        return (
            self.w_plus[:, rows] * up[self.plus[:, rows]]
            + self.w_center[:, rows] * up[:-1][rows]
            + self.w_minus[:, rows] * up[self.minus[:, rows]]
        )

    def apply(self, u, threads=1, with_policy=False):
        """``max_d`` of the directional second differences at every interior node.

        Node blocks are processed independently; each node takes the max in
        the fixed direction order, so the output does not depend on
        ``threads``.
        """
        m = self.size
        out = np.empty(m)
        pol = np.empty(m, dtype=np.int64)

        def work(block):
            vals = self.directional(u, block)
            p = np.argmax(vals, axis=0)
            pol[block] = p
            out[block] = vals[p, np.arange(vals.shape[1])]

        blocks = _blocks(m, threads)
        if len(blocks) == 1:
            work(blocks[0])
        else:
            with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
                list(pool.map(work, blocks))
        return (out, pol) if with_policy else out

    def policy_matrix(self, policy):
        """Sparse matrix of the linear operator using direction ``policy[i]`` at node ``i``."""
        m = self.size
        rows = np.arange(m)
        pl = self.plus[policy, rows]
        mi = self.minus[policy, rows]
        keep_p = pl < m
        keep_m = mi < m
        r = np.concatenate([rows, rows[keep_p], rows[keep_m]])
        c = np.concatenate([rows, pl[keep_p], mi[keep_m]])
        v = np.concatenate([
            self.w_center[policy, rows],
            self.w_plus[policy, rows][keep_p],
            self.w_minus[policy, rows][keep_m],
        ])
        return sparse.csc_matrix((v, (r, c)), shape=(m, m))


def _blocks(m, threads):
    threads = max(1, int(threads))
    edges = np.linspace(0, m, min(threads, max(m, 1)) + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a] or [slice(0, 0)]


def second_difference(grid, u, node, e):
    """Directional second difference of ``u`` at one interior node.

    Parameters
    ----------
    grid : GridDomain
    u : array_like
        Interior values.
    node : int
        Full-grid flat index of the node.
    e : array_like of int
        Lattice direction.
    """
    pos = grid.position[node]
    if pos < 0:
        raise DomainError(f"node {node} is not an interior node")
    e = np.asarray(e, dtype=np.int64)
    length = float(np.linalg.norm(e))
    unit = e / length
    x = grid.points[node][None, :]
    idx = grid.multi_index(np.array([node]))[0]
    u = np.asarray(u, dtype=float)
    vals, dists = [], []
    for sign in (1, -1):
        nb = idx + sign * e
        inside = np.all((nb >= 0) & (nb < np.array(grid.shape)))
        p = grid.position[np.ravel_multi_index(tuple(nb), grid.shape)] if inside else -1
        if p >= 0:
            vals.append(u[p])
            dists.append(grid.h * length)
        else:
            vals.append(0.0)
            dists.append(min(float(grid.domain.ray_exit(x, sign * unit)[0]), grid.h * length))
    (up, um), (hp, hm) = vals, dists
    return (up - (1.0 + hp / hm) * u[pos] + (hp / hm) * um) * 2.0 / (hp * (hp + hm))


def apply_pplus1(stencil, u, threads=1):
    """Discrete ``P+_1``: max over the stencil directions of the second differences."""
    return stencil.apply(u, threads=threads)
