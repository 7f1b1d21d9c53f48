"""Convex domains with exact ray exits, and the Cartesian grid laid over them."""

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


class Polytope:
    """Open convex polytope ``{x : A x < b}`` with unit outward normals.

    Parameters
    ----------
    normals : array_like, shape (F, N)
        Outward face normals; rescaled to unit length.
    offsets : array_like, shape (F,)
        Right-hand sides, rescaled together with the normals.
    vertices : array_like, optional
        Vertex list, used for bounding boxes and covers. Computed for boxes
        and polygons; required otherwise.
    """

    def __init__(self, normals, offsets, vertices):
        a = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).ravel()
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms == 0) or a.shape[0] != b.size:
            raise ParameterError("every face needs a nonzero normal and one offset")
        self.normals = a / norms[:, None]
        self.offsets = b / norms
        self.vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        self.dim = self.normals.shape[1]

    @classmethod
    def box(cls, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(hi <= lo):
            raise ParameterError("box needs hi > lo in every coordinate")
        n = lo.size
        eye = np.eye(n)
        normals = np.vstack([eye, -eye])
        offsets = np.concatenate([hi, -lo])
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(n, -1).T
        return cls(normals, offsets, corners)

    @classmethod
    def from_box_spec(cls, spec):
        hs = spec.half_sides
        return cls.box(-hs, hs)

    @classmethod
    def polygon(cls, vertices):
        """Convex polygon from vertices in order (either orientation)."""
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ParameterError("polygon needs at least three 2D vertices")
        edges = np.roll(v, -1, axis=0) - v
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        if np.all(cross > 0):
            pass
        elif np.all(cross < 0):
            v = v[::-1]
            edges = np.roll(v, -1, axis=0) - v
        else:
            raise ParameterError("polygon is not strictly convex in the given vertex order")
        normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        offsets = np.einsum("ij,ij->i", normals, v)
        return cls(normals, offsets, v)

    @classmethod
    def regular_polygon(cls, sides, circumradius, phase=0.0):
        t = phase + 2.0 * np.pi * np.arange(sides) / sides
        return cls.polygon(circumradius * np.column_stack([np.cos(t), np.sin(t)]))

    @property
    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def slack(self, x):
        """Distance to the boundary, negative outside."""
        x = np.atleast_2d(x)
        return (self.offsets - x @ self.normals.T).min(axis=1)

    def contains(self, x, margin=0.0):
        return self.slack(x) > margin

    def ray_exit(self, x, direction):
        """Distance from interior points ``x`` to the boundary along a unit direction."""
        x = np.atleast_2d(x)
        d = np.asarray(direction, dtype=float)
        rate = self.normals @ d
        gap = self.offsets - x @ self.normals.T
        with np.errstate(divide="ignore"):
            t = np.where(rate > 0, gap / np.where(rate > 0, rate, 1.0), np.inf)
        return t.min(axis=1)

    def __repr__(self):
        return f"Polytope(dim={self.dim}, faces={len(self.offsets)})"


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dim(self):
        return len(self.center)

    @property
    def bounds(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def slack(self, x):
        x = np.atleast_2d(x)
        return self.radius - np.linalg.norm(x - np.array(self.center), axis=1)

    def contains(self, x, margin=0.0):
        return self.slack(x) > margin

    def ray_exit(self, x, direction):
        # |y + t d|^2 = r^2 with y = x - c, |d| = 1 -> positive root.
        y = np.atleast_2d(x) - np.array(self.center)
        d = np.asarray(direction, dtype=float)
        b = y @ d
        c = np.einsum("ij,ij->i", y, y) - self.radius**2
        disc = np.sqrt(np.maximum(b * b - c, 0.0))
        # -b + disc loses digits when b > 0; use the conjugate form there.
        return np.where(b > 0, -c / (b + disc), disc - b)


class GridDomain:
    """Uniform grid of spacing ``h`` over the bounding box of a convex domain.

    Nodes are ``lo + h * i``; a node is *interior* when it lies strictly
    inside the domain by more than ``1e-12 * h``. Nodes on the boundary or
    outside carry the Dirichlet value zero and are not unknowns.
    """

    def __init__(self, domain, h):
        if not h > 0:
            raise ParameterError(f"grid spacing must be positive, got {h}")
        self.domain = domain
        self.h = float(h)
        self.dim = domain.dim
        lo, hi = domain.bounds
        self.lo = np.asarray(lo, dtype=float)
        counts = np.floor((np.asarray(hi) - self.lo) / self.h + 1e-9).astype(int) + 1
        self.shape = tuple(int(c) for c in counts)
        self.hi = self.lo + self.h * (counts - 1)
        axes = [self.lo[i] + self.h * np.arange(counts[i]) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.points = np.stack([m.ravel() for m in mesh], axis=1)
        self.inside = domain.contains(self.points, margin=1e-12 * self.h)
        self.interior = np.flatnonzero(self.inside)
        self.interior_points = self.points[self.interior]
        # Full-grid index -> interior position, -1 for boundary/exterior nodes.
        self.position = np.full(self.points.shape[0], -1, dtype=np.int64)
        self.position[self.interior] = np.arange(self.interior.size)

    @property
    def size(self):
        return int(self.interior.size)

    def multi_index(self, flat):
        return np.stack(np.unravel_index(flat, self.shape), axis=-1)

    def lattice_neighbour(self, offset):
        """Interior position of ``node + offset`` for every interior node (-1 if not interior)."""
        idx = self.multi_index(self.interior) + np.asarray(offset)
        ok = np.all((idx >= 0) & (idx < np.array(self.shape)), axis=1)
        flat = np.full(self.size, -1, dtype=np.int64)
        flat[ok] = np.ravel_multi_index(tuple(idx[ok].T), self.shape)
        out = np.full(self.size, -1, dtype=np.int64)
        out[ok] = self.position[flat[ok]]
        return out

    def sample(self, func):
        """Field of ``func(interior_points)`` on interior nodes."""
        return np.asarray(func(self.interior_points), dtype=float)

    def to_full(self, values):
        """Scatter interior values onto the full grid (zero elsewhere)."""
        full = np.zeros(self.points.shape[0])
        full[self.interior] = values
        return full.reshape(self.shape)


def square_grid(side, h):
    """Grid over ``(-side/2, side/2)^2``."""
    half = 0.5 * side
    return GridDomain(Polytope.box([-half, -half], [half, half]), h)


def box_grid(spec, h):
    return GridDomain(Polytope.from_box_spec(spec), h)


def ball_grid(dim, radius, h):
    return GridDomain(Ball((0.0,) * dim, radius), h)
