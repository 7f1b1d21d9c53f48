"""Cube covers of convex polytopes, the power-of-eigenfunction barrier and Hölder checks.

Cubes have side ``pi``: ``O Q(y) = {O z : |z_i - y_i| < pi/2}``. On each
cube ``phi_{y,O}(x) = prod_i cos((O^T x - y)_i)^(1/N)`` satisfies
``P+_1(D^2 phi) = -phi/N`` and vanishes on the cube's boundary.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import qmc

from . import matrix_core as mc
from .closed_form import ProductCosine
from .errors import ParameterError

HALF = math.pi / 2.0


@dataclass(frozen=True)
class CubeCover:
    """Rotated side-``pi`` cubes whose intersection contains the polytope.

    ``centers[j]`` is ``y`` and ``rotations[j]`` is ``O`` for cube ``j``;
    ``faces[j]`` is the polytope face the cube was built on.
    """

    polytope: object
    centers: np.ndarray
    rotations: np.ndarray
    faces: tuple

    @property
    def dim(self):
        return self.centers.shape[1]

    def __len__(self):
        return len(self.centers)

    def local(self, x):
        """Cube coordinates ``z = O^T x - y``, shape ``(cubes, M, N)``."""
        x = np.atleast_2d(x)
        return np.einsum("mi,cij->cmj", x, self.rotations) - self.centers[:, None, :]

    def contains(self, x, margin=0.0):
        """Whether each point lies in every cube (strictly, by ``margin``)."""
        z = self.local(x)
        return np.all(np.abs(z) < HALF - margin, axis=(0, 2))

    def phi(self, x):
        """``phi_{y,O}(x)`` for every cube, shape ``(cubes, M)``; zero outside a cube."""
        z = self.local(x)
        c = np.clip(np.cos(z), 0.0, None)
        c[np.abs(z) >= HALF] = 0.0
        return np.prod(c, axis=-1) ** (1.0 / self.dim)

    def inf_phi(self, x):
        return self.phi(x).min(axis=0)

    def cube_vertices(self, j):
        n = self.dim
        corners = np.array(np.meshgrid(*[[-HALF, HALF]] * n, indexing="ij")).reshape(n, -1).T
        return (corners + self.centers[j]) @ self.rotations[j].T


def _frame_with_first(normal):
    """Orthogonal matrix whose first column is ``normal``."""
    n = normal.size
    m = np.column_stack([normal, np.eye(n)])
    q, _ = np.linalg.qr(m)
    q = q[:, :n]
    if q[:, 0] @ normal < 0:
        q[:, 0] = -q[:, 0]
    return q


def _same_cube(cover_v1, cover_v2, tol=1e-9):
    a = np.round(cover_v1 / tol).astype(np.int64)
    b = np.round(cover_v2 / tol).astype(np.int64)
    return {tuple(r) for r in a} == {tuple(r) for r in b}


def build_cube_cover(polytope):
    """One cube per face of a convex polytope, with duplicates removed.

    Cube ``j`` has its first axis along the outward normal of face ``j`` and
    its upper face on that face's hyperplane; along the other axes it is
    centred on the polytope's extent. Every extent must be at most ``pi``.
    """
    if not hasattr(polytope, "normals"):
        raise ParameterError("build_cube_cover needs a convex Polytope")
    verts = polytope.vertices
    if np.any(polytope.slack(verts) < -1e-9 * max(1.0, np.abs(verts).max())):
        raise ParameterError("vertices violate the face inequalities: polytope is not convex")
    centers, rotations, faces, corner_sets = [], [], [], []
    for j, (normal, offset) in enumerate(zip(polytope.normals, polytope.offsets)):
        o = _frame_with_first(normal)
        z = verts @ o
        lo, hi = z.min(axis=0), z.max(axis=0)
        limit = math.pi * (1.0 + 1e-12)
        if np.any(hi - lo > limit) or offset - lo[0] > limit:
            raise ParameterError(f"polytope does not fit in a side-pi cube along face {j}; rescale it")
        y = 0.5 * (lo + hi)
        y[0] = offset - HALF
        corners = (np.array(np.meshgrid(*[[-HALF, HALF]] * polytope.dim, indexing="ij"))
                   .reshape(polytope.dim, -1).T + y) @ o.T
        if any(_same_cube(corners, c) for c in corner_sets):
            continue
        centers.append(y)
        rotations.append(o)
        faces.append(j)
        corner_sets.append(corners)
    return CubeCover(polytope, np.array(centers), np.array(rotations), tuple(faces))


def _cube_derivatives(cover, x):
    """``phi``, gradient and Hessian of every cube's eigenfunction at ``x``.

    Shapes ``(C, M)``, ``(C, M, N)``, ``(C, M, N, N)``.
    """
    n = cover.dim
    prof = ProductCosine(np.ones(n), np.full(n, 1.0 / n))
    z = cover.local(x)
    phis, grads, hessians = [], [], []
    for j, o in enumerate(cover.rotations):
        phis.append(prof.value(z[j]))
        grads.append(prof.gradient(z[j]) @ o.T)
        hessians.append(np.einsum("ia,mab,jb->mij", o, prof.hessian(z[j]), o))
    return np.array(phis), np.array(grads), np.array(hessians)


@dataclass(frozen=True)
class SupersolutionReport:
    """Per-cube chain ``P+_1(D^2 psi) <= A + B = B = -alpha phi^beta``.

    ``lhs`` is ``P+_1(D^2 psi)`` with ``psi = (N alpha/beta) phi^beta``,
    ``split`` the sum of the rank-one and Hessian bounds, ``dropped`` the
    same after ``P-_1(grad phi (x) grad phi) = 0``, and ``target`` is
    ``-alpha phi^beta``. All arrays have shape ``(cubes, M)``. Comparisons
    are relative to ``scale``, the size of the two Hessian terms being
    added, since near the cube boundary ``phi^(beta-2)`` amplifies the
    rounding in the vanishing eigenvalue of the rank-one part.
    """

    lhs: np.ndarray
    split: np.ndarray
    dropped: np.ndarray
    target: np.ndarray
    scale: np.ndarray
    tol: float

    def _close(self, a, b):
        return np.abs(a - b) <= self.tol * self.scale

    @property
    def holds(self):
        first = self.lhs <= self.split + self.tol * self.scale
        return bool(np.all(first) and np.all(self._close(self.split, self.dropped))
                    and np.all(self._close(self.dropped, self.target)))

    @property
    def max_violation(self):
        """``max(lhs - target)``: how far ``P+_1(D^2 psi) + alpha phi^beta`` gets above 0."""
        return float((self.lhs - self.target).max())


class BarrierField:
    """``(N alpha/beta) min_cubes phi_{y,O}(x)^beta`` over a cube cover."""

    def __init__(self, cover, alpha, beta):
        if not alpha > 0:
            raise ParameterError(f"alpha must be positive, got {alpha}")
        if not 0 < beta <= 1:
            raise ParameterError(f"beta must lie in (0, 1], got {beta}")
        self.cover = cover
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.coef = cover.dim * self.alpha / self.beta

    def __call__(self, x):
        return self.coef * self.cover.inf_phi(x) ** self.beta

    @property
    def holder_exponent(self):
        return self.beta / self.cover.dim

    @property
    def holder_constant(self):
        n = self.cover.dim
        return self.coef * n ** (self.beta / (2.0 * n))

    def supersolution_check(self, x, tol=1e-10):
        """Evaluate the per-cube inequality chain at interior points ``x``."""
        n = self.cover.dim
        a, b = self.alpha, self.beta
        phi, grad, hess = _cube_derivatives(self.cover, x)
        c, m = phi.shape
        flat_h = hess.reshape(-1, n, n)
        outer = (grad[..., :, None] * grad[..., None, :]).reshape(-1, n, n)
        d2psi = n * a * (phi.reshape(-1)[:, None, None] ** (b - 1) * flat_h
                         + (b - 1) * phi.reshape(-1)[:, None, None] ** (b - 2) * outer)
        lhs = mc.pk_plus(d2psi, 1).reshape(c, m)
        p_plus_phi = mc.pk_plus(flat_h, 1).reshape(c, m)
        p_minus_outer = mc.pk_minus(outer, 1).reshape(c, m)
        split = n * a * (b - 1) * phi ** (b - 2) * p_minus_outer + n * a * phi ** (b - 1) * p_plus_phi
        dropped = n * a * phi ** (b - 1) * p_plus_phi
        target = -a * phi**b
        scale = 1.0 + n * a * ((1 - b) * phi ** (b - 2) * np.sum(grad * grad, axis=-1)
                               + phi ** (b - 1) * np.abs(p_plus_phi))
        return SupersolutionReport(lhs, split, dropped, target, scale, tol)

    def holder_quotients(self, x, z):
        """``|u(x) - u(z)| / |x - z|^(beta/N)`` for paired rows (coincident pairs dropped)."""
        x, z = np.atleast_2d(x), np.atleast_2d(z)
        d = np.linalg.norm(x - z, axis=1)
        keep = d > 0
        x, z, d = x[keep], z[keep], d[keep]
        return np.abs(self(x) - self(z)) / d**self.holder_exponent


def barrier(cover, alpha, beta):
    return BarrierField(cover, alpha, beta)


def sample_polytope(polytope, count, seed=0):
    """Quasi-random points strictly inside a polytope (rejection from its box)."""
    lo, hi = polytope.bounds
    sampler = qmc.Halton(polytope.dim, scramble=True, seed=seed)
    out, have = [], 0
    while have < count:
        p = lo + (hi - lo) * sampler.random(2 * count)
        p = p[polytope.contains(p)]
        out.append(p)
        have += len(p)
    return np.concatenate(out)[:count]


def sample_boundary(polytope, count, seed=0):
    """Points on the faces of a 2D polygon, spread evenly along the perimeter."""
    if polytope.dim != 2:
        raise ParameterError("boundary sampling is implemented for polygons")
    rng = np.random.default_rng(seed)
    v = polytope.vertices
    w = np.roll(v, -1, axis=0)
    lengths = np.linalg.norm(w - v, axis=1)
    edge = rng.choice(len(v), size=count, p=lengths / lengths.sum())
    t = rng.random(count)
    return v[edge] + t[:, None] * (w[edge] - v[edge])


def holder_condition_check(f, cover, alpha, beta, points=None, count=2000, seed=0):
    """True when ``f(x) >= -alpha (inf phi(x))^beta`` at every sample point.

    Without explicit ``points`` the samples are interior quasi-random points
    plus points pulled towards the boundary (where ``inf phi -> 0``).
    """
    if points is None:
        inner = sample_polytope(cover.polytope, count, seed)
        if cover.dim == 2:
            edge = sample_boundary(cover.polytope, count // 4, seed)
            centre = cover.polytope.vertices.mean(axis=0)
            near = centre + (1.0 - np.logspace(-8, -1, count // 4))[:, None] * (edge - centre)
            inner = np.vstack([inner, near])
        points = inner
    values = np.asarray(f(points), dtype=float)
    return bool(np.all(values >= -alpha * cover.inf_phi(points) ** beta))


def holder_exponent_fit(u, face_point, inward_normal, window, h=None, samples=40):
    """Slope of ``log u`` against ``log dist`` along the inward normal of a face.

    Parameters
    ----------
    u : callable or ScalarField
        Evaluator on ``(M, N)`` points, or a grid field (linearly
        interpolated on its full grid).
    face_point, inward_normal : array_like
        A point of the face where ``u = 0`` and the direction into the domain.
    window : float
        Largest distance used.
    h : float, optional
        Smallest distance used; defaults to the grid spacing for fields and
        ``window * 1e-4`` for callables.

    Raises
    ------
    ParameterError
        If fewer than five samples fall in ``(h, window)``.
    """
    p = np.asarray(face_point, dtype=float)
    nrm = np.asarray(inward_normal, dtype=float)
    nrm = nrm / np.linalg.norm(nrm)
    if callable(u):
        h = window * 1e-4 if h is None else h
        if samples < 5 or not window > h:
            raise ParameterError("need at least five distances inside the fit window")
        dist = np.geomspace(h, window, samples + 2)[1:-1]
        vals = np.asarray(u(p + dist[:, None] * nrm), dtype=float)
    else:
        grid = u.grid
        h = grid.h if h is None else h
        dist = np.arange(1, int(np.floor(window / grid.h)) + 1) * grid.h
        dist = dist[(dist > h * (1 - 1e-9)) & (dist <= window * (1 + 1e-9))]
        if dist.size < 5:
            raise ParameterError(f"only {dist.size} grid samples in the fit window; need 5")
        axes = [grid.lo[i] + grid.h * np.arange(grid.shape[i]) for i in range(grid.dim)]
        interp = RegularGridInterpolator(axes, u.full())
        vals = interp(p + dist[:, None] * nrm)
    if np.any(vals <= 0):
        raise ParameterError("u must be positive along the sampled normal")
    slope, _ = np.polyfit(np.log(dist), np.log(vals), 1)
    return float(slope)


# --- nonnegative concave supersolution without Hölder bound -------------------

def concavity_threshold(n):
    """Smallest ``sigma`` for which ``1/(sigma - sum log cos x_i)`` is concave on ``Q``.

    The Hessian has a positive direction iff
    ``2 sum sin^2 x_i > sigma - sum log cos x_i`` somewhere; maximising
    ``2 sin^2 t + log cos t`` (at ``cos t = 1/2``) gives ``n (3/2 - log 2)``.
    """
    return n * (1.5 - math.log(2.0))


class RemarkFunction:
    """``u(x) = 1 / (sigma - sum_i log cos x_i)`` on ``Q = (-pi/2, pi/2)^n``."""

    def __init__(self, n, sigma=None):
        if n < 1:
            raise ParameterError(f"n must be positive, got {n}")
        self.n = n
        self.sigma = float(2 * n if sigma is None else sigma)
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")

    def value(self, x):
        x = np.atleast_2d(x)
        return 1.0 / (self.sigma - np.sum(np.log(np.cos(x)), axis=1))

    def hessian(self, x):
        x = np.atleast_2d(x)
        s = self.sigma - np.sum(np.log(np.cos(x)), axis=1)
        gv = -np.tan(x)
        h = 2.0 * gv[:, :, None] * gv[:, None, :]
        idx = np.arange(self.n)
        h[:, idx, idx] -= s[:, None] / np.cos(x) ** 2
        return h / s[:, None, None] ** 3

    def near_face(self, distance):
        """``u`` at ``(0, ..., 0, pi/2 - d)``, using ``cos(pi/2 - d) = sin d``."""
        d = np.asarray(distance, dtype=float)
        return 1.0 / (self.sigma - np.log(np.sin(d)))


@dataclass(frozen=True)
class RemarkReport:
    dim: int
    sigma: float
    u_center: float
    max_quadratic_form: float
    max_eigenvalue: float
    distances: tuple
    quotients: dict

    @property
    def concave(self):
        return self.max_quadratic_form <= 1e-8

    def growth_monotone(self, gamma):
        q = self.quotients[gamma]
        return all(b > a for a, b in zip(q, q[1:]))


def remark_counterexample(n, sigma=None, samples=1000, directions=1000, seed=0,
                          gammas=(0.5, 0.25, 0.1), distances=(1e-4, 1e-6, 1e-8, 1e-10, 1e-12)):
    """Concavity and Hölder-quotient blow-up of ``1/(sigma - sum log cos x_i)``.

    ``max_quadratic_form`` is the largest ``<D^2u(x) w, w>`` over the sample
    points and random unit ``w``; ``max_eigenvalue`` is the exact maximum
    over unit ``w`` at the same points. ``quotients[gamma][j]`` is
    ``u(x_j)/d_j^gamma`` with ``x_j`` at distance ``d_j`` from the face
    ``x_n = pi/2`` (where ``u = 0``).
    """
    fn = RemarkFunction(n, sigma)
    rng = np.random.default_rng(seed)
    x = (2.0 * qmc.Halton(n, scramble=True, seed=seed).random(samples) - 1.0) * HALF
    x = x[np.all(np.abs(x) < HALF, axis=1)]
    h = fn.hessian(x)
    w = rng.standard_normal((directions, n))
    w /= np.linalg.norm(w, axis=1)[:, None]
    forms = np.einsum("di,mij,dj->md", w, h, w)
    d = np.asarray(distances, dtype=float)
    quotients = {g: tuple(float(v) for v in fn.near_face(d) / d**g) for g in gammas}
    return RemarkReport(
        dim=n,
        sigma=fn.sigma,
        u_center=float(fn.value(np.zeros(n))[0]),
        max_quadratic_form=float(forms.max()),
        max_eigenvalue=float(mc.spectrum(h)[:, -1].max()),
        distances=tuple(float(v) for v in d),
        quotients=quotients,
    )
