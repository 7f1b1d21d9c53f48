"""Explicit principal eigenpairs of the truncated Laplacian.

Boxes carry product eigenfunctions ``prod_i cos(c alpha_i x_i)^(1/(p_i+1))``
with ``c = pi / (2R)``; balls carry radial ones built from the Dirichlet
Laplacian of the ``k``-dimensional ball. All evaluators take points of
shape ``(N,)`` or ``(M, N)`` and refuse anything not strictly inside.

Derivatives of the product form are taken through ``log u``: with
``g = grad log u`` and ``L''`` the (diagonal) Hessian of ``log u``,

    grad u = u g,    D^2 u = u (g g^T + diag(L'')).
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.stats import qmc

from . import matrix_core as mc
from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class BoxSpec:
    """The box ``prod_i (-R/alpha_i, R/alpha_i)``."""

    dim: int
    half_width: float
    alpha: tuple

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        if self.dim < 1 or len(alpha) != self.dim:
            raise ParameterError(f"alpha must have {self.dim} entries, got {len(alpha)}")
        if not self.half_width > 0:
            raise ParameterError(f"half width must be positive, got {self.half_width}")
        if any(not a > 0 for a in alpha):
            raise ParameterError(f"alpha entries must be positive, got {alpha}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "half_width", float(self.half_width))

    @classmethod
    def cube(cls, n, r):
        return cls(n, r, (1.0,) * n)

    @property
    def half_sides(self):
        return np.array([self.half_width / a for a in self.alpha])

    @property
    def volume(self):
        return float(np.prod(2.0 * self.half_sides))

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.all(np.abs(x) < self.half_sides, axis=-1)


@dataclass(frozen=True)
class BallSpec:
    """The open ball of radius ``radius`` centred at the origin."""

    dim: int
    radius: float

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"dimension must be positive, got {self.dim}")
        if not self.radius > 0:
            raise ParameterError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.linalg.norm(x, axis=-1) < self.radius


def _points(x, dim):
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != dim:
        raise ParameterError(f"points must have {dim} coordinates, got {pts.shape[-1]}")
    return pts, single


class ProductCosine:
    """``u(x) = prod_i cos(freq_i x_i) ** power_i`` on ``|freq_i x_i| < pi/2``."""

    def __init__(self, freq, power):
        self.freq = np.asarray(freq, dtype=float)
        self.power = np.asarray(power, dtype=float)
        self.dim = self.freq.size

    def _parts(self, x):
        pts, single = _points(x, self.dim)
        theta = pts * self.freq
        if np.any(np.abs(theta) >= np.pi / 2):
            raise DomainError("evaluation point is not strictly inside the box")
        cos = np.cos(theta)
        log_u = np.sum(self.power * np.log(cos), axis=-1)
        g = -self.power * self.freq * np.tan(theta)
        l2 = -self.power * self.freq**2 / cos**2
        return np.exp(log_u), g, l2, single

    def value(self, x):
        u, _, _, single = self._parts(x)
        return u[0] if single else u

    def log_gradient(self, x):
        """``grad log u``; finite wherever ``u`` is."""
        _, g, _, single = self._parts(x)
        return g[0] if single else g

    def gradient(self, x):
        u, g, _, single = self._parts(x)
        out = u[:, None] * g
        return out[0] if single else out

    def hessian(self, x):
        u, g, l2, single = self._parts(x)
        h = g[:, :, None] * g[:, None, :]
        idx = np.arange(self.dim)
        h[:, idx, idx] += l2
        h *= u[:, None, None]
        return h[0] if single else h


class RadialProfile:
    """``u(x) = v(|x|)`` for a radial profile with ``v'(0) = 0``.

    Subclasses provide ``_profile(s)`` returning ``(v, v', v'/s, v'')`` with
    the ``s -> 0`` limit of ``v'/s`` filled in.
    """

    def __init__(self, dim, radius):
        self.dim = dim
        self.radius = radius

    def _radii(self, x):
        pts, single = _points(x, self.dim)
        r = np.linalg.norm(pts, axis=-1)
        if np.any(r >= self.radius):
            raise DomainError("evaluation point is not strictly inside the ball")
        return pts, r, single

    def value(self, x):
        _, r, single = self._radii(x)
        v = self._profile(r)[0]
        return v[0] if single else v

    def gradient(self, x):
        pts, r, single = self._radii(x)
        _, _, dv_r, _ = self._profile(r)
        out = dv_r[:, None] * pts
        return out[0] if single else out

    def hessian(self, x):
        pts, r, single = self._radii(x)
        _, _, dv_r, d2v = self._profile(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            xhat = np.where(r[:, None] > 0, pts / r[:, None], 0.0)
        outer = xhat[:, :, None] * xhat[:, None, :]
        eye = np.eye(self.dim)
        h = d2v[:, None, None] * outer + dv_r[:, None, None] * (eye - outer)
        return h[0] if single else h

    def profile(self, s):
        """``(v, v', v'/s, v'')`` at radii ``s`` in ``[0, radius)``."""
        return self._profile(np.asarray(s, dtype=float))


class CosineProfile(RadialProfile):
    """``v(s) = cos(pi s / (2 rho))``: the one-dimensional ball."""

    def __init__(self, dim, radius):
        super().__init__(dim, radius)
        self.c = math.pi / (2.0 * radius)

    def _profile(self, s):
        c = self.c
        cs = c * s
        v = np.cos(cs)
        dv = -c * np.sin(cs)
        small = cs < 1e-4
        safe = np.where(small, 1.0, s)
        dv_r = np.where(small, -c * c * (1.0 - cs * cs / 6.0), dv / safe)
        d2v = -c * c * v
        return v, dv, dv_r, d2v


# --- radial shooting -------------------------------------------------------

SHOOT_STEPS = 10_000
SHOOT_TOL = 1e-10


def _series(s, mu, k):
    """Taylor start ``v = 1 - mu s^2/(2k) + mu^2 s^4/(8k(k+2))`` and ``v'``."""
    a2 = -mu / (2.0 * k)
    a4 = mu * mu / (8.0 * k * (k + 2))
    return 1.0 + a2 * s * s + a4 * s**4, 2.0 * a2 * s + 4.0 * a4 * s**3


def _shoot(mu, k, steps=SHOOT_STEPS, keep=False):
    """RK4 for ``v'' + (k-1)/s v' + mu v = 0`` on ``(0, 1]`` from the series start.

    Returns ``(crossed, v(1), trajectory)``; ``crossed`` is true when ``v``
    changes sign before ``s = 1``.
    """
    h = 1.0 / steps
    km1 = k - 1.0
    s = h
    v, w = _series(h, mu, k)
    traj = [(0.0, 1.0, 0.0), (s, v, w)] if keep else None

    def rhs(s, v, w):
        return w, -km1 * w / s - mu * v

    for _ in range(steps - 1):
        k1v, k1w = rhs(s, v, w)
        k2v, k2w = rhs(s + 0.5 * h, v + 0.5 * h * k1v, w + 0.5 * h * k1w)
        k3v, k3w = rhs(s + 0.5 * h, v + 0.5 * h * k2v, w + 0.5 * h * k2w)
        k4v, k4w = rhs(s + h, v + h * k3v, w + h * k3w)
        v += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
        w += h * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0
        s += h
        if keep:
            traj.append((s, v, w))
        elif v < 0.0 and s < 1.0 - 0.5 * h:
            return True, v, None
    return v < 0.0, v, traj


@lru_cache(maxsize=None)
def shoot_unit_ball(k):
    """Principal Dirichlet eigenvalue and profile of the unit ball in ``R^k``.

    Bisection on ``mu`` using "the profile reaches zero before ``s = 1``"
    as the bracketing predicate, which is monotone in ``mu``. Stops once
    ``|v(1)| < 1e-10``.

    Returns
    -------
    mu : float
    s, v, dv : ndarray
        Radial grid on ``[0, 1]`` with profile values and slopes.
    """
    if k < 1:
        raise ParameterError(f"k must be positive, got {k}")
    lo, hi = 0.0, 1.0
    while not _shoot(hi, k)[0]:
        lo, hi = hi, 2.0 * hi
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        crossed, end, _ = _shoot(mid, k)
        if abs(end) < SHOOT_TOL or hi - lo <= 4.0 * np.finfo(float).eps * hi:
            break
        if crossed:
            hi = mid
        else:
            lo = mid
    _, _, traj = _shoot(mid, k, keep=True)
    arr = np.array(traj)
    return mid, arr[:, 0], arr[:, 1], arr[:, 2]


class ShootingProfile(RadialProfile):
    """Radial eigenfunction of the ``k``-ball obtained by shooting.

    The unit-ball solution is rescaled: ``mu_rho = mu_1 / rho^2`` and
    ``v_rho(s) = v_1(s / rho)``. Values between RK4 nodes come from cubic
    Hermite interpolation of ``(v, v')``; ``v''`` comes from the ODE itself.
    """

    def __init__(self, dim, radius, k):
        super().__init__(dim, radius)
        self.k = k
        mu1, s, v, dv = shoot_unit_ball(k)
        self.mu = mu1 / radius**2
        self._mu1 = mu1
        self._spline = CubicHermiteSpline(s, v, dv)
        self._dspline = self._spline.derivative()
        self._series_cut = 1e-3

    def _profile(self, s):
        rho, k, mu1 = self.radius, self.k, self._mu1
        t = s / rho
        v = self._spline(t)
        dv_t = self._dspline(t)
        small = t < self._series_cut
        a2 = -mu1 / (2.0 * k)
        a4 = mu1 * mu1 / (8.0 * k * (k + 2))
        safe = np.where(small, 1.0, t)
        dv_r_t = np.where(small, 2.0 * a2 + 4.0 * a4 * t * t, dv_t / safe)
        d2v_t = np.where(
            small,
            2.0 * a2 + 12.0 * a4 * t * t,
            -(k - 1.0) * dv_r_t - mu1 * v,
        )
        v = np.where(small, 1.0 + a2 * t * t + a4 * t**4, v)
        dv_t = np.where(small, 2.0 * a2 * t + 4.0 * a4 * t**3, dv_t)
        return v, dv_t / rho, dv_r_t / rho**2, d2v_t / rho**2


# --- eigenpairs ------------------------------------------------------------

@dataclass(frozen=True)
class EigenPair:
    """Principal eigenvalue with evaluators for the eigenfunction.

    ``order`` is the ``k`` of the operator the pair solves. ``exponents``
    holds ``p_i`` for product pairs (``u = prod cos(...)^(1/(p_i+1))``) and
    is ``None`` for radial pairs.
    """

    mu: float
    domain: object
    order: int
    exponents: tuple = None
    evaluator: object = field(default=None, repr=False, compare=False)

    def u(self, x):
        return self.evaluator.value(x)

    def grad(self, x):
        return self.evaluator.gradient(x)

    def hessian(self, x):
        return self.evaluator.hessian(x)

    @property
    def dim(self):
        return self.domain.dim


def rect_eigenpair(spec):
    """Principal ``P+_1`` eigenpair of the box ``spec``.

    ``kappa = sum 1/alpha_i^2``, ``mu = (pi/(2R))^2 / kappa`` and
    ``p_i = kappa alpha_i^2 - 1``.
    """
    alpha = np.array(spec.alpha)
    kappa = float(np.sum(1.0 / alpha**2))
    c = math.pi / (2.0 * spec.half_width)
    p = kappa * alpha**2 - 1.0
    evaluator = ProductCosine(c * alpha, 1.0 / (p + 1.0))
    return EigenPair(c * c / kappa, spec, 1, tuple(float(v) for v in p), evaluator)


def cube_eigenpair(n, r):
    """Principal ``P+_1`` eigenpair of ``(-r, r)^n``: ``mu = (pi/(2r))^2 / n``."""
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    return rect_eigenpair(BoxSpec.cube(n, r))


def ball_eigenpair(n, k, rho):
    """Principal ``P+_k`` eigenpair of the radius-``rho`` ball in ``R^n``.

    The eigenvalue is the Dirichlet Laplacian eigenvalue of the ``k``-ball.
    """
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise ParameterError(f"k must be an integer in [1, {n}], got {k!r}")
    spec = BallSpec(n, rho)
    if k == 1:
        prof = CosineProfile(n, spec.radius)
        mu = prof.c**2
    else:
        prof = ShootingProfile(n, spec.radius, k)
        mu = prof.mu
    return EigenPair(mu, spec, k, None, prof)


def residual(pair, x, k=None):
    """``P+_k(D^2 u(x)) + mu u(x)`` from the analytic Hessian."""
    k = pair.order if k is None else k
    h = pair.hessian(x)
    return mc.pk_plus(h, k) + pair.mu * pair.u(x)


def extremal_direction(pair, x):
    """Direction realising ``max <D^2u v, v>/|v|^2`` for a box pair.

    ``v_i = prod_{j != i} alpha_j^2 g_j`` with ``g = grad log u``; nonzero
    whenever at most one coordinate of ``x`` vanishes.
    """
    if not isinstance(pair.domain, BoxSpec):
        raise ParameterError("extremal direction is only defined for box pairs")
    g = np.atleast_2d(pair.evaluator.log_gradient(x))
    a2g = np.array(pair.domain.alpha) ** 2 * g
    n = a2g.shape[-1]
    out = np.ones_like(a2g)
    for i in range(n):
        for j in range(n):
            if j != i:
                out[:, i] *= a2g[:, j]
    return out[0] if np.ndim(x) == 1 else out


def sample_interior(domain, count, seed=0):
    """Scrambled Halton points strictly inside a box or ball."""
    n = domain.dim
    sampler = qmc.Halton(n, scramble=True, seed=seed)
    if isinstance(domain, BoxSpec):
        t = 2.0 * sampler.random(count) - 1.0
        pts = t * domain.half_sides
        return pts[domain.contains(pts)]
    out = []
    have = 0
    while have < count:
        t = (2.0 * sampler.random(2 * count) - 1.0) * domain.radius
        t = t[domain.contains(t)]
        out.append(t)
        have += len(t)
    return np.concatenate(out)[:count]


@dataclass(frozen=True)
class ConvexityReport:
    min_value: float
    argmin: float
    samples: int
    passed: bool


def radial_convexity_check(pair, samples=1000, tol=1e-8):
    """Minimum of ``v''(r) - v'(r)/r`` over ``r`` in ``[0, rho)``.

    At ``r = 0`` the quantity is ``0`` exactly (``v'(r) ~ v''(0) r``).
    """
    if not isinstance(pair.evaluator, RadialProfile):
        raise ParameterError("radial convexity check needs a ball eigenpair")
    rho = pair.domain.radius
    r = np.linspace(0.0, rho, samples + 1)[1:-1]
    _, _, dv_r, d2v = pair.evaluator.profile(r)
    gap = d2v - dv_r
    r = np.concatenate([[0.0], r])
    gap = np.concatenate([[0.0], gap])
    i = int(np.argmin(gap))
    return ConvexityReport(float(gap[i]), float(r[i]), int(gap.size), bool(gap[i] >= -tol))


# --- product counterexample for 2 <= k <= N-1 --------------------------------

@dataclass(frozen=True)
class CounterexampleCertificate:
    """Witness that the product candidate fails ``P+_k(D^2u) + mu u = 0``.

    ``residual_lower_bound`` is ``(N(k-1)/k)(N gamma^2 - a^2) u(x)``;
    ``frame_residual`` and ``pk_residual`` are the directly evaluated
    ``sum <D^2u v_i, v_i> + mu u`` and ``P+_k(D^2u) + mu u`` at ``point``.
    """

    dim: int
    order: int
    point: np.ndarray
    frame: mc.Frame
    residual_lower_bound: float
    a: float
    b: float
    gamma_sq: float
    mu: float
    u_value: float
    w1_quadratic: float
    frame_residual: float
    pk_residual: float

    @property
    def verified(self):
        return (
            self.residual_lower_bound > 0
            and self.frame_residual >= self.residual_lower_bound - 1e-10
            and self.pk_residual >= self.residual_lower_bound - 1e-10
        )


def product_candidate(n, k, r):
    """The only product function compatible with ``P+_k`` on ``(-r, r)^n``.

    ``u = prod cos(pi x_i/(2r))^(k/n)`` with ``mu = (k pi/(2r))^2 / n``.
    """
    c = math.pi / (2.0 * r)
    q = k / n
    evaluator = ProductCosine(np.full(n, c), np.full(n, q))
    p = tuple([n / k - 1.0] * n)
    return EigenPair((k * c) ** 2 / n, BoxSpec.cube(n, r), k, p, evaluator)


def _log_derivative_point(value, n, k, r):
    """``t`` in ``(-r, r)`` with ``f'(t)/f(t) = value`` for ``f = cos^(k/n)``."""
    return -(2.0 * r / math.pi) * math.atan(2.0 * r * n * value / (k * math.pi))


def _v_basis(n, count):
    """Orthonormal vectors in ``{v : v_1 + ... + v_{n-1} = 0, v_n = 0}``.

    Gram-Schmidt on ``e_1 - e_2, e_2 - e_3, ...``.
    """
    basis = []
    for i in range(count):
        v = np.zeros(n)
        v[i], v[i + 1] = 1.0, -1.0
        for b in basis:
            v -= (v @ b) * b
        basis.append(v / np.linalg.norm(v))
    return basis


def product_counterexample(n, k, r=math.pi / 2, a=1.0, b=2.0):
    """Build the certificate for ``2 <= k <= n-1`` and ``b > a > 0``.

    Picks ``x`` with ``x_1 = ... = x_{n-1}``, ``f'/f(x_1) = a`` and
    ``f'/f(x_n) = b``, sets ``v_1 = gamma (1/a, ..., 1/a, 1/b)`` and
    completes it with ``k - 1`` orthonormal vectors of
    ``{sum_{i<n} v_i = 0, v_n = 0}``.
    """
    if not 2 <= k <= n - 1:
        raise ParameterError(f"need 2 <= k <= n-1, got n={n}, k={k}")
    if not b > a > 0:
        raise ParameterError(f"need b > a > 0, got a={a}, b={b}")
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    pair = product_candidate(n, k, r)
    x = np.full(n, _log_derivative_point(a, n, k, r))
    x[-1] = _log_derivative_point(b, n, k, r)

    gamma_sq = (a * b) ** 2 / ((n - 1) * b**2 + a**2)
    gamma = math.sqrt(gamma_sq)
    v1 = gamma * np.array([1.0 / a] * (n - 1) + [1.0 / b])
    frame = mc.Frame(np.vstack([v1] + _v_basis(n, k - 1)))

    m = mc.special_matrix((n - k) / k, -1.0, n).dense()
    w1 = pair.evaluator.log_gradient(x) * v1
    w1_quadratic = float(w1 @ m @ w1)

    u = float(pair.u(x))
    bound = (n * (k - 1) / k) * (n * gamma_sq - a * a) * u
    h = pair.hessian(x)
    frame_res = float(mc.frame_sum(h, frame) + pair.mu * u)
    pk_res = float(mc.pk_plus(h, k) + pair.mu * u)
    return CounterexampleCertificate(
        dim=n,
        order=k,
        point=x,
        frame=frame,
        residual_lower_bound=bound,
        a=float(a),
        b=float(b),
        gamma_sq=gamma_sq,
        mu=pair.mu,
        u_value=u,
        w1_quadratic=w1_quadratic,
        frame_residual=frame_res,
        pk_residual=pk_res,
    )
