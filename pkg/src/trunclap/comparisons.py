"""Eigenvalue comparisons between boxes, balls and box intersections.

Eigenvalue coefficients in the Lieb reports are kept in units of
``c = (pi/(2R))^2`` and computed with :class:`fractions.Fraction` from the
exact binary values of the inputs, so the strict-inequality decisions at
the boundary cases are exact.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .closed_form import BoxSpec, ball_eigenpair, rect_eigenpair
from .errors import ParameterError

EQUALITY_TOL = 1e-12


def _scale(r):
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    return (math.pi / (2.0 * r)) ** 2


@dataclass(frozen=True)
class FkReport:
    alpha: tuple
    mu_rect: float
    mu_cube: float
    harmonic_mean: float
    geometric_mean: float
    is_equality: bool

    @property
    def holds(self):
        return self.mu_rect <= self.mu_cube * (1.0 + EQUALITY_TOL) and (
            self.harmonic_mean <= self.geometric_mean * (1.0 + EQUALITY_TOL)
        )


def fk_check(alpha, r):
    """Compare the box with anisotropy ``alpha`` to the cube of equal volume.

    ``alpha`` must satisfy ``prod alpha_i = 1`` to ``1e-10``. The means are
    taken over ``alpha_i^2``.
    """
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 1 or a.size < 2 or np.any(a <= 0):
        raise ParameterError("alpha must be at least two positive numbers")
    if abs(float(np.prod(a)) - 1.0) > 1e-10:
        raise ParameterError(f"alpha must have product 1, got {np.prod(a):.15g}")
    n = a.size
    mu_rect = rect_eigenpair(BoxSpec(n, r, tuple(a))).mu
    mu_cube = _scale(r) / n
    sq = a * a
    harmonic = n / float(np.sum(1.0 / sq))
    geometric = float(np.exp(np.mean(np.log(sq))))
    equal = bool(np.ptp(a) <= EQUALITY_TOL * a.max())
    return FkReport(tuple(float(v) for v in a), mu_rect, mu_cube, harmonic, geometric, equal)


def normalize_alpha(alpha):
    """Rescale to unit product."""
    a = np.asarray(alpha, dtype=float)
    return a / np.exp(np.mean(np.log(a)))


def unit_ball_volume(n):
    """Volume of the unit ball in ``R^n`` from ``w_n = (2 pi / n) w_{n-2}``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    w = 2.0 if n % 2 else math.pi
    for m in range(3 if n % 2 else 4, n + 1, 2):
        w *= 2.0 * math.pi / m
    return w


@dataclass(frozen=True)
class Fk2Report:
    dim: int
    half_width: float
    rho: float
    mu_ball: float
    mu_cube: float
    ratio: float
    ball_volume: float
    cube_volume: float

    @property
    def holds(self):
        return self.mu_ball > self.mu_cube


def fk2_check(n, r):
    """Ball versus cube of the same volume ``(2r)^n``.

    ``rho = 2r w_n^(-1/n)``; the ball eigenvalue is taken from the ball
    eigenpair and the ratio ``mu_ball / mu_cube`` equals ``n w_n^(2/n) / 4``.
    """
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    w = unit_ball_volume(n)
    rho = 2.0 * r * w ** (-1.0 / n)
    mu_ball = ball_eigenpair(n, 1, rho).mu
    mu_cube = _scale(r) / n
    return Fk2Report(
        dim=n,
        half_width=float(r),
        rho=rho,
        mu_ball=mu_ball,
        mu_cube=mu_cube,
        ratio=mu_ball / mu_cube,
        ball_volume=w * rho**n,
        cube_volume=(2.0 * r) ** n,
    )


@dataclass(frozen=True)
class LiebReport:
    """Intersection infimum against the sum of the two box eigenvalues.

    ``*_coef`` fields are exact multiples of ``scale = (pi/(2R))^2``.
    """

    dim: int
    alpha: tuple
    scale: float
    inf_coef: Fraction
    mu_a_coef: Fraction
    mu_b_coef: Fraction

    @property
    def reversed(self):
        return self.inf_coef > self.mu_a_coef + self.mu_b_coef

    @property
    def mu_intersection_inf(self):
        return float(self.inf_coef) * self.scale

    @property
    def mu_a(self):
        return float(self.mu_a_coef) * self.scale

    @property
    def mu_b(self):
        return float(self.mu_b_coef) * self.scale


def _exact(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def lieb_reversal_2d(a1, a2, r, squared=False):
    """Boxes ``A = Rect(a1, a2)`` and ``B = Rect(a2, a1)`` in the plane.

    With ``a1 <= a2`` the best translate leaves the square of half side
    ``R/a2``: ``inf = a2^2/2`` while ``mu(A) = mu(B) = a1^2 a2^2/(a1^2 + a2^2)``
    (coefficients of ``(pi/(2R))^2``). Pass ``squared=True`` to give
    ``a1^2, a2^2`` directly (exact boundary cases such as ``(1, 3)``).
    """
    s1, s2 = _exact(a1), _exact(a2)
    if not squared:
        s1, s2 = s1 * s1, s2 * s2
    if not (s1 > 0 and s2 > 0):
        raise ParameterError("alpha entries must be positive")
    if s1 > s2:
        raise ParameterError("expected a1 <= a2")
    inf = s2 / 2
    mu = s1 * s2 / (s1 + s2)
    alpha = (float(s1) ** 0.5, float(s2) ** 0.5) if squared else (float(a1), float(a2))
    return LiebReport(2, alpha, _scale(r), inf, mu, mu)


def lieb_reversal_nd(alpha, r, squared=False):
    """``A = Rect(alpha)``, ``B = Rect(alpha with first two swapped)``, ``N >= 3``.

    The best intersection is ``Rect(a2, a2, a3, ...)``, whose coefficient is
    ``1 / (2/a2^2 + sum_{i>=3} 1/a_i^2)``.
    """
    vals = [_exact(a) for a in alpha]
    sq = vals if squared else [v * v for v in vals]
    if len(sq) < 3:
        raise ParameterError("need N >= 3; use lieb_reversal_2d in the plane")
    if any(not s > 0 for s in sq):
        raise ParameterError("alpha entries must be positive")
    if any(sq[i] > sq[i + 1] for i in range(len(sq) - 1)):
        raise ParameterError("alpha must be sorted ascending")
    tail = sum((1 / s for s in sq[2:]), Fraction(0))
    inf = 1 / (2 / sq[1] + tail)
    mu = 1 / (1 / sq[0] + 1 / sq[1] + tail)
    shown = tuple(float(s) ** 0.5 for s in sq) if squared else tuple(float(a) for a in alpha)
    return LiebReport(len(sq), shown, _scale(r), inf, mu, mu)


def box_eigenvalue(half_sides):
    """``mu_1^+`` of the box with the given half side lengths: ``(pi/2)^2 / sum l_i^2``."""
    l = np.asarray(half_sides, dtype=float)
    return (math.pi / 2.0) ** 2 / np.sum(l * l, axis=-1)


def _overlap(h1, h2, shift):
    # Length of (-h1, h1) intersected with (shift - h2, shift + h2).
    return np.clip(np.minimum(h1, shift + h2) - np.maximum(-h1, shift - h2), 0.0, None)


def intersection_inf_search(half_a, half_b, resolution=41):
    """Grid search of ``min_x mu(A cap (B + x))`` over translations.

    ``A`` and ``B`` are centred boxes given by half side lengths. Shifts
    range over ``[-(a_i + b_i), a_i + b_i]`` per axis; translations with an
    empty intersection are skipped.
    """
    half_a = np.asarray(half_a, dtype=float)
    half_b = np.asarray(half_b, dtype=float)
    reach = half_a + half_b
    axes = [np.linspace(-s, s, resolution) for s in reach]
    shifts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, half_a.size)
    lengths = _overlap(half_a, half_b, shifts)
    ok = np.all(lengths > 0, axis=1)
    return float(box_eigenvalue(0.5 * lengths[ok]).min())
