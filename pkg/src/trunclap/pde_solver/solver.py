"""Dirichlet solver and principal-eigenvalue iteration for the discrete ``P+_1``."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import spsolve

from ..errors import DivergenceError, IterationLimitError, ParameterError
from .fields import ScalarField

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    """Knobs for :func:`solve_dirichlet`.

    ``method`` is ``"howard"`` (policy iteration with sparse direct solves)
    or ``"explicit"`` (damped fixed point ``u <- u + tau (F(u) - f)``).
    ``tau`` defaults to ``0.45 * min(h+ h-)`` for the explicit method, which
    keeps every update monotone.
    """

    method: str = "howard"
    tol: float = 1e-10
    max_iter: int = 200
    tau: float = None
    threads: int = 1

    def __post_init__(self):
        if self.method not in ("howard", "explicit"):
            raise ParameterError(f"unknown method {self.method!r}")
        if not self.tol > 0 or self.max_iter < 1:
            raise ParameterError("tolerance and iteration cap must be positive")
        if self.tau is not None and not self.tau > 0:
            raise ParameterError(f"damping must be positive, got {self.tau}")
        if self.threads < 1:
            raise ParameterError(f"threads must be positive, got {self.threads}")


@dataclass
class DirichletResult:
    field: ScalarField
    iterations: int
    residual_history: list
    policy: np.ndarray = None

    @property
    def values(self):
        return self.field.values


def _forcing(stencil, f):
    grid = stencil.grid
    values = grid.sample(f) if callable(f) else np.broadcast_to(np.asarray(f, dtype=float), (grid.size,)).copy()
    if values.shape != (grid.size,):
        raise ParameterError(f"forcing must have {grid.size} interior values")
    if not np.all(np.isfinite(values)):
        raise ParameterError("forcing term is not bounded on the grid")
    return values


def solve_dirichlet(stencil, f, cfg=None, u0=None, policy=None):
    """Solve ``max_d D_d u = f`` with ``u = 0`` outside the interior nodes.

    Parameters
    ----------
    stencil : Stencil
    f : callable or array_like
        Forcing; callables receive the ``(M, N)`` interior points.
    cfg : SolverConfig, optional
    u0 : array_like, optional
        Starting field (explicit method) or initial guess for choosing the
        first policy (Howard).
    policy : array_like of int, optional
        Starting direction index per node for Howard's method.

    Returns
    -------
    DirichletResult

    Raises
    ------
    IterationLimitError
        When the residual is still above ``cfg.tol * max(1, |f|_inf)``
        after ``cfg.max_iter`` iterations.
    """
    cfg = cfg or SolverConfig()
    rhs = _forcing(stencil, f)
    scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
    if cfg.method == "howard":
        return _howard(stencil, rhs, cfg, scale, u0, policy)
    return _explicit(stencil, rhs, cfg, scale, u0)


def _howard(stencil, rhs, cfg, scale, u0, policy):
    m = stencil.size
    u = np.zeros(m) if u0 is None else np.array(u0, dtype=float)
    history = []
    if policy is None:
        _, policy = stencil.apply(u, threads=cfg.threads, with_policy=True)
    policy = np.asarray(policy)
    seen = set()
    for it in range(1, cfg.max_iter + 1):
        u = spsolve(stencil.policy_matrix(policy), rhs)
        if not np.all(np.isfinite(u)):
            raise DivergenceError("policy system produced non-finite values", history)
        fu, new_policy = stencil.apply(u, threads=cfg.threads, with_policy=True)
        res = float(np.abs(fu - rhs).max(initial=0.0))
        history.append(res)
        if res <= cfg.tol * scale:
            return DirichletResult(ScalarField(stencil.grid, u), it, history, new_policy)
        key = new_policy.tobytes()
        if np.array_equal(new_policy, policy) or key in seen:
            # Policy is stable: u is the exact discrete solution up to rounding.
            return DirichletResult(ScalarField(stencil.grid, u), it, history, new_policy)
        seen.add(key)
        policy = new_policy
    raise IterationLimitError(f"Howard iteration did not converge in {cfg.max_iter} steps", history)


def _explicit(stencil, rhs, cfg, scale, u0):
    m = stencil.size
    u = np.zeros(m) if u0 is None else np.array(u0, dtype=float)
    tau = cfg.tau if cfg.tau is not None else 0.45 * stencil.min_step_product
    history = []
    for it in range(1, cfg.max_iter + 1):
        r = stencil.apply(u, threads=cfg.threads) - rhs
        res = float(np.abs(r).max(initial=0.0))
        history.append(res)
        if not np.isfinite(res):
            raise DivergenceError("explicit iteration blew up", history)
        if res <= cfg.tol * scale:
            return DirichletResult(ScalarField(stencil.grid, u), it, history)
        u = u + tau * r
    raise IterationLimitError(f"explicit iteration did not converge in {cfg.max_iter} steps", history)


@dataclass
class EigenConfig:
    """Settings for :func:`eigen_inverse_power`."""

    tol: float = 1e-9
    max_iter: int = 400
    burn_in: int = 5
    average: int = 5
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass
class EigenEstimate:
    mu_h: float
    iterations: int
    residual_history: list
    mu_history: list
    eigenfield: ScalarField


def eigen_inverse_power(stencil, cfg=None, start=None):
    """Principal eigenvalue of the discrete ``P+_1`` by inverse iteration.

    Each step solves ``F(w) = -u_n / |u_n|_inf`` and sets
    ``u_{n+1} = w / |w|_inf``. With ``u_n`` normalised the step's estimate
    is ``1 / |w|_inf``; the reported ``mu_h`` averages the last
    ``cfg.average`` estimates once successive ones agree to ``cfg.tol``
    (relative). The start is the constant 1, and the iteration stays
    positive by the discrete maximum principle.
    """
    cfg = cfg or EigenConfig()
    m = stencil.size
    u = np.ones(m) if start is None else np.array(start, dtype=float)
    if np.any(u <= 0):
        raise ParameterError("the starting field must be positive at interior nodes")
    mus, history = [], []
    policy = None
    for it in range(1, cfg.max_iter + 1):
        rhs = -u / u.max()
        res = solve_dirichlet(stencil, rhs, cfg.solver, policy=policy)
        w, policy = res.values, res.policy
        top = float(w.max())
        if not np.isfinite(top) or top <= 0:
            raise DivergenceError("inverse iteration lost positivity", history)
        mus.append(1.0 / top)
        u = w / top
        if len(mus) > 1:
            history.append(abs(mus[-1] - mus[-2]) / mus[-1])
            if it > cfg.burn_in and history[-1] < cfg.tol:
                mu = float(np.mean(mus[-cfg.average:]))
                log.debug("inverse iteration converged: mu_h=%.12g after %d steps", mu, it)
                return EigenEstimate(mu, it, history, mus, ScalarField(stencil.grid, u))
    raise IterationLimitError(f"inverse iteration did not settle in {cfg.max_iter} steps", history)


def bnv_certify_lower_bound(stencil, mu, phi, tol=0.0, threads=1):
    """True when ``F(phi) + mu phi <= tol`` at every interior node.

    A positive ``phi`` passing this test is a discrete witness that ``mu``
    is admissible in the sup defining the principal eigenvalue.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise ParameterError("phi must be positive at every interior node")
    return bool(np.all(stencil.apply(phi, threads=threads) + mu * phi <= tol))


def explore_negative_forcing(stencils, value=-1.0, cfg=None):
    """Solve ``F(u) = value`` on a sequence of grids and tabulate the size of ``u``.

    Exploratory only: with a negative constant forcing on a domain with
    flat faces the discrete solutions may grow under refinement, which is
    what the rows let one look at.
    """
    rows = []
    for st in stencils:
        res = solve_dirichlet(st, value, cfg)
        u = res.values
        pts = st.grid.interior_points
        slack = st.grid.domain.slack(pts)
        near = slack <= 1.01 * st.grid.h
        rows.append({
            "h": st.grid.h,
            "nodes": st.size,
            "sup_u": float(np.abs(u).max()),
            "max_boundary_layer": float(np.abs(u[near]).max()) if near.any() else 0.0,
            "iterations": res.iterations,
        })
    return rows
