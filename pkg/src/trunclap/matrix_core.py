"""Dense symmetric linear algebra and the truncated Laplacian symbols.

Everything here works on single matrices and on stacks of shape
``(..., N, N)``; the stacked form is what the sampling checks use.

The eigensolver is a cyclic Jacobi iteration with a *relative* stopping
test ``|a_pq| <= tol * sqrt(|a_pp a_qq|)``. On the strongly graded Hessians
met near the boundary of a box (entries of order 1e9 whose top eigenvalue
is of order 1) this keeps the small eigenvalues accurate to a few ulps,
which a backward-stable LAPACK call does not.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, ParameterError

ORTHONORMAL_TOL = 1e-12


@dataclass(frozen=True)
class SymMatrix:
    """Real symmetric ``N x N`` matrix stored as its upper triangle.

    Parameters
    ----------
    dim : int
        Matrix size ``N``.
    packed : tuple of float
        Row-major upper triangle, ``N(N+1)/2`` entries.
    """

    dim: int
    packed: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"dimension must be positive, got {self.dim}")
        expected = self.dim * (self.dim + 1) // 2
        if len(self.packed) != expected:
            raise InvariantError(
                f"packed storage needs {expected} entries for N={self.dim}, "
                f"got {len(self.packed)}"
            )
        object.__setattr__(self, "packed", tuple(float(v) for v in self.packed))

    @classmethod
    def from_dense(cls, a, rtol=1e-12):
        """Build from a full square array; rejects visibly asymmetric input."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        if np.abs(a - a.T).max(initial=0.0) > rtol * scale:
            raise InvariantError("matrix is not symmetric")
        iu = np.triu_indices(a.shape[0])
        return cls(a.shape[0], tuple(a[iu]))

    @classmethod
    def diag(cls, values):
        return cls.from_dense(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, n):
        return cls.from_dense(np.eye(n))

    def dense(self):
        n = self.dim
        out = np.zeros((n, n))
        iu = np.triu_indices(n)
        out[iu] = self.packed
        out.T[iu] = self.packed
        return out

    def __sub__(self, other):
        if not isinstance(other, SymMatrix) or other.dim != self.dim:
            return NotImplemented
        return SymMatrix(self.dim, tuple(a - b for a, b in zip(self.packed, other.packed)))

    def __add__(self, other):
        if not isinstance(other, SymMatrix) or other.dim != self.dim:
            return NotImplemented
        return SymMatrix(self.dim, tuple(a + b for a, b in zip(self.packed, other.packed)))


def _as_stack(m):
    if isinstance(m, SymMatrix):
        return m.dense()
    a = np.asarray(m, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ParameterError(f"expected (..., N, N) matrices, got shape {a.shape}")
    return a


def jacobi_eigenvalues(a, tol=1e-15, max_sweeps=60):
    """Eigenvalues of symmetric matrices by the cyclic Jacobi method.

    Parameters
    ----------
    a : array_like, shape (..., N, N)
        Symmetric matrices; only the values are read, the input is not
        modified.
    tol : float
        Relative off-diagonal threshold.
    max_sweeps : int
        Cap on full sweeps over the ``(p, q)`` pairs.

    Returns
    -------
    ndarray, shape (..., N)
        Eigenvalues in nondecreasing order.
    """
    a = np.asarray(a, dtype=float)
    lead = a.shape[:-2]
    n = a.shape[-1]
    # Work on (N, N, M) so every a[p, q] is a contiguous batch vector.
    work = np.moveaxis(a.reshape((-1, n, n)), 0, -1).copy(order="C")
    iu, ju = np.triu_indices(n, 1)
    diag = np.arange(n)
    # Converged matrices are written back and dropped from the batch.
    idx = np.arange(work.shape[-1])
    b = work
    for _ in range(max_sweeps):
        d = np.abs(b[diag, diag])
        done = np.all(np.abs(b[iu, ju]) <= tol * np.sqrt(d[iu] * d[ju]), axis=0)
        if done.any():
            work[:, :, idx[done]] = b[:, :, done]
            b, idx = b[:, :, ~done], idx[~done]
        if idx.size == 0:
            break
        _sweep(b, n)
    else:
        work[:, :, idx] = b
    w = np.sort(work[np.arange(n), np.arange(n)].T, axis=-1)
    return w.reshape(lead + (n,))


def _sweep(a, n):
    """One cyclic sweep of Jacobi rotations over all ``(p, q)``, in place on ``(N, N, M)``."""
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q].copy()
            rotate = apq != 0.0
            if not rotate.any():
                continue
            app = a[p, p].copy()
            aqq = a[q, q].copy()
            safe = np.where(rotate, apq, 1.0)
            # theta overflows for denormal a_pq; t -> 0 is the right limit.
            with np.errstate(over="ignore"):
                theta = (aqq - app) / (2.0 * safe)
                t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(1.0, theta))
            t = np.where(rotate, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            colp = a[:, p].copy()
            colq = a[:, q].copy()
            a[:, p] = c * colp - s * colq
            a[:, q] = s * colp + c * colq
            rowp = a[p].copy()
            rowq = a[q].copy()
            a[p] = c * rowp - s * rowq
            a[q] = s * rowp + c * rowq
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0


def spectrum(m):
    """Sorted eigenvalues ``lambda_1 <= ... <= lambda_N`` of ``m``.

    Accepts a :class:`SymMatrix` or an array of shape ``(..., N, N)``.
    """
    return jacobi_eigenvalues(_as_stack(m))


def _check_k(k, n):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise ParameterError(f"k must be an integer in [1, {n}], got {k!r}")


def pk_plus(m, k):
    """Sum of the ``k`` largest eigenvalues."""
    w = spectrum(m)
    _check_k(k, w.shape[-1])
    return w[..., -k:].sum(axis=-1)


def pk_minus(m, k):
    """Sum of the ``k`` smallest eigenvalues."""
    w = spectrum(m)
    _check_k(k, w.shape[-1])
    return w[..., :k].sum(axis=-1)


def operator_norm(m):
    """``max_i |lambda_i(m)|``."""
    return np.abs(spectrum(m)).max(axis=-1)


@dataclass(frozen=True)
class Frame:
    """``k`` orthonormal vectors in ``R^N``, stored as rows of ``vectors``."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[0] > v.shape[1]:
            raise InvariantError(f"frame must be (k, N) with k <= N, got {v.shape}")
        gram = v @ v.T
        err = np.abs(gram - np.eye(v.shape[0])).max()
        if err > ORTHONORMAL_TOL:
            raise InvariantError(f"frame is not orthonormal (max Gram error {err:.3e})")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def count(self):
        return self.vectors.shape[0]


def frame_sum(m, frame):
    """``sum_i <m v_i, v_i>`` over the vectors of an orthonormal frame."""
    if not isinstance(frame, Frame):
        frame = Frame(frame)
    a = _as_stack(m)
    if a.shape[-1] != frame.dim:
        raise ParameterError(f"frame dimension {frame.dim} does not match matrix size {a.shape[-1]}")
    v = frame.vectors
    return np.einsum("ki,...ij,kj->...", v, a, v)


def random_frames(n, k, count, rng):
    """``count`` Haar-random orthonormal ``k``-frames in ``R^n``.

    Returns an array of shape ``(count, k, n)``; rows of each slice are the
    frame vectors.
    """
    g = rng.standard_normal((count, n, k))
    q, r = np.linalg.qr(g)
    # Sign fix makes the distribution Haar rather than QR-biased.
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    q = q * signs[:, None, :]
    return np.swapaxes(q, 1, 2)


def frame_sums(m, frames):
    """Vectorised :func:`frame_sum` for a stack of frames ``(count, k, N)``."""
    a = _as_stack(m)
    return np.einsum("cki,ij,ckj->c", frames, a, frames)


def special_matrix(a, b, n):
    """Matrix with ``a`` on the diagonal and ``b`` everywhere else."""
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    full = np.full((n, n), float(b))
    np.fill_diagonal(full, float(a))
    return SymMatrix.from_dense(full)


def special_spectrum(a, b, n):
    """Closed-form spectrum of :func:`special_matrix`.

    ``a - b`` with multiplicity ``n - 1`` and ``a + (n - 1) b`` once, sorted.
    At ``b = 0`` both expressions equal ``a``.
    """
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    values = np.array([a - b] * (n - 1) + [a + (n - 1) * b], dtype=float)
    return np.sort(values)
