"""Finite-dimensional linear operators: dense matrices, circular convolution,
Haar wavelet synthesis, separable Gaussian blur and compositions, together
with norm estimation and range-projection diagnostics."""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import LinearOperator as _ScipyLinOp, lsqr


class OperatorNormError(RuntimeError):
    """Power iteration did not converge; carries the last estimate."""

    def __init__(self, message, last_estimate):
        super().__init__(message)
        self.last_estimate = last_estimate


class LinearOperator:
    """Base class for bounded linear operators on real coordinate spaces.

    Subclasses implement `_apply` and `_apply_adjoint`; the public entry
    points validate dimensions. Operators are immutable after construction
    and safe to share across threads.
    """

    kind = "abstract"

    def __init__(self, domain_dim, range_dim):
        if domain_dim < 1 or range_dim < 1:
            raise ValueError("operator dimensions must be positive")
        self.domain_dim = int(domain_dim)
        self.range_dim = int(range_dim)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.domain_dim,):
            raise ValueError(
                f"expected vector of length {self.domain_dim}, got shape {x.shape}"
            )
        return self._apply(x)

    def apply_adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.range_dim,):
            raise ValueError(
                f"expected vector of length {self.range_dim}, got shape {y.shape}"
            )
        return self._apply_adjoint(y)

    def _apply(self, x):
        raise NotImplementedError

    def _apply_adjoint(self, y):
        raise NotImplementedError

    def as_matrix(self):
        """Dense matrix representation; intended for small cross-checks."""
        cols = [self.apply(e) for e in np.eye(self.domain_dim)]
        return np.column_stack(cols)


class DenseOperator(LinearOperator):
    kind = "dense"

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        super().__init__(matrix.shape[1], matrix.shape[0])
        self.matrix = matrix.copy()
        self.matrix.setflags(write=False)

    def _apply(self, x):
        return self.matrix @ x

    def _apply_adjoint(self, y):
        return self.matrix.T @ y


class CircularConvolution(LinearOperator):
    """Discretized circular convolution on [0,1] with a box kernel.

    The kernel is the indicator of an interval of the given width, sampled
    causally on grid points 0..m-1 with m = round(width*n). The grid weight
    h = 1/n is absorbed into the kernel so convolving the constant 1 gives
    approximately `width`. Application goes through the FFT.
    """

    kind = "circular_convolution"

    def __init__(self, n, width):
        if n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 < width < 1.0:
            raise ValueError("width must lie in (0, 1)")
        super().__init__(n, n)
        self.width = float(width)
        m = int(round(width * n))
        m = max(m, 1)
        kernel = np.zeros(n)
        kernel[:m] = 1.0 / n
        self.kernel = kernel
        self.kernel.setflags(write=False)
        self.kernel_support = m
        self._kernel_fft = np.fft.rfft(kernel)

    def _apply(self, x):
        return np.fft.irfft(np.fft.rfft(x) * self._kernel_fft, n=self.domain_dim)

    def _apply_adjoint(self, y):
        # correlation: convolution with the reflected kernel
        return np.fft.irfft(
            np.fft.rfft(y) * np.conj(self._kernel_fft), n=self.range_dim
        )


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class HaarSynthesis(LinearOperator):
    """Orthonormal inverse discrete Haar transform.

    Coefficient ordering: the single coarsest approximation coefficient
    first, then detail blocks from coarse to fine. Filters are
    (1/sqrt2, 1/sqrt2) and (1/sqrt2, -1/sqrt2) applied through the standard
    cascade, so the operator satisfies A* A = I in the Euclidean inner
    product.
    """

    kind = "haar_synthesis"

    def __init__(self, n):
        if not _is_power_of_two(n) or n < 1:
            raise ValueError("n must be a power of two")
        super().__init__(n, n)

    def _apply(self, x):
        # inverse cascade: rebuild samples from coarse to fine
        out = x[:1].copy()
        pos = 1
        s = 1.0 / np.sqrt(2.0)
        while pos < self.domain_dim:
            detail = x[pos : 2 * pos]
            merged = np.empty(2 * pos)
            merged[0::2] = (out + detail) * s
            merged[1::2] = (out - detail) * s
            out = merged
            pos *= 2
        return out

    def _apply_adjoint(self, y):
        # forward cascade: averages and differences down to one coefficient
        coeffs = np.empty(self.range_dim)
        work = y
        pos = self.range_dim
        s = 1.0 / np.sqrt(2.0)
        while pos > 1:
            half = pos // 2
            coeffs[half:pos] = (work[0::2] - work[1::2]) * s
            work = (work[0::2] + work[1::2]) * s
            pos = half
        coeffs[0] = work[0]
        return coeffs


class SeparableBlur(LinearOperator):
    """Separable Gaussian blur on N x N images flattened column-major.

    A = T (x) T with T the symmetric banded Toeplitz matrix whose first row
    is z_j = exp(-j^2 / (2 sigma^2)) / (sigma sqrt(2 pi)) for j < band and
    zero beyond. Application is X -> T X T^T without forming the Kronecker
    product; T is symmetric so the operator is self-adjoint.
    """

    kind = "separable_blur"

    def __init__(self, N, band, sigma):
        if N < 1:
            raise ValueError("N must be at least 1")
        if not 1 <= band <= N:
            raise ValueError("band must lie in [1, N]")
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        super().__init__(N * N, N * N)
        self.N = int(N)
        self.band = int(band)
        self.sigma = float(sigma)
        j = np.arange(N)
        profile = np.where(
            j < band,
            np.exp(-(j.astype(float) ** 2) / (2.0 * sigma**2))
            / (sigma * np.sqrt(2.0 * np.pi)),
            0.0,
        )
        self.T = np.zeros((N, N))
        for row in range(N):
            lo = max(0, row - band + 1)
            hi = min(N, row + band)
            self.T[row, lo:hi] = profile[np.abs(np.arange(lo, hi) - row)]
        self.T.setflags(write=False)

    def _apply(self, x):
        X = x.reshape(self.N, self.N, order="F")
        return (self.T @ X @ self.T.T).reshape(-1, order="F")

    def _apply_adjoint(self, y):
        return self._apply(y)


class Composition(LinearOperator):
    """Composition outer o inner, applied as outer(inner(x))."""

    kind = "composition"

    def __init__(self, outer, inner):
        if inner.range_dim != outer.domain_dim:
            raise ValueError(
                "inner range dimension must match outer domain dimension"
            )
        super().__init__(inner.domain_dim, outer.range_dim)
        self.outer = outer
        self.inner = inner

    def _apply(self, x):
        return self.outer.apply(self.inner.apply(x))

    def _apply_adjoint(self, y):
        return self.inner.apply_adjoint(self.outer.apply_adjoint(y))


def make_circular_convolution(n, width):
    return CircularConvolution(n, width)


def make_haar_synthesis(n):
    return HaarSynthesis(n)


def make_blur(N, band, sigma):
    return SeparableBlur(N, band, sigma)


def compose(outer, inner):
    return Composition(outer, inner)


def operator_norm(op, tol=1e-6, max_iter=10_000):
    """Estimate the spectral norm by power iteration on A*A.

    Starts from the normalized all-ones vector for cross-run determinism.
    Raises OperatorNormError (carrying the last estimate) if the relative
    change between successive estimates does not drop below tol/10 within
    max_iter iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.ones(op.domain_dim) / np.sqrt(op.domain_dim)
    sigma = 0.0
    for _ in range(max_iter):
        w = op.apply_adjoint(op.apply(v))
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        sigma_new = np.sqrt(norm_w)
        v = w / norm_w
        if abs(sigma_new - sigma) <= 0.1 * tol * max(sigma_new, 1e-300):
            return sigma_new
        sigma = sigma_new
    raise OperatorNormError(
        f"power iteration did not converge within {max_iter} iterations",
        sigma,
    )


def _as_scipy_operator(op):
    return _ScipyLinOp(
        (op.range_dim, op.domain_dim),
        matvec=op.apply,
        rmatvec=op.apply_adjoint,
        dtype=float,
    )


def range_complement_ratio(op, v, tol=1e-10, max_iter=None):
    """Fraction of v orthogonal to the closure of range(op).

    Computes ||Qv|| / ||v|| with Q the projection onto the orthogonal
    complement of range(op), via ||Qv||^2 = ||v||^2 - ||Pv||^2 where Pv is
    obtained from the iterative least-squares solve min_x ||Ax - v||.
    Tiny negative values from cancellation are clamped to zero.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (op.range_dim,):
        raise ValueError(f"expected vector of length {op.range_dim}")
    norm_v = np.linalg.norm(v)
    if norm_v == 0.0:
        raise ValueError("v must be nonzero")
    if max_iter is None:
        max_iter = 20 * max(op.domain_dim, op.range_dim)
    result = lsqr(
        _as_scipy_operator(op), v, atol=tol, btol=tol, iter_lim=max_iter
    )
    x = result[0]
    Pv = op.apply(x)
    q_sq = norm_v**2 - np.linalg.norm(Pv) ** 2
    return np.sqrt(max(q_sq, 0.0)) / norm_v
