"""Type-1 and type-2 nonuniform FFTs on small tensor-product mode grids.

Gaussian-kernel spreading onto a 2x-oversampled (5-smooth) uniform grid,
an in-repo mixed-radix FFT, and diagonal deconvolution.  Mode counts here
are the n_f <= ~100 per dimension needed by the Gauss transform, so a
tensor-factored exact evaluation (`dft_oracle`) doubles as both testing
oracle and fast path for small problems.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .fftpack import fftn, next_smooth

EPS_MIN = 1e-14


@dataclass(frozen=True)
class ModeGrid:
    """Tensor-product grid of Fourier modes.

    Modes per dimension are the signed integers m = -n_f/2 .. n_f/2-1.
    Coefficient arrays are shaped (n_f,)*dim, C-order, with axis i running
    over the signed modes of dimension i in ascending order.
    """

    dim: int
    n_f: int

    def __post_init__(self):
        if self.n_f < 2 or self.n_f % 2:
            raise ValueError(f"mode count n_f={self.n_f} must be even and >= 2")
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2, or 3")

    @property
    def modes(self):
        return np.arange(-self.n_f // 2, self.n_f // 2)

    @property
    def shape(self):
        return (self.n_f,) * self.dim

    @property
    def size(self):
        return self.n_f ** self.dim


def _check_points(points, grid):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != grid.dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, grid has {grid.dim}")
    return pts


def _phase_1d(pts, grid, sign):
    """Per-dimension phase factors exp(sign*i*m*x); list of (M, n_f) arrays."""
    return [np.exp(sign * 1j * np.outer(pts[:, ax], grid.modes)) for ax in range(grid.dim)]


def dft_oracle(points, data, grid, kind, sign=+1):
    """Exact (to roundoff) type-1/type-2 sums by tensor-factored phases.

    kind is "type1" (data = per-point strengths, returns mode coefficients)
    or "type2" (data = mode coefficients, returns per-point values).
    """
    pts = _check_points(points, grid)
    M = pts.shape[0]
    if kind == "type1":
        strengths = np.asarray(data, dtype=np.complex128)
        out = np.zeros(grid.shape, dtype=np.complex128)
        chunk = max(1, 2 ** 22 // max(grid.size, 1))
        for lo in range(0, M, chunk):
            hi = min(lo + chunk, M)
            E = _phase_1d(pts[lo:hi], grid, sign)
            if grid.dim == 1:
                out += E[0].T @ strengths[lo:hi]
            elif grid.dim == 2:
                out += np.einsum("j,ja,jb->ab", strengths[lo:hi], E[0], E[1])
            else:
                out += np.einsum("j,ja,jb,jc->abc", strengths[lo:hi], E[0], E[1], E[2])
        return out
    if kind == "type2":
        coeffs = np.asarray(data, dtype=np.complex128).reshape(grid.shape)
        out = np.empty(M, dtype=np.complex128)
        chunk = max(1, 2 ** 22 // max(grid.n_f ** (grid.dim - 1), 1))
        for lo in range(0, M, chunk):
            hi = min(lo + chunk, M)
            E = _phase_1d(pts[lo:hi], grid, sign)
            if grid.dim == 1:
                out[lo:hi] = E[0] @ coeffs
            elif grid.dim == 2:
                out[lo:hi] = np.einsum("ab,ja,jb->j", coeffs, E[0], E[1])
            else:
                tmp = np.einsum("abc,ja->jbc", coeffs, E[0])
                tmp = np.einsum("jbc,jb->jc", tmp, E[1])
                out[lo:hi] = np.einsum("jc,jc->j", tmp, E[2])
        return out
    raise ValueError(f"unknown oracle kind {kind!r}")


def _plan(grid, epsilon):
    """Oversampled grid size, spreading half-width and kernel variance."""
    epsilon = max(float(epsilon), EPS_MIN)
    # error ~ exp(-pi*w*sqrt(1-1/R)) for oversampling R and half-width w
    w = int(np.ceil(np.log(30.0 / epsilon) / (np.pi / np.sqrt(2.0)))) + 1
    n_r = next_smooth(2 * grid.n_f)
    if 2 * w + 1 > n_r:
        n_r = next_smooth(max(2 * grid.n_f, 2 * w + 2))
    tau = np.pi * w / (n_r * np.sqrt(n_r * (n_r - grid.n_f)))
    return n_r, w, tau


def _use_direct(grid, M, w):
    spread_cost = M * (2 * w + 1) ** grid.dim
    fft_cost = grid.size * max(np.log2(max(grid.size, 2)), 1.0)
    return M * grid.size < 4 * (fft_cost + spread_cost + grid.size)


def _deconv_tensor(grid, n_r, tau):
    m = grid.modes
    with np.errstate(over="raise"):
        rho = (np.sqrt(np.pi / tau) / n_r) * np.exp(m * m * tau)
    out = rho
    for _ in range(grid.dim - 1):
        out = np.multiply.outer(out, rho)
    return out


def _bins(grid, n_r, sign):
    """Oversampled-DFT bin of each output mode, per dimension."""
    return np.mod(-sign * grid.modes, n_r)


def nufft_type1(points, strengths, grid, epsilon, sign=-1, method=None):
    """F(k) = sum_j f_j exp(sign * i k.x_j) for all k on the mode grid.

    Points must be scaled into [-pi, pi)^dim by the caller; relative l2
    error versus the exact sum is below epsilon.  method forces "direct"
    (tensor-factored exact sums) or "grid" (spread+FFT); the default picks
    whichever is cheaper.
    """
    pts = _check_points(points, grid)
    strengths = np.asarray(strengths, dtype=np.complex128)
    if pts.shape[0] != strengths.shape[0]:
        raise ValueError("points/strengths length mismatch")
    if pts.shape[0] == 0:
        return np.zeros(grid.shape, dtype=np.complex128)
    n_r, w, tau = _plan(grid, epsilon)
    if method == "direct" or (method is None and _use_direct(grid, pts.shape[0], w)):
        return dft_oracle(pts, strengths, grid, "type1", sign)
    x = np.mod(pts, 2.0 * np.pi)
    spread = np.zeros((n_r,) * grid.dim, dtype=np.complex128)
    backend.nufft_spread(x, strengths, n_r, w, tau, spread)
    D = fftn(spread, sign=-1)
    b = _bins(grid, n_r, sign)
    F = D[np.ix_(*[b] * grid.dim)] if grid.dim > 1 else D[b]
    return F * _deconv_tensor(grid, n_r, tau)


def nufft_type2(points, coeffs, grid, epsilon, sign=+1, method=None):
    """f(x_j) = sum_k F(k) exp(sign * i k.x_j), the adjoint evaluation."""
    pts = _check_points(points, grid)
    coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(grid.shape)
    if pts.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    n_r, w, tau = _plan(grid, epsilon)
    if method == "direct" or (method is None and _use_direct(grid, pts.shape[0], w)):
        return dft_oracle(pts, coeffs, grid, "type2", sign)
    x = np.mod(pts, 2.0 * np.pi)
    E = np.zeros((n_r,) * grid.dim, dtype=np.complex128)
    b = _bins(grid, n_r, sign)
    scaled = coeffs * _deconv_tensor(grid, n_r, tau)
    if grid.dim == 1:
        E[b] = scaled
    else:
        E[np.ix_(*[b] * grid.dim)] = scaled
    u = fftn(E, sign=-1)
    return backend.nufft_interp(x, u, n_r, w, tau)
