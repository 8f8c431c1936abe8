"""One-dimensional polynomial machinery.

Gauss-Legendre rules, value/coefficient transforms on tensor-product
grids, the Gaussian moments J_lam[P_n](t) = int_{-1}^{1} exp(-(t-x)^2/lam^2) P_n(x) dx,
the Fourier moments I[P_n](t) = int_{-1}^{1} exp(i t x) P_n(x) dx, and the
coefficient-tail error monitor used to drive adaptive refinement.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, spherical_jn

K_MIN = 2
K_MAX = 24

# Empirically the five-term recurrence for J_lam[P_n] is stable (parasitic
# growth below 1e-13 of the table scale for n <= 23) only while the target
# point sits inside the integration interval.  Outside it the values decay
# like exp(-((|t|-1)/lam)^2) and the recurrence loses all relative accuracy,
# so we switch to clipped-support quadrature there.
RECURRENCE_LAMBDA_MAX = 0.125
RECURRENCE_T_MAX = 1.0


def legendre_nodes_weights(k):
    """Return the k-point Gauss-Legendre nodes and weights on [-1, 1].

    k must lie in [2, 24]; the rule is accurate to ~1e-15 and integrates
    polynomials of degree <= 2k-1 exactly.
    """
    if not (K_MIN <= k <= K_MAX):
        raise ValueError(f"polynomial order k={k} outside supported range [{K_MIN}, {K_MAX}]")
    nodes, weights = np.polynomial.legendre.leggauss(k)
    return nodes, weights


def legendre_values(n_max, x):
    """Evaluate P_0..P_{n_max} at points x; shape (n_max+1,) + x.shape."""
    x = np.asarray(x, dtype=float)
    P = np.empty((n_max + 1,) + x.shape)
    P[0] = 1.0
    if n_max >= 1:
        P[1] = x
    for n in range(1, n_max):
        P[n + 1] = ((2 * n + 1) * x * P[n] - n * P[n - 1]) / (n + 1)
    return P


@dataclass(frozen=True)
class LegendreBasis:
    """k-point Legendre interpolation basis on [-1, 1].

    val_to_pol maps samples at the Gauss-Legendre nodes to Legendre
    coefficients (exact through degree k-1); pol_to_val is its inverse
    on that polynomial space.
    """

    k: int
    nodes: np.ndarray
    weights: np.ndarray
    val_to_pol: np.ndarray
    pol_to_val: np.ndarray

    @classmethod
    def build(cls, k):
        nodes, weights = legendre_nodes_weights(k)
        P = legendre_values(k - 1, nodes)          # (k degrees, k nodes)
        degrees = np.arange(k)
        val_to_pol = ((2 * degrees[:, None] + 1) / 2.0) * weights[None, :] * P
        pol_to_val = P.T.copy()                    # (k nodes, k degrees)
        return cls(k=k, nodes=nodes, weights=weights,
                   val_to_pol=val_to_pol, pol_to_val=pol_to_val)


def _apply_per_axis(mat, tensor, dim):
    """Apply a (m, k) matrix along each of the first `dim` axes of `tensor`."""
    out = tensor
    for axis in range(dim):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return np.ascontiguousarray(out)


def vals_to_coeffs(values, basis, dim):
    """Tensor-product Legendre analysis: node samples -> coefficients c_alpha.

    Performed as `dim` sequential one-dimensional transforms, total cost
    O(dim * k^(dim+1)).
    """
    values = np.asarray(values)
    return _apply_per_axis(basis.val_to_pol, values, dim)


def coeffs_to_vals(coeffs, basis, dim):
    """Tensor-product Legendre synthesis: coefficients -> node samples."""
    coeffs = np.asarray(coeffs)
    return _apply_per_axis(basis.pol_to_val, coeffs, dim)


def tail_mask(k, dim):
    """Boolean mask over the k^dim coefficient grid selecting the tail set.

    The tail is the multi-indices with ||alpha||_2 >= k; in one dimension
    that would be a single coefficient, so the top two {k-2, k-1} are used
    instead to avoid a one-sample estimate.
    """
    if dim == 1:
        mask = np.zeros(k, dtype=bool)
        mask[k - 2:] = True
        return mask
    grids = np.meshgrid(*([np.arange(k)] * dim), indexing="ij")
    norm2 = sum(g.astype(float) ** 2 for g in grids)
    return norm2 >= k * k


def tail_error(coeffs, k=None):
    """RMS of the coefficient tail, sqrt(sum_{tail} |c|^2 / N_tail)."""
    coeffs = np.asarray(coeffs)
    dim = coeffs.ndim
    if k is None:
        k = coeffs.shape[0]
    mask = tail_mask(k, dim)
    sel = coeffs[mask]
    if sel.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.abs(sel) ** 2)))


def _gauss_moment_recurrence(lam, n_max, t):
    """Seed formulas (via erf) plus the five-term recurrence; t is an array."""
    t = np.asarray(t, dtype=float)
    a = (-1.0 - t) / lam
    b = (1.0 - t) / lam
    ea = np.exp(-a * a)
    eb = np.exp(-b * b)
    d1 = lam * (eb - ea)
    d2 = lam * (eb + ea)
    J = np.zeros((n_max + 1,) + t.shape)
    J[0] = lam * (np.sqrt(np.pi) / 2.0) * (erf(b) - erf(a))
    if n_max >= 1:
        J[1] = -lam * d1 / 2.0 + t * J[0]
    if n_max >= 2:
        J[2] = 0.75 * (-lam * d2 - t * lam * d1 + (lam * lam - 2.0 / 3.0 + 2.0 * t * t) * J[0])
    if n_max >= 3:
        J[3] = (5.0 / 8.0) * (-lam * d1 + 2.0 * t * (4.0 * J[2] - J[0]) / 3.0
                              - (2.0 / 5.0 - 4.0 * lam * lam) * J[1])
    for n in range(2, n_max - 1):
        J[n + 2] = ((2 * n + 3) / (n + 2)) * (
            t * (J[n + 1] - J[n - 1])
            + ((n - 1) / (2 * n - 1)) * J[n - 2]
            + (2 * n + 1) * (lam * lam / 2.0 + 1.0 / ((2 * n + 3) * (2 * n - 1))) * J[n]
        )
    return J

# Gaussian support half-width (in units of lam) kept by the clipped rule;
# exp(-9.5^2) ~ 6e-40 so the clipped tail is far below roundoff.
_CLIP_HALFWIDTH = 9.5
_QUAD_DEGREE = 64


def _gauss_moment_quadrature(lam, n_max, t):
    """Gauss-Legendre quadrature on the support overlap [t-w, t+w] ∩ [-1, 1]."""
    t = np.asarray(t, dtype=float)
    lo = np.maximum(-1.0, t - _CLIP_HALFWIDTH * lam)
    hi = np.minimum(1.0, t + _CLIP_HALFWIDTH * lam)
    xs, ws = np.polynomial.legendre.leggauss(_QUAD_DEGREE)
    width = np.maximum(hi - lo, 0.0)
    X = 0.5 * (lo + hi)[..., None] + 0.5 * width[..., None] * xs      # t.shape + (deg,)
    W = 0.5 * width[..., None] * ws
    g = np.exp(-((t[..., None] - X) / lam) ** 2) * W
    P = legendre_values(n_max, X)                                      # (n+1,) + t.shape + (deg,)
    return np.einsum("n...q,...q->n...", P, g)


def gauss_moment_J(lam, n_max, t):
    """Gaussian moments J_lam[P_0..P_{n_max}](t).

    For lam <= 1/8 with |t| <= 1 the erf seed formulas and the five-term
    recurrence are used; elsewhere the integrand is smooth on the clipped
    support and a fixed Gauss-Legendre rule is applied.  Accurate to
    ~1e-13 relative to the table scale throughout.

    Returns an array of shape (n_max+1,) + shape(t).
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.ndim(t) == 0
    out = np.zeros((n_max + 1,) + t_arr.shape)
    rec = (lam <= RECURRENCE_LAMBDA_MAX) & (np.abs(t_arr) <= RECURRENCE_T_MAX)
    if np.any(rec):
        out[:, rec] = _gauss_moment_recurrence(lam, n_max, t_arr[rec])
    if np.any(~rec):
        out[:, ~rec] = _gauss_moment_quadrature(lam, n_max, t_arr[~rec])
    return out[:, 0] if scalar else out


def fourier_moment_I(n_max, t):
    """Fourier moments I[P_0..P_{n_max}](t) = 2 i^n j_n(t).

    j_n is the spherical Bessel function of the first kind.  Returns a
    complex array of shape (n_max+1,) + shape(t).
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    flat = np.atleast_1d(t_arr).ravel()
    n = np.arange(n_max + 1)
    jn = spherical_jn(n[:, None], flat[None, :])
    out = (2.0 * (1j ** n)[:, None] * jn).reshape((n_max + 1,) + np.atleast_1d(t_arr).shape)
    return out[:, 0] if scalar else out
