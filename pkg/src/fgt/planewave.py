"""Plane-wave quadrature for the Gaussian kernel, free-space and periodic.

The Gaussian G(x; delta) = exp(-||x||^2/delta) is approximated on
|x_i| <= R*sqrt(delta) by a trapezoidal discretization of its Fourier
transform with mode spacing h = 2*pi/(R + D0) and n_f = 2*ceil(D0*(R+D0)/pi)
modes per dimension, where D0 = sqrt(log(3/eps)) is the cutoff factor.
The periodic kernel on the unit cell is handled either as a short image
sum (small delta) or as a truncated Fourier series (large delta).
"""

from dataclasses import dataclass, field

import numpy as np

EPS_MIN = 1e-14
EPS_MAX = 0.1

# Below this variance the first image layer already reproduces the periodic
# kernel to ~1e-35 and the free-space code path applies with wrapped lists.
PERIODIC_IMAGE_DELTA = 1.0 / 36.0


def clamp_tolerance(epsilon):
    """Clamp the requested tolerance to the supported [1e-14, 0.099] window."""
    return min(max(float(epsilon), EPS_MIN), 0.099)


def cutoff_factor(epsilon):
    """D0 = sqrt(log(3/eps)), the cutoff length in units of sqrt(delta)."""
    return np.sqrt(np.log(3.0 / epsilon))


@dataclass(frozen=True)
class PwQuadrature:
    """Tensor-product plane-wave quadrature for exp(-||x||^2/delta).

    The 1D modes are k_m = m*h/sqrt(delta) for m = -n_f/2 .. n_f/2-1 and the
    stored weights are pre-multiplied, w_m = h/(2*sqrt(pi)) * exp(-m^2 h^2/4),
    so forming an outgoing expansion is a pure exponential sum.
    """

    epsilon: float
    delta: float
    D0: float
    R: float
    h: float
    n_f: int
    dim: int
    weights_1d: np.ndarray = field(repr=False)

    @property
    def modes(self):
        """Signed 1D mode indices m = -n_f/2 .. n_f/2-1."""
        return np.arange(-self.n_f // 2, self.n_f // 2)

    @property
    def n_modes_total(self):
        return self.n_f ** self.dim

    def freqs_1d(self):
        """Physical 1D frequencies k_m = m*h/sqrt(delta)."""
        return self.modes * self.h / np.sqrt(self.delta)

    def weights_tensor(self):
        """Tensor-product weights, shape (n_f,)*dim."""
        w = self.weights_1d
        out = w
        for _ in range(self.dim - 1):
            out = np.multiply.outer(out, w)
        return out


def pw_params(epsilon, delta, R=None, dim=1):
    """Select plane-wave quadrature parameters for tolerance epsilon.

    R defaults to 2*D0 (the point-FGT setting).  Raises if epsilon is out
    of the supported range or R < D0, where the error bound of the
    spectral approximation no longer holds.
    """
    epsilon = float(epsilon)
    if not (EPS_MIN <= epsilon < EPS_MAX):
        raise ValueError(f"unsupported tolerance {epsilon:g}; need 1e-14 <= eps < 0.1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2, or 3")
    D0 = cutoff_factor(epsilon)
    if R is None:
        R = 2.0 * D0
    if R < D0 * (1.0 - 1e-12):
        raise ValueError(f"range factor R={R:g} below D0={D0:g}; theorem requires R >= D0")
    h = 2.0 * np.pi / (R + D0)
    M = int(np.ceil(D0 * (R + D0) / np.pi))
    n_f = 2 * M
    m = np.arange(-M, M)
    weights = (h / (2.0 * np.sqrt(np.pi))) * np.exp(-(m * h) ** 2 / 4.0)
    return PwQuadrature(epsilon=epsilon, delta=float(delta), D0=D0, R=float(R),
                        h=h, n_f=n_f, dim=dim, weights_1d=weights)


def gauss_eval(x, delta):
    """exp(-||x||^2/delta); x is a d-vector or an (..., d) array of points."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1) if x.ndim > 0 else x * x
    with np.errstate(under="ignore"):
        return np.exp(-r2 / delta)


def pw_kernel_eval(q, x):
    """Evaluate the plane-wave approximation of the Gaussian at displacement x.

    Because modes and weights are tensor products, the d-dimensional sum
    factorizes into a product of 1D sums.  Diagnostic routine for checking
    the kernel-approximation bound; raises outside the validity range.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] != q.dim:
        raise ValueError(f"displacement dimension {x.shape[-1]} != quadrature dim {q.dim}")
    bound = q.R * np.sqrt(q.delta) * (1 + 1e-12)
    if np.any(np.abs(x) > bound):
        raise ValueError("displacement outside plane-wave validity range |x_i| <= R*sqrt(delta)")
    phases = np.exp(1j * np.multiply.outer(x, q.freqs_1d()))   # (npts, d, n_f)
    fac = phases @ q.weights_1d                                # (npts, d)
    vals = np.real(np.prod(fac, axis=-1))
    return vals[0] if vals.size == 1 else vals


@dataclass(frozen=True)
class PeriodicSeries:
    """Truncated Fourier series of the periodic Gaussian on the unit cell.

    coeffs[j] = sqrt(pi*delta) * exp(-(pi*sqrt(delta)*n)^2) for
    n = -n_p .. n_p.
    """

    epsilon: float
    delta: float
    n_p: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def modes(self):
        return np.arange(-self.n_p, self.n_p + 1)


def periodic_params(epsilon, delta):
    """Truncation order and coefficients for the periodic Gaussian series."""
    if epsilon <= 0 or delta <= 0:
        raise ValueError("epsilon and delta must be positive")
    n_p = int(np.ceil(np.sqrt(np.log(1.0 / epsilon)) / (np.pi * np.sqrt(delta))))
    n = np.arange(-n_p, n_p + 1)
    coeffs = np.sqrt(np.pi * delta) * np.exp(-(np.pi * np.sqrt(delta) * n) ** 2)
    return PeriodicSeries(epsilon=float(epsilon), delta=float(delta), n_p=n_p, coeffs=coeffs)


def _periodic_1d(x, delta, epsilon):
    """Periodic Gaussian on the unit cell evaluated per coordinate."""
    x = x - np.round(x)        # wrap to [-1/2, 1/2]
    with np.errstate(under="ignore"):
        if delta < PERIODIC_IMAGE_DELTA:
            # one image layer; farther images are below 1e-35 here
            return (np.exp(-x * x / delta)
                    + np.exp(-(x + 1.0) ** 2 / delta)
                    + np.exp(-(x - 1.0) ** 2 / delta))
        series = periodic_params(min(epsilon, 1e-16), delta)
        n = np.arange(1, series.n_p + 1)
        damp = np.exp(-(np.pi * np.sqrt(delta) * n) ** 2)
        out = 1.0 + 2.0 * np.cos(2.0 * np.pi * np.multiply.outer(x, n)) @ damp
        return np.sqrt(np.pi * delta) * out


def periodic_kernel_eval(x, delta, epsilon=1e-15):
    """Periodic Gaussian kernel, product of per-coordinate 1D kernels.

    x is a d-vector or (..., d) array of displacements with components
    in [-1, 1].
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    vals = _periodic_1d(x, delta, epsilon)
    return np.prod(vals, axis=-1) if x.ndim > 0 else vals
