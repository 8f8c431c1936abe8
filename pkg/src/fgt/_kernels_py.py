"""Numpy fallback implementations of the hot kernels.

Same call signatures as the compiled extension `_kernels_cy`; selected by
`fgt.backend` when the extension is unavailable or FGT_FORCE_PYTHON is set.
"""

import numpy as np

BACKEND = "python"

_CHUNK = 512


def gauss_direct(targets, sources, charges, inv_delta, r2_cut, out):
    """out[i] += sum_j exp(-||targets[i]-sources[j]||^2 * inv_delta) * q_j.

    Pairs with squared distance above r2_cut are skipped (each such term is
    below the kernel cutoff tolerance).  Pass r2_cut = inf to disable.
    """
    nt = targets.shape[0]
    for lo in range(0, nt, _CHUNK):
        hi = min(lo + _CHUNK, nt)
        diff = targets[lo:hi, None, :] - sources[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        with np.errstate(under="ignore"):
            g = np.exp(-r2 * inv_delta)
        if np.isfinite(r2_cut):
            g[r2 > r2_cut] = 0.0
        out[lo:hi] += g @ charges
    return out


def gauss_direct_periodic(targets, sources, charges, inv_delta, r2_cut, out):
    """Minimum-image variant of gauss_direct on the unit cell."""
    nt = targets.shape[0]
    for lo in range(0, nt, _CHUNK):
        hi = min(lo + _CHUNK, nt)
        diff = targets[lo:hi, None, :] - sources[None, :, :]
        diff -= np.round(diff)
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        with np.errstate(under="ignore"):
            g = np.exp(-r2 * inv_delta)
        if np.isfinite(r2_cut):
            g[r2 > r2_cut] = 0.0
        out[lo:hi] += g @ charges
    return out


def _spread_weights(x, n_r, m_sp, tau):
    """Per-dimension spreading weights and base indices.

    x : (M, d) points in [0, 2*pi).  Returns (i0, w) with
    i0 : (M, d) nearest-grid indices and w : (M, d, 2*m_sp+1) Gaussian
    kernel weights at offsets -m_sp..m_sp.
    """
    hr = 2.0 * np.pi / n_r
    i0 = np.rint(x / hr).astype(np.int64)
    offs = np.arange(-m_sp, m_sp + 1)
    z = x[:, :, None] - (i0[:, :, None] + offs[None, None, :]) * hr
    with np.errstate(under="ignore"):
        w = np.exp(-z * z / (4.0 * tau))
    return i0, w


def nufft_spread(x, values, n_r, m_sp, tau, grid_out):
    """Scatter complex point values onto the periodic oversampled grid."""
    M, d = x.shape
    i0, w = _spread_weights(x, n_r, m_sp, tau)
    nw = 2 * m_sp + 1
    offs = np.arange(-m_sp, m_sp + 1)
    flat = grid_out.reshape(-1)
    for lo in range(0, M, _CHUNK):
        hi = min(lo + _CHUNK, M)
        wgt = w[lo:hi, 0, :]
        idx = (i0[lo:hi, 0, None] + offs[None, :]) % n_r
        for ax in range(1, d):
            wgt = (wgt[..., None] * w[lo:hi, ax, None, :]).reshape(hi - lo, -1)
            iax = (i0[lo:hi, ax, None] + offs[None, :]) % n_r
            idx = (idx[..., None] * n_r + iax[:, None, :]).reshape(hi - lo, -1)
        np.add.at(flat, idx, wgt * values[lo:hi, None])
    return grid_out


def nufft_interp(x, grid, n_r, m_sp, tau):
    """Gather values of a smooth periodic grid function at arbitrary points."""
    M, d = x.shape
    i0, w = _spread_weights(x, n_r, m_sp, tau)
    offs = np.arange(-m_sp, m_sp + 1)
    flat = grid.reshape(-1)
    out = np.empty(M, dtype=np.complex128)
    for lo in range(0, M, _CHUNK):
        hi = min(lo + _CHUNK, M)
        wgt = w[lo:hi, 0, :]
        idx = (i0[lo:hi, 0, None] + offs[None, :]) % n_r
        for ax in range(1, d):
            wgt = (wgt[..., None] * w[lo:hi, ax, None, :]).reshape(hi - lo, -1)
            iax = (i0[lo:hi, ax, None] + offs[None, :]) % n_r
            idx = (idx[..., None] * n_r + iax[:, None, :]).reshape(hi - lo, -1)
        out[lo:hi] = np.einsum("ij,ij->i", wgt.astype(np.complex128), flat[idx])
    return out
