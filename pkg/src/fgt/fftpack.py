"""Self-contained mixed-radix (2/3/5) complex FFT.

Implements the Cooley-Tukey decomposition recursively with numpy-vectorized
butterflies; transforms run along the last axis and broadcast over leading
axes.  No normalization is applied in either direction.  Oversampled NUFFT
grids are always chosen 5-smooth (see `next_smooth`), so no other radices
are required.
"""

import threading

import numpy as np

_RADICES = (2, 3, 5)

_twiddle_cache = {}
_cache_lock = threading.Lock()


def is_smooth(n):
    """True if n factors completely into powers of 2, 3 and 5."""
    if n < 1:
        return False
    for r in _RADICES:
        while n % r == 0:
            n //= r
    return n == 1


def next_smooth(n):
    """Smallest 5-smooth integer >= n."""
    m = max(int(n), 1)
    while not is_smooth(m):
        m += 1
    return m


def _tables(n, r, sign):
    key = (n, r, sign)
    tab = _twiddle_cache.get(key)
    if tab is None:
        m = n // r
        p = np.arange(r)[:, None]
        tw = np.exp(sign * 2j * np.pi * (p * np.arange(m)[None, :]) / n)
        Wr = np.exp(sign * 2j * np.pi * np.outer(np.arange(r), np.arange(r)) / r)
        tab = (tw, Wr)
        with _cache_lock:
            _twiddle_cache[key] = tab
    return tab


def _fft_rec(x, sign):
    n = x.shape[-1]
    if n == 1:
        return x
    for r in _RADICES:
        if n % r == 0:
            break
    else:
        raise ValueError(f"FFT length {n} is not 5-smooth")
    m = n // r
    sub = np.swapaxes(x.reshape(x.shape[:-1] + (m, r)), -1, -2)   # (..., r, m)
    F = _fft_rec(np.ascontiguousarray(sub), sign)
    tw, Wr = _tables(n, r, sign)
    X = np.einsum("qp,...ps->...qs", Wr, F * tw)
    return X.reshape(x.shape[:-1] + (n,))


def fft(x, sign=-1, axis=-1):
    """Complex FFT along `axis`: X_k = sum_j x_j exp(sign*2i*pi*j*k/n)."""
    x = np.asarray(x, dtype=np.complex128)
    if axis != -1 and axis != x.ndim - 1:
        x = np.moveaxis(x, axis, -1)
        out = _fft_rec(np.ascontiguousarray(x), sign)
        return np.moveaxis(out, -1, axis)
    return _fft_rec(np.ascontiguousarray(x), sign)


def fftn(x, sign=-1):
    """FFT along every axis of x (no normalization)."""
    out = np.asarray(x, dtype=np.complex128)
    for axis in range(out.ndim):
        out = fft(out, sign=sign, axis=axis)
    return out
