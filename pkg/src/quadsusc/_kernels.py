"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The numpy implementations are the reference; when numba imports cleanly and
``QUADSUSC_DISABLE_NUMBA`` is not set, the scalar-loop variants are compiled
and exported under the same names.  ``benchmarks/bench_kernels.py`` compares
the two paths.
"""

from __future__ import annotations

import os

import numpy as np

from .ddouble import dd_sqrt, dd_sub

USE_NUMBA = os.environ.get("QUADSUSC_DISABLE_NUMBA", "") == ""
if USE_NUMBA:
    try:
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

__all__ = [
    "USE_NUMBA",
    "map_iter",
    "orbit_matrix",
    "orbit_derivative_sweep",
    "bump_sum",
    "bump_sum_deriv",
    "psi_k_values",
    "dpsi_k_values",
    "mt_step_batch",
]


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _map_iter_np(x, t, k):
    y = np.array(x, dtype=np.float64, copy=True)
    for _ in range(k):
        y = t - y * y
    return y


def _orbit_matrix_np(ts, kmax):
    """Postcritical points c_1..c_kmax for every parameter; shape (kmax, n)."""
    ts = np.asarray(ts, dtype=np.float64)
    out = np.empty((kmax, ts.size))
    c = np.zeros_like(ts)
    for k in range(kmax):
        c = ts - c * c
        out[k] = c
    return out


def _orbit_derivative_sweep_np(ts, kmax):
    """log|Df^k(c_1)| for k=1..kmax, shape (kmax, n); guards overflow via logs."""
    ts = np.asarray(ts, dtype=np.float64)
    out = np.empty((kmax, ts.size))
    c = ts.copy()
    acc = np.zeros_like(ts)
    for k in range(kmax):
        c = ts - c * c
        acc = acc + np.log(np.abs(-2.0 * c) + 1e-300)
        out[k] = acc
    return out


def _bump_sum_np(x, centers, widths, amps):
    x = np.asarray(x, dtype=np.float64)
    u = (x[..., None] - centers) / widths
    core = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 4, 0.0)
    return core @ amps


def _bump_sum_deriv_np(x, centers, widths, amps):
    x = np.asarray(x, dtype=np.float64)
    u = (x[..., None] - centers) / widths
    core = np.where(np.abs(u) < 1.0, -8.0 * u * (1.0 - u * u) ** 3, 0.0)
    return core @ (amps / widths)


def _psi_k_values_np(x, t, k, centers, widths, amps):
    return _bump_sum_np(_map_iter_np(x, t, k), centers, widths, amps)


def _dpsi_k_values_np(x, t, k, centers, widths, amps):
    """(phi o f^k)'(x) via the chain rule product of -2 f^i(x)."""
    y = np.array(x, dtype=np.float64, copy=True)
    dprod = np.ones_like(y)
    for _ in range(k):
        dprod = dprod * (-2.0 * y)
        y = t - y * y
    return _bump_sum_deriv_np(y, centers, widths, amps) * dprod


_SPLIT = 134217729.0


def _two_sum_arr(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _fast_two_sum_arr(a, b):
    s = a + b
    return s, b - (s - a)


def _two_prod_arr(a, b):
    p = a * b
    aa = _SPLIT * a
    ahi = aa - (aa - a)
    alo = a - ahi
    bb = _SPLIT * b
    bhi = bb - (bb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def _dd_sqrt_arr(xh, xl):
    s = np.sqrt(np.maximum(xh, 0.0))
    ph, pl = _two_prod_arr(s, s)
    rh, rl = _two_sum_arr(xh, -ph)
    rl = rl + (xl - pl)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(s > 0, (rh + rl) / (2.0 * s), 0.0)
    return _fast_two_sum_arr(s, corr)


def _mt_step_batch_np_fast(xh, xl, k, signs):
    """One Milnor-Thurston contraction step, vectorized over candidates.

    xh, xl: (ncand, n) double-double coordinates with n = k+j-1; the last
    coordinate closes onto coordinate k (1-based).  Returns the new pair plus
    a mask of rows that hit a negative radicand.
    """
    th = xh[:, :1]
    tl = xl[:, :1]
    tgt_h = np.concatenate([xh[:, 1:], xh[:, k - 1 : k]], axis=1)
    tgt_l = np.concatenate([xl[:, 1:], xl[:, k - 1 : k]], axis=1)
    sh, sl = _two_sum_arr(np.broadcast_to(th, tgt_h.shape), -tgt_h)
    sl = sl + (np.broadcast_to(tl, tgt_l.shape) - tgt_l)
    sh, sl = _fast_two_sum_arr(sh, sl)
    bad = np.any(sh < 0, axis=1)
    sh = np.maximum(sh, 0.0)
    yh, yl = _dd_sqrt_arr(sh, sl)
    return yh * signs, yl * signs, bad


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def map_iter(x, t, k):
        y = x.copy()
        for i in range(y.size):
            v = y.flat[i]
            for _ in range(k):
                v = t - v * v
            y.flat[i] = v
        return y

    @njit(cache=True)
    def orbit_matrix(ts, kmax):
        n = ts.size
        out = np.empty((kmax, n))
        for j in range(n):
            c = 0.0
            for k in range(kmax):
                c = ts[j] - c * c
                out[k, j] = c
        return out

    @njit(cache=True)
    def orbit_derivative_sweep(ts, kmax):
        n = ts.size
        out = np.empty((kmax, n))
        for j in range(n):
            c = 0.0
            acc = 0.0
            for k in range(kmax):
                c = ts[j] - c * c
                acc += np.log(np.abs(-2.0 * c) + 1e-300)
                out[k, j] = acc
        return out

    @njit(cache=True)
    def bump_sum(x, centers, widths, amps):
        out = np.zeros(x.size)
        for i in range(x.size):
            acc = 0.0
            for b in range(centers.size):
                u = (x.flat[i] - centers[b]) / widths[b]
                if -1.0 < u < 1.0:
                    w = 1.0 - u * u
                    acc += amps[b] * w * w * w * w
            out[i] = acc
        return out.reshape(x.shape)

    @njit(cache=True)
    def bump_sum_deriv(x, centers, widths, amps):
        out = np.zeros(x.size)
        for i in range(x.size):
            acc = 0.0
            for b in range(centers.size):
                u = (x.flat[i] - centers[b]) / widths[b]
                if -1.0 < u < 1.0:
                    w = 1.0 - u * u
                    acc += amps[b] / widths[b] * (-8.0) * u * w * w * w
            out[i] = acc
        return out.reshape(x.shape)

    @njit(cache=True)
    def psi_k_values(x, t, k, centers, widths, amps):
        y = map_iter(x, t, k)
        return bump_sum(y, centers, widths, amps)

    @njit(cache=True)
    def dpsi_k_values(x, t, k, centers, widths, amps):
        out = np.empty(x.size)
        for i in range(x.size):
            v = x.flat[i]
            dprod = 1.0
            for _ in range(k):
                dprod *= -2.0 * v
                v = t - v * v
            acc = 0.0
            for b in range(centers.size):
                u = (v - centers[b]) / widths[b]
                if -1.0 < u < 1.0:
                    w = 1.0 - u * u
                    acc += amps[b] / widths[b] * (-8.0) * u * w * w * w
            out[i] = acc * dprod
        return out.reshape(x.shape)

    @njit(cache=True)
    def mt_step_batch(xh, xl, k, signs):
        ncand, n = xh.shape
        yh = np.empty_like(xh)
        yl = np.empty_like(xl)
        bad = np.zeros(ncand, dtype=np.bool_)
        for c in range(ncand):
            th = xh[c, 0]
            tl = xl[c, 0]
            for i in range(n):
                gh = xh[c, i + 1] if i < n - 1 else xh[c, k - 1]
                gl = xl[c, i + 1] if i < n - 1 else xl[c, k - 1]
                sh, sl = dd_sub(th, tl, gh, gl)
                if sh < 0.0:
                    bad[c] = True
                    sh, sl = 0.0, 0.0
                rh, rl = dd_sqrt(sh, sl)
                yh[c, i] = signs[c, i] * rh
                yl[c, i] = signs[c, i] * rl
        return yh, yl, bad

else:
    map_iter = _map_iter_np
    orbit_matrix = _orbit_matrix_np
    orbit_derivative_sweep = _orbit_derivative_sweep_np
    bump_sum = _bump_sum_np
    bump_sum_deriv = _bump_sum_deriv_np
    psi_k_values = _psi_k_values_np
    dpsi_k_values = _dpsi_k_values_np
    mt_step_batch = _mt_step_batch_np_fast

# the reference implementations stay importable for the benchmark
numpy_impls = {
    "map_iter": _map_iter_np,
    "orbit_matrix": _orbit_matrix_np,
    "orbit_derivative_sweep": _orbit_derivative_sweep_np,
    "bump_sum": _bump_sum_np,
    "bump_sum_deriv": _bump_sum_deriv_np,
    "psi_k_values": _psi_k_values_np,
    "dpsi_k_values": _dpsi_k_values_np,
    "mt_step_batch": _mt_step_batch_np_fast,
}
