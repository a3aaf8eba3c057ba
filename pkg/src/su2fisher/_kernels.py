"""Batched hot loops with a numba path and a pure-numpy fallback.

Set ``SU2FISHER_DISABLE_NUMBA=1`` to force the numpy implementations.
Both paths must agree to rounding; ``tests/test_kernels.py`` checks this.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SU2FISHER_DISABLE_NUMBA", "") not in ("1", "true", "yes")

SINGULAR_SIN_TOL = 1e-8
# det(W~) below this times (tr W~ / 3)^3 is treated as ill-conditioned
RELATIVE_DET_TOL = 1e-12


# --- tr(V W~^-1) over Euler-angle batches ---------------------------------


def _wtilde_trace_numpy(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    p1, p2, p3 = psi[:, 0], psi[:, 1], psi[:, 2]
    total, diff = p1 + p3, p1 - p3
    c2 = np.cos(p2 / 2.0) ** 2
    s2 = 1.0 - c2
    half_sin = np.sin(p2) / 2.0
    cs = np.cos(total / 2.0) ** 2
    sin_t, sin_d = np.sin(total), np.sin(diff)
    sd2 = np.sin(diff / 2.0) ** 2
    cd2 = 1.0 - sd2
    x_da = c2 * cs + s2 * sd2
    x_rl = c2 * cs + s2 * cd2
    d_da = np.stack(
        [-c2 * sin_t / 2 + s2 * sin_d / 2, half_sin * (sd2 - cs), -c2 * sin_t / 2 - s2 * sin_d / 2], 1
    )
    d_rl = np.stack(
        [-c2 * sin_t / 2 - s2 * sin_d / 2, half_sin * (cd2 - cs), -c2 * sin_t / 2 + s2 * sin_d / 2], 1
    )
    den_da = np.sqrt(np.clip(x_da * (1 - x_da), 0.0, None))
    den_rl = np.sqrt(np.clip(x_rl * (1 - x_rl), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = -d_da / den_da[:, None]
        w2 = -d_rl / den_rl[:, None]
        a = np.einsum("ka,kb->kab", w1, w1) + np.einsum("ka,kb->kab", w2, w2)
        a[:, 1, 1] += 1.0
        c00 = a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] ** 2
        c01 = a[:, 0, 2] * a[:, 1, 2] - a[:, 0, 1] * a[:, 2, 2]
        c02 = a[:, 0, 1] * a[:, 1, 2] - a[:, 0, 2] * a[:, 1, 1]
        c11 = a[:, 0, 0] * a[:, 2, 2] - a[:, 0, 2] ** 2
        c22 = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] ** 2
        det = a[:, 0, 0] * c00 + a[:, 0, 1] * c01 + a[:, 0, 2] * c02
        out = 0.5 * (c00 + c11 + c22 + 2.0 * np.cos(p2) * c02) / det
        scale = (a[:, 0, 0] + a[:, 1, 1] + a[:, 2, 2]) / 3.0
        out[~(det > RELATIVE_DET_TOL * scale**3)] = np.nan
    bad = (np.abs(np.sin(p2)) < SINGULAR_SIN_TOL) | (2 * den_da < SINGULAR_SIN_TOL) | (2 * den_rl < SINGULAR_SIN_TOL)
    out = np.where(bad | ~np.isfinite(out), np.nan, out)
    return out


def _wtilde_trace_loop(psi):
    k = psi.shape[0]
    out = np.empty(k)
    w = np.empty((2, 3))
    for i in range(k):
        p1, p2, p3 = psi[i, 0], psi[i, 1], psi[i, 2]
        total, diff = p1 + p3, p1 - p3
        c2 = math.cos(p2 / 2.0) ** 2
        s2 = 1.0 - c2
        half_sin = math.sin(p2) / 2.0
        cs = math.cos(total / 2.0) ** 2
        sd2 = math.sin(diff / 2.0) ** 2
        cd2 = 1.0 - sd2
        sin_t, sin_d = math.sin(total), math.sin(diff)
        x_da = c2 * cs + s2 * sd2
        x_rl = c2 * cs + s2 * cd2
        den_da = math.sqrt(max(x_da * (1.0 - x_da), 0.0))
        den_rl = math.sqrt(max(x_rl * (1.0 - x_rl), 0.0))
        if abs(math.sin(p2)) < SINGULAR_SIN_TOL or 2 * den_da < SINGULAR_SIN_TOL or 2 * den_rl < SINGULAR_SIN_TOL:
            out[i] = np.nan
            continue
        w[0, 0] = -(-c2 * sin_t / 2 + s2 * sin_d / 2) / den_da
        w[0, 1] = -(half_sin * (sd2 - cs)) / den_da
        w[0, 2] = -(-c2 * sin_t / 2 - s2 * sin_d / 2) / den_da
        w[1, 0] = -(-c2 * sin_t / 2 - s2 * sin_d / 2) / den_rl
        w[1, 1] = -(half_sin * (cd2 - cs)) / den_rl
        w[1, 2] = -(-c2 * sin_t / 2 + s2 * sin_d / 2) / den_rl
        a00 = w[0, 0] ** 2 + w[1, 0] ** 2
        a01 = w[0, 0] * w[0, 1] + w[1, 0] * w[1, 1]
        a02 = w[0, 0] * w[0, 2] + w[1, 0] * w[1, 2]
        a11 = 1.0 + w[0, 1] ** 2 + w[1, 1] ** 2
        a12 = w[0, 1] * w[0, 2] + w[1, 1] * w[1, 2]
        a22 = w[0, 2] ** 2 + w[1, 2] ** 2
        # symmetric adjugate
        c00 = a11 * a22 - a12 * a12
        c01 = a02 * a12 - a01 * a22
        c02 = a01 * a12 - a02 * a11
        c11 = a00 * a22 - a02 * a02
        c12 = a01 * a02 - a00 * a12
        c22 = a00 * a11 - a01 * a01
        det = a00 * c00 + a01 * c01 + a02 * c02
        scale = (a00 + a11 + a22) / 3.0
        if det <= RELATIVE_DET_TOL * scale**3:
            out[i] = np.nan
            continue
        cp = math.cos(p2)
        # tr(V A^-1) with V = 0.5 [[1,0,cp],[0,1,0],[cp,0,1]]
        out[i] = 0.5 * (c00 + c11 + c22 + 2.0 * cp * c02) / det
    return out


# --- optimality residuals over amplitude batches ---------------------------


def _residuals_numpy(amps: np.ndarray) -> np.ndarray:
    amps = np.asarray(amps, dtype=complex)
    n = amps.shape[1] - 1
    m = np.arange(n + 1, dtype=float)
    pop = np.abs(amps) ** 2
    hop = np.sqrt((m[:-1] + 1.0) * (n - m[:-1]))
    shift1 = np.conj(amps[:, 1:]) * amps[:, :-1] * hop
    mm = m[:-2]
    hop2 = np.sqrt((mm + 1.0) * (mm + 2.0) * (n - mm) * (n - mm - 1.0))
    out = np.empty((amps.shape[0], 7))
    out[:, 0] = np.abs(pop @ m - n / 2.0)
    out[:, 1] = np.abs(pop @ (n - m) - n / 2.0)
    out[:, 2] = np.abs(pop @ m**2 - pop @ (n - m) ** 2)
    out[:, 3] = np.abs(shift1.sum(1))
    out[:, 4] = np.abs((shift1 * m[:-1]).sum(1))
    out[:, 5] = np.abs((np.conj(amps[:, 2:]) * amps[:, :-2] * hop2).sum(1))
    out[:, 6] = np.abs((shift1 * (n - m[:-1] - 1.0)).sum(1))
    return out


def _residuals_loop(amps):
    k, dim = amps.shape
    n = dim - 1
    out = np.empty((k, 7))
    for i in range(k):
        na = 0.0
        nb = 0.0
        na2 = 0.0
        nb2 = 0.0
        s1 = 0j
        s_na = 0j
        s_nb = 0j
        s2 = 0j
        for mi in range(dim):
            p = amps[i, mi].real ** 2 + amps[i, mi].imag ** 2
            na += p * mi
            nb += p * (n - mi)
            na2 += p * mi * mi
            nb2 += p * (n - mi) * (n - mi)
            if mi < n:
                t = amps[i, mi + 1].conjugate() * amps[i, mi] * math.sqrt((mi + 1.0) * (n - mi))
                s1 += t
                s_na += t * mi
                s_nb += t * (n - mi - 1.0)
            if mi < n - 1:
                s2 += (
                    amps[i, mi + 2].conjugate()
                    * amps[i, mi]
                    * math.sqrt((mi + 1.0) * (mi + 2.0) * (n - mi) * (n - mi - 1.0))
                )
        out[i, 0] = abs(na - n / 2.0)
        out[i, 1] = abs(nb - n / 2.0)
        out[i, 2] = abs(na2 - nb2)
        out[i, 3] = abs(s1)
        out[i, 4] = abs(s_na)
        out[i, 5] = abs(s2)
        out[i, 6] = abs(s_nb)
    return out


if HAVE_NUMBA:
    _wtilde_trace_numba = numba.njit(cache=False, fastmath=False)(_wtilde_trace_loop)
    _residuals_numba = numba.njit(cache=False, fastmath=False)(_residuals_loop)
else:  # pragma: no cover
    _wtilde_trace_numba = None
    _residuals_numba = None


def _want_numba(flag):
    return USE_NUMBA if flag is None else bool(flag) and HAVE_NUMBA


def wtilde_trace_batch(psi: np.ndarray, use_numba: bool | None = None) -> np.ndarray:
    """``tr(V W~^-1)`` for each row of a ``(K, 3)`` Euler-angle array.

    ``W~`` is built from the closed-form second rows of ``W'`` and ``W''``.
    Rows on a gimbal point of any of the three frames give NaN.
    """
    psi = np.ascontiguousarray(psi, dtype=float)
    if _want_numba(use_numba):
        return _wtilde_trace_numba(psi)
    return _wtilde_trace_numpy(psi)


def optimality_residuals_batch(amps: np.ndarray, use_numba: bool | None = None) -> np.ndarray:
    """The seven optimality-condition residuals for each row of ``(K, N+1)`` amplitudes.

    Columns: ``<a+a> - N/2``, ``<b+b> - N/2``, ``<(a+a)^2> - <(b+b)^2>``,
    ``<a+b>``, ``<a+a+ab>``, ``<a+a+bb>``, ``<a+b+bb>`` (absolute values).
    Rows are assumed normalized and ``N >= 2``.
    """
    amps = np.ascontiguousarray(amps, dtype=complex)
    if _want_numba(use_numba):
        return _residuals_numba(amps)
    return _residuals_numpy(amps)
