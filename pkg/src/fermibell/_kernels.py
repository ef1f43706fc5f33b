"""CHSH search kernels over a real 3x3 correlation tensor ``T``.

``F(a, b) = a . T b`` for unit vectors, and the CHSH combination is
``|F(a,b) - F(a,b')| + |F(a',b) + F(a',b')|``.  Two kernels dominate the
runtime of corpus runs: the coarse angle-grid search and the coordinate
ascent that refines its best point.  Each has a numba implementation and a
pure-numpy one; ``FERMIBELL_DISABLE_NUMBA=1`` selects numpy.
"""

from __future__ import annotations

import math

import numpy as np

from ._config import DISABLE_NUMBA

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

HAVE_NUMBA = njit is not None
USE_NUMBA = HAVE_NUMBA and not DISABLE_NUMBA


# ---------------------------------------------------------------- grid search

def _grid_search_numpy(f_table: np.ndarray) -> tuple[float, int, int, int, int]:
    """Best ``(value, i, i', j, j')`` for ``|F[i,j]-F[i,j']| + |F[i',j]+F[i',j']|``.

    For fixed ``(j, j')`` the two terms decouple over ``i`` and ``i'``.
    """
    diff = np.abs(f_table[:, :, None] - f_table[:, None, :])
    summ = np.abs(f_table[:, :, None] + f_table[:, None, :])
    i_best = np.argmax(diff, axis=0)
    i2_best = np.argmax(summ, axis=0)
    total = np.max(diff, axis=0) + np.max(summ, axis=0)
    flat = int(np.argmax(total))
    j, j2 = divmod(flat, f_table.shape[1])
    return float(total[j, j2]), int(i_best[j, j2]), int(i2_best[j, j2]), j, j2


def _grid_search_loops(f_table):
    n_a, n_b = f_table.shape
    best = -1.0
    bi = bi2 = bj = bj2 = 0
    for j in range(n_b):
        for j2 in range(n_b):
            dmax = -1.0
            di = 0
            smax = -1.0
            si = 0
            for i in range(n_a):
                dv = abs(f_table[i, j] - f_table[i, j2])
                if dv > dmax:
                    dmax = dv
                    di = i
                sv = abs(f_table[i, j] + f_table[i, j2])
                if sv > smax:
                    smax = sv
                    si = i
            total = dmax + smax
            if total > best:
                best = total
                bi = di
                bi2 = si
                bj = j
                bj2 = j2
    return best, bi, bi2, bj, bj2


# ---------------------------------------------------------- coordinate ascent

def _chsh_at_numpy(t: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """CHSH values for a batch of 8-angle rows (theta, phi for a, a', b, b')."""
    th = angles[:, 0::2]
    ph = angles[:, 1::2]
    vec = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    a, a2, b, b2 = vec[:, 0], vec[:, 1], vec[:, 2], vec[:, 3]
    tb_minus = (b - b2) @ t.T
    tb_plus = (b + b2) @ t.T
    return np.abs(np.sum(a * tb_minus, axis=1)) + np.abs(np.sum(a2 * tb_plus, axis=1))


def _ascent_numpy(t, angles0, step0, min_step, max_iter):
    x = np.array(angles0, dtype=np.float64)
    best = float(_chsh_at_numpy(t, x[None, :])[0])
    moves = np.vstack([np.eye(8), -np.eye(8)])
    step = step0
    it = 0
    while step >= min_step and it < max_iter:
        it += 1
        cand = x[None, :] + step * moves
        vals = _chsh_at_numpy(t, cand)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            x = cand[k]
        else:
            step *= 0.5
    return best, x


def _chsh_at_scalar(t, x):
    v = np.empty((4, 3))
    for m in range(4):
        s = math.sin(x[2 * m])
        v[m, 0] = s * math.cos(x[2 * m + 1])
        v[m, 1] = s * math.sin(x[2 * m + 1])
        v[m, 2] = math.cos(x[2 * m])
    f_minus = 0.0
    f_plus = 0.0
    for k in range(3):
        for l in range(3):
            f_minus += v[0, k] * t[k, l] * (v[2, l] - v[3, l])
            f_plus += v[1, k] * t[k, l] * (v[2, l] + v[3, l])
    return abs(f_minus) + abs(f_plus)


def _ascent_loops(t, angles0, step0, min_step, max_iter):
    x = angles0.copy()
    best = _chsh_at_scalar(t, x)
    cand = np.empty(8)
    step = step0
    it = 0
    while step >= min_step and it < max_iter:
        it += 1
        kbest = -1
        vbest = best
        for k in range(16):
            for m in range(8):
                cand[m] = x[m]
            if k < 8:
                cand[k] += step
            else:
                cand[k - 8] -= step
            val = _chsh_at_scalar(t, cand)
            if val > vbest:
                vbest = val
                kbest = k
        if kbest >= 0:
            best = vbest
            if kbest < 8:
                x[kbest] += step
            else:
                x[kbest - 8] -= step
        else:
            step *= 0.5
    return best, x


if HAVE_NUMBA:
    _grid_search_numba = njit(cache=True)(_grid_search_loops)
    # rebind so the jitted ascent resolves the jitted helper
    _chsh_at_scalar = njit(cache=True)(_chsh_at_scalar)
    _ascent_numba = njit(cache=True)(_ascent_loops)


def grid_search(f_table: np.ndarray, backend: str | None = None) -> tuple[float, int, int, int, int]:
    f_table = np.ascontiguousarray(f_table, dtype=np.float64)
    if _pick(backend) == "numba":
        v, i, i2, j, j2 = _grid_search_numba(f_table)
        return float(v), int(i), int(i2), int(j), int(j2)
    return _grid_search_numpy(f_table)


def coordinate_ascent(
    t: np.ndarray,
    angles0: np.ndarray,
    step0: float = math.pi / 48,
    min_step: float = 1e-8,
    max_iter: int = 20000,
    backend: str | None = None,
) -> tuple[float, np.ndarray]:
    """Best-of-16 signed coordinate moves; halve the step when none improves."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    x0 = np.ascontiguousarray(angles0, dtype=np.float64)
    if _pick(backend) == "numba":
        v, x = _ascent_numba(t, x0, step0, min_step, max_iter)
        return float(v), np.asarray(x)
    return _ascent_numpy(t, x0, step0, min_step, max_iter)


def _pick(backend: str | None) -> str:
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return backend
