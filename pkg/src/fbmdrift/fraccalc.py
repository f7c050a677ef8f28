"""Riemann-Liouville integrals and Weyl (Marchaud) derivatives on a uniform grid.

All operators use product integration: the data are interpolated piecewise
linearly between nodes and the weakly singular kernel ``u**(alpha-1)`` (or the
hypersingular ``u**(-alpha-1)``) is integrated exactly against every linear
piece.  On a uniform grid the resulting weights depend only on the distance
``i - j`` between nodes, so the operators reduce to discrete convolutions with
coefficient vectors that are computed once per ``(n, alpha)``.

Endpoint convention: the value at the degenerate endpoint (``t_0`` for left
operators, ``b`` for right operators) is 0.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import beta as beta_fn

from .grid import SampledPath, TimeGrid

__all__ = [
    "check_order",
    "rl_integral_left",
    "rl_integral_right",
    "weyl_left",
    "weyl_right",
    "rl_left_matrix",
    "weighted_marchaud_matrix",
]


def check_order(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {alpha}")
    return alpha


def _check_path(f: SampledPath) -> np.ndarray:
    if not isinstance(f, SampledPath):
        raise TypeError("expected a SampledPath on a uniform TimeGrid")
    return f.values


@lru_cache(maxsize=64)
def _abel_coeffs(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Hat-function moments of ``u**(alpha-1)`` on unit cells ``[k, k+1]``.

    ``near[k]`` weights the node at distance ``k``, ``far[k]`` the node at
    distance ``k+1``.
    """
    k = np.arange(n + 1, dtype=float)
    m0 = ((k + 1) ** alpha - k**alpha) / alpha
    m1 = ((k + 1) ** (alpha + 1) - k ** (alpha + 1)) / (alpha + 1)
    near = (k + 1) * m0 - m1
    far = m1 - k * m0
    near.setflags(write=False)
    far.setflags(write=False)
    return near, far


@lru_cache(maxsize=64)
def _hypersingular_coeffs(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Hat-function moments of ``u**(-alpha-1)`` on unit cells ``[k, k+1]``.

    ``near[0]`` diverges; it always multiplies a zero difference and is
    stored as 0.
    """
    k = np.arange(n + 1, dtype=float)
    m1 = ((k + 1) ** (1 - alpha) - k ** (1 - alpha)) / (1 - alpha)
    m0 = np.zeros_like(k)
    m0[1:] = (k[1:] ** -alpha - (k[1:] + 1) ** -alpha) / alpha
    near = (k + 1) * m0 - m1
    near[0] = 0.0
    far = m1 - k * m0
    far[0] = 1.0 / (1 - alpha)
    near.setflags(write=False)
    far.setflags(write=False)
    return near, far


def _rl_left_values(y: np.ndarray, dt: float, alpha: float) -> np.ndarray:
    n = y.size - 1
    near, far = _abel_coeffs(n, alpha)
    masked = y.copy()
    masked[0] = 0.0
    out = np.convolve(near, masked)[: n + 1]
    out[1:] += np.convolve(far, y)[:n]
    out *= dt**alpha / math.gamma(alpha)
    out[0] = 0.0
    return out


def _weyl_left_values(y: np.ndarray, t: np.ndarray, dt: float, alpha: float) -> np.ndarray:
    n = y.size - 1
    if n < 2:
        raise ValueError("Weyl derivative needs at least two grid steps")
    near, far = _hypersingular_coeffs(n, alpha)
    masked = y.copy()
    masked[0] = 0.0
    total = np.zeros(n + 1)
    total[1:] = np.cumsum(near)[:n] + np.cumsum(far)[:n]
    conv = np.convolve(near, masked)[: n + 1]
    conv[1:] += np.convolve(far, y)[:n]
    hyper = (y * total - conv) * dt**-alpha
    out = np.zeros(n + 1)
    out[1:] = (y[1:] * t[1:] ** -alpha + alpha * hyper[1:]) / math.gamma(1 - alpha)
    return out


def rl_integral_left(f: SampledPath, alpha: float) -> SampledPath:
    """Left Riemann-Liouville integral ``I_{0+}^alpha f`` at the grid nodes."""
    alpha = check_order(alpha)
    y = _check_path(f)
    return SampledPath(f.grid, _rl_left_values(y, f.grid.dt, alpha))


def weyl_left(f: SampledPath, alpha: float) -> SampledPath:
    """Left Weyl derivative ``D_{0+}^alpha f`` in Marchaud form.

    ``g(x) = (f(x) x^-alpha + alpha * int_0^x (f(x) - f(y)) (x - y)^(-alpha-1) dy) / Gamma(1 - alpha)``
    """
    alpha = check_order(alpha)
    y = _check_path(f)
    return SampledPath(f.grid, _weyl_left_values(y, f.grid.nodes, f.grid.dt, alpha))


def _right_restrict(f: SampledPath, b: float | None) -> int:
    """Index of the right endpoint ``b`` (must be a grid node)."""
    grid = f.grid
    if b is None:
        return grid.n
    pos = float(b) / grid.dt
    m = int(round(pos))
    if not 0 <= m <= grid.n or abs(pos - m) > 1e-9 * max(1.0, pos):
        raise ValueError(f"right endpoint b={b} is not a node of the grid")
    return m


def _apply_right(f: SampledPath, b: float | None, left_op) -> SampledPath:
    m = _right_restrict(f, b)
    out = np.zeros(len(f))
    if m > 0:
        seg = f.values[: m + 1][::-1].copy()
        out[: m + 1] = left_op(seg)[::-1]
    return SampledPath(f.grid, out)


def rl_integral_right(f: SampledPath, alpha: float, b: float | None = None) -> SampledPath:
    """Right Riemann-Liouville integral ``I_{b-}^alpha f``.

    ``b`` defaults to the grid horizon; it must be a grid node.  Nodes beyond
    ``b`` are set to 0.
    """
    alpha = check_order(alpha)
    _check_path(f)
    dt = f.grid.dt
    return _apply_right(f, b, lambda y: _rl_left_values(y, dt, alpha))


def weyl_right(f: SampledPath, alpha: float, b: float | None = None) -> SampledPath:
    """Right Weyl derivative ``D_{b-}^alpha f`` in Marchaud form (mirror of :func:`weyl_left`)."""
    alpha = check_order(alpha)
    _check_path(f)
    dt = f.grid.dt

    def op(y):
        t = np.arange(y.size) * dt
        return _weyl_left_values(y, t, dt, alpha)

    return _apply_right(f, b, op)


def rl_left_matrix(grid: TimeGrid, alpha: float) -> np.ndarray:
    """Dense matrix ``A`` with ``rl_integral_left(f).values == A @ f.values``."""
    alpha = check_order(alpha)
    n = grid.n
    near, far = _abel_coeffs(n, alpha)
    zeros = np.zeros(n + 1)
    A = toeplitz(near, zeros)
    A[:, 0] = 0.0
    A += toeplitz(np.concatenate([[0.0], far[:n]]), zeros)
    A *= grid.dt**alpha / math.gamma(alpha)
    return A


def weighted_marchaud_matrix(grid: TimeGrid, alpha: float) -> np.ndarray:
    """Weights ``W`` for the weighted hypersingular difference integral.

    For ``h`` piecewise linear on the grid,

        int_0^{t_i} (h(t_i) - h(s)) s^-alpha (t_i - s)^(-alpha-1) ds  ~=  sum_j W[i, j] (h_i - h_j).

    Cells away from ``s = 0`` integrate ``(t_i - s)^(-alpha-1)`` exactly
    against the linear interpolant of ``(h_i - h(s)) s^-alpha``; the first
    cell integrates ``s^-alpha`` exactly against the linear interpolant of
    ``(h_i - h(s)) (t_i - s)^(-alpha-1)``.  When ``i = 1`` the single cell is
    integrated in closed form.
    """
    alpha = check_order(alpha)
    n, dt = grid.n, grid.dt
    near, far = _hypersingular_coeffs(n, alpha)
    s = grid.nodes
    zeros = np.zeros(n + 1)
    # coefficient of g_j = (h_i - h_j) s_j^-alpha for cells [s_j, s_{j+1}], j >= 1
    W = toeplitz(np.concatenate([[0.0], far[:n]]), zeros)
    W += toeplitz(near, zeros)
    W[:, :2] = 0.0
    W[:, 1] = np.concatenate([[0.0, 0.0], far[: n - 1]])
    W[:, 1:] *= s[1:] ** -alpha
    W *= dt**-alpha
    np.fill_diagonal(W, 0.0)
    if n >= 2:
        ti = s[2:]
        W[2:, 0] = dt ** (1 - alpha) * (1 / (1 - alpha) - 1 / (2 - alpha)) * ti ** (-alpha - 1)
        W[2:, 1] += dt ** (1 - alpha) / (2 - alpha) * (ti - dt) ** (-alpha - 1)
    W[1, 0] = dt ** (-2 * alpha) * beta_fn(1 - alpha, 1 - alpha)
    W[1, 1:] = 0.0
    W[0, :] = 0.0
    return W
