"""Limit objects of the small-noise theory: Fisher matrix and limit contrast.

Both are built from the noise-free transform ``q(t) = (M @ f(x))(t)`` of a
function ``f`` evaluated along the limit ODE path ``x_t``, where ``M`` is the
Q operator of :mod:`fbmdrift.likelihood` (so ``q`` is ``eps * Q`` with the
data replaced by ``x``):

    Gamma_ij = int_0^T q[d_i b] q[d_j b] dt,
    Y(theta) = 1/2 int_0^T q[b(., theta) - b(., theta0)]^2 dt.

The outer time integral is a product trapezoid rule.  ``q`` behaves like
``t^(1/2-H)`` near the origin, so ``R = q t^(H-1/2)`` is smooth; the weight
``t^(1-2H)`` is integrated exactly against the piecewise-linear interpolant
of products of ``R``.  On the first cell, where ``q(t_0)`` is undefined, the
product is frozen at its ``t_1`` value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import AsymptoticConstants, constants, estimation_hurst
from .errors import ConfigError
from .grid import TimeGrid
from .likelihood import LikelihoodContext, log_likelihood, q_operator
from .model import DriftModel, ParameterBox, SdeConfig, solve_ode_limit

__all__ = [
    "AsymptoticConstants",
    "ContrastFit",
    "FisherMatrix",
    "FisherNotPositiveDefinite",
    "constants",
    "contrast_separation",
    "gamma_matrix",
    "time_weights",
    "y_empirical",
    "y_limit",
]


class FisherNotPositiveDefinite(ConfigError):
    """The Fisher matrix is singular or indefinite at the requested ``theta0``."""


@lru_cache(maxsize=16)
def _time_weights_cached(T: float, n: int, H: float) -> np.ndarray:
    t = TimeGrid(T, n).nodes
    dt = T / n
    g = 1.0 - 2.0 * H
    m0 = (t[1:] ** (g + 1) - t[:-1] ** (g + 1)) / (g + 1)
    m1 = (t[1:] ** (g + 2) - t[:-1] ** (g + 2)) / (g + 2)
    # hat-function moments of t^g on each cell [t_k, t_{k+1}]
    left = (t[1:] * m0 - m1) / dt
    right = (m1 - t[:-1] * m0) / dt
    w = np.zeros(n + 1)
    w[:-1] += left
    w[1:] += right
    # cell 0: product frozen at t_1
    w[1] += w[0]
    w[0] = 0.0
    w.setflags(write=False)
    return w


def time_weights(grid: TimeGrid, H: float) -> np.ndarray:
    """Weights ``v`` with ``int_0^T R(t)^2 t^(1-2H) dt ~= sum_i v_i R_i^2``."""
    return _time_weights_cached(grid.T, grid.n, estimation_hurst(H))


def _scaled_transform(cfg: SdeConfig, values: np.ndarray) -> np.ndarray:
    """``R = t^(H-1/2) (M @ values)`` for one or more columns."""
    M = q_operator(cfg.grid, cfg.H)
    q = M @ values
    scale = np.zeros(cfg.grid.n + 1)
    scale[1:] = cfg.grid.nodes[1:] ** (cfg.H - 0.5)
    return q * (scale[:, None] if q.ndim == 2 else scale)


@dataclass(frozen=True)
class FisherMatrix:
    gamma: np.ndarray
    chol: np.ndarray
    inv: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    @property
    def eigenvalue_floor(self) -> float:
        return float(self.eigenvalues[0])

    @classmethod
    def from_matrix(cls, gamma, rcond: float = 1e-12) -> "FisherMatrix":
        gamma = np.array(gamma, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise ValueError("Fisher matrix must be square")
        gamma = 0.5 * (gamma + gamma.T)
        eig = np.linalg.eigvalsh(gamma)
        if not np.all(np.isfinite(eig)) or eig[0] <= rcond * max(eig[-1], 0.0) or eig[-1] <= 0:
            raise FisherNotPositiveDefinite(
                f"Fisher matrix is not positive definite (eigenvalues {eig.tolist()})"
            )
        chol = np.linalg.cholesky(gamma)
        inv = np.linalg.inv(gamma)
        inv = 0.5 * (inv + inv.T)
        for arr in (gamma, chol, inv, eig):
            arr.setflags(write=False)
        return cls(gamma, chol, inv, eig)


def gamma_matrix(model: DriftModel, theta0, cfg: SdeConfig) -> FisherMatrix:
    """``Gamma_H(theta0)`` along the limit path started at ``cfg.x0``."""
    estimation_hurst(cfg.H)
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    x = solve_ode_limit(model, theta0, cfg).values
    R = _scaled_transform(cfg, model.grad_theta_b(x, theta0))
    v = time_weights(cfg.grid, cfg.H)
    return FisherMatrix.from_matrix(R.T @ (R * v[:, None]))


def y_limit(model: DriftModel, theta, theta0, cfg: SdeConfig) -> float:
    """Limit contrast ``Y_H(theta) >= 0`` along the limit path under ``theta0``."""
    estimation_hurst(cfg.H)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    x = solve_ode_limit(model, theta0, cfg).values
    R = _scaled_transform(cfg, model.b(x, theta) - model.b(x, theta0))
    return 0.5 * float((R * R) @ time_weights(cfg.grid, cfg.H))


def y_empirical(ctx: LikelihoodContext, theta, theta0) -> float:
    """``eps^2 (L(theta) - L(theta0))``; its negative converges to :func:`y_limit`."""
    eps = ctx.cfg.epsilon
    return eps * eps * (log_likelihood(ctx, theta) - log_likelihood(ctx, theta0))


@dataclass(frozen=True)
class ContrastFit:
    xi: float
    rho: float
    slope: float
    ok: bool
    distances: np.ndarray
    values: np.ndarray


def contrast_separation(model: DriftModel, box: ParameterBox, cfg: SdeConfig,
                        points_per_axis: int = 7, warn: bool = True) -> ContrastFit:
    """Fit ``Y_H(theta) >= xi |theta - theta0|^rho`` on a grid over the box.

    ``slope`` is the least-squares slope of ``log Y`` against
    ``log |theta - theta0|``; ``rho`` is that slope clipped to ``[1.01, 2]``
    and ``xi`` the largest constant keeping every probe on or above
    ``xi |theta - theta0|^rho``.  The check passes when ``xi > 0``.  A failed
    check emits a warning only.
    """
    theta0 = box.true_theta
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in zip(box.lower, box.upper)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.dim)
    dist = np.linalg.norm(mesh - theta0, axis=1)
    keep = dist > 1e-12
    mesh, dist = mesh[keep], dist[keep]
    vals = np.array([y_limit(model, th, theta0, cfg) for th in mesh])
    pos = vals > 0
    if np.count_nonzero(pos) >= 2 and np.ptp(np.log(dist[pos])) > 0:
        slope = float(np.polyfit(np.log(dist[pos]), np.log(vals[pos]), 1)[0])
    else:
        slope = math.nan
    rho = min(max(slope, 1.01), 2.0) if math.isfinite(slope) else 2.0
    xi = float(np.min(vals / dist**rho))
    ok = bool(np.all(pos) and xi > 0)
    if not ok and warn:
        warnings.warn(
            f"limit contrast separation looks weak for model {model.name!r}: "
            f"xi={xi:.3g}, rho={rho:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return ContrastFit(xi, rho, slope, ok, dist, vals)
