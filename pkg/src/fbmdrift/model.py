"""Drift families, the small-noise SDE and its noise-free limit.

The observed process solves ``X_t = x0 + int_0^t b(X_s, theta) ds + eps B^H_t``
with scalar state and a ``d``-dimensional drift parameter.  The limit path
``x_t`` solves ``x' = b(x, theta0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, NumericalError
from .fbm import check_hurst
from .grid import SampledPath, TimeGrid

__all__ = [
    "BUILTIN_MODELS",
    "DriftModel",
    "ParameterBox",
    "ProbeReport",
    "SdeConfig",
    "builtin_model",
    "check_assumptions",
    "default_box",
    "simulate_sde",
    "solve_ode_limit",
]

ArrayFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ParameterBox:
    """Axis-aligned open box ``prod_k (lower_k, upper_k)``, optionally with a true value."""

    lower: np.ndarray
    upper: np.ndarray
    true_theta: np.ndarray | None = None

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigError("box bounds must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ConfigError("box bounds must be finite")
        if np.any(lo >= hi):
            raise ConfigError(f"box needs lower < upper componentwise, got {lo} / {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.true_theta is not None:
            th = np.atleast_1d(np.asarray(self.true_theta, dtype=float))
            if th.shape != lo.shape:
                raise ConfigError("true_theta has the wrong dimension for the box")
            if not np.all((lo < th) & (th < hi)):
                raise ConfigError(f"true_theta {th} is not strictly inside the box")
            object.__setattr__(self, "true_theta", th)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def halfwidth(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def project(self, theta) -> np.ndarray:
        return np.clip(np.asarray(theta, dtype=float), self.lower, self.upper)

    def contains(self, theta, closed: bool = True) -> bool:
        theta = np.asarray(theta, dtype=float)
        if closed:
            return bool(np.all((self.lower <= theta) & (theta <= self.upper)))
        return bool(np.all((self.lower < theta) & (theta < self.upper)))

    def on_boundary(self, theta, rtol: float = 1e-9) -> bool:
        theta = np.asarray(theta, dtype=float)
        tol = rtol * (self.upper - self.lower)
        return bool(np.any((theta - self.lower <= tol) | (self.upper - theta <= tol)))


@dataclass(frozen=True)
class DriftModel:
    """A drift family ``b(x, theta)`` with derivatives and assumption constants.

    ``b``, ``db_dx`` accept an array of states and a parameter vector and
    return an array of the same shape as the states; ``grad_theta_b`` appends
    a trailing axis of length ``dim``.
    """

    name: str
    dim: int
    b: ArrayFn
    db_dx: ArrayFn
    grad_theta_b: ArrayFn
    lipschitz_L: float
    growth_c: float
    growth_N: int = 1
    param_names: tuple[str, ...] = field(default=())

    def hess_theta_fd(self, x, theta, h: float = 1e-5) -> np.ndarray:
        """Central finite-difference Hessian of ``b`` in theta (diagnostics only)."""
        theta = np.asarray(theta, dtype=float)
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape + (self.dim, self.dim))
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = h
            out[..., k, :] = (self.grad_theta_b(x, theta + e) - self.grad_theta_b(x, theta - e)) / (2 * h)
        return out


@dataclass(frozen=True)
class SdeConfig:
    x0: float
    epsilon: float
    H: float
    grid: TimeGrid

    def __post_init__(self):
        if not math.isfinite(self.x0):
            raise ConfigError("x0 must be finite")
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        try:
            check_hurst(self.H)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def _constant_model(box: ParameterBox) -> DriftModel:
    bound = float(np.max(np.abs(np.concatenate([box.lower, box.upper]))))

    def b(x, th):
        return np.full(np.shape(x), th[0], dtype=float)

    def db_dx(x, th):
        return np.zeros(np.shape(x))

    def grad(x, th):
        return np.ones(np.shape(x) + (1,))

    return DriftModel("constant", 1, b, db_dx, grad, lipschitz_L=0.0,
                      growth_c=max(bound, 1.0), growth_N=0, param_names=("theta1",))


def _linear_model(box: ParameterBox) -> DriftModel:
    bound = float(np.max(np.abs(np.concatenate([box.lower, box.upper]))))

    def b(x, th):
        return -th[0] * np.asarray(x, dtype=float)

    def db_dx(x, th):
        return np.full(np.shape(x), -th[0], dtype=float)

    def grad(x, th):
        return -np.asarray(x, dtype=float)[..., None]

    return DriftModel("linear", 1, b, db_dx, grad, lipschitz_L=bound,
                      growth_c=max(bound, 1.0), growth_N=1, param_names=("theta1",))


def _sine_model(box: ParameterBox) -> DriftModel:
    absmax = np.maximum(np.abs(box.lower), np.abs(box.upper))

    def b(x, th):
        return th[0] + th[1] * np.sin(x)

    def db_dx(x, th):
        return th[1] * np.cos(x)

    def grad(x, th):
        x = np.asarray(x, dtype=float)
        return np.stack([np.ones_like(x), np.sin(x)], axis=-1)

    return DriftModel("sine", 2, b, db_dx, grad, lipschitz_L=float(absmax[1]),
                      growth_c=max(float(absmax.sum()), math.sqrt(2.0)), growth_N=0,
                      param_names=("theta1", "theta2"))


_FACTORIES = {"constant": _constant_model, "linear": _linear_model, "sine": _sine_model}
_DIMS = {"constant": 1, "linear": 1, "sine": 2}
BUILTIN_MODELS = tuple(_FACTORIES)

_DEFAULT_BOXES = {
    "constant": ([-2.0], [4.0], [1.0]),
    "linear": ([0.1], [3.0], [1.0]),
    "sine": ([-2.0, -2.0], [3.0, 3.0], [1.0, 1.0]),
}


def default_box(name: str) -> ParameterBox:
    if name not in _DEFAULT_BOXES:
        raise ConfigError(f"unknown drift model {name!r}; choose one of {BUILTIN_MODELS}")
    lo, hi, th = _DEFAULT_BOXES[name]
    return ParameterBox(lo, hi, th)


def builtin_model(name: str, box: ParameterBox | None = None) -> DriftModel:
    """Built-in drift family.

    * ``constant``: ``b = theta1``
    * ``linear``: ``b = -theta1 * x`` (box should have ``theta1 > 0``)
    * ``sine``: ``b = theta1 + theta2 * sin(x)``

    Lipschitz and growth constants are taken as suprema over ``box`` (the
    model's default box when omitted).
    """
    if name not in _FACTORIES:
        raise ConfigError(f"unknown drift model {name!r}; choose one of {BUILTIN_MODELS}")
    box = box if box is not None else default_box(name)
    if box.dim != _DIMS[name]:
        raise ConfigError(f"model {name!r} has {_DIMS[name]} parameters but the box has {box.dim}")
    return _FACTORIES[name](box)


def _check_theta(model: DriftModel, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (model.dim,):
        raise ConfigError(f"model {model.name!r} expects {model.dim} parameters, got {theta.shape}")
    return theta


def solve_ode_limit(model: DriftModel, theta, cfg: SdeConfig) -> SampledPath:
    """Classical RK4 for ``x' = b(x, theta)``, ``x(0) = x0`` on ``cfg.grid``."""
    theta = _check_theta(model, theta)
    grid = cfg.grid
    h = grid.dt
    x = np.empty(grid.n + 1)
    x[0] = cfg.x0

    def f(v):
        with np.errstate(over="ignore", invalid="ignore"):
            return float(model.b(np.asarray(v), theta))

    for i in range(grid.n):
        xi = x[i]
        k1 = f(xi)
        k2 = f(xi + 0.5 * h * k1)
        k3 = f(xi + 0.5 * h * k2)
        k4 = f(xi + h * k3)
        x[i + 1] = xi + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not math.isfinite(x[i + 1]):
            raise NumericalError(f"limit ODE blew up at t={grid.nodes[i + 1]:.6g}")
    return SampledPath(grid, x)


def simulate_sde(model: DriftModel, theta, cfg: SdeConfig, noise: SampledPath,
                 epsilon: float | None = None) -> SampledPath:
    """Euler scheme ``X_{i+1} = X_i + b(X_i) dt + eps (B_{i+1} - B_i)``.

    ``epsilon`` overrides ``cfg.epsilon``; 0 is accepted here for noise-free
    reference runs.
    """
    theta = _check_theta(model, theta)
    grid = cfg.grid
    if noise.grid.key() != grid.key():
        raise ConfigError("noise path is not sampled on the configured grid")
    eps = cfg.epsilon if epsilon is None else float(epsilon)
    if eps < 0:
        raise ConfigError("epsilon must be non-negative")
    dB = np.diff(noise.values) * eps
    dt = grid.dt
    x = np.empty(grid.n + 1)
    x[0] = cfg.x0
    xi = cfg.x0
    b = model.b
    for i in range(grid.n):
        xi = xi + float(b(np.asarray(xi), theta)) * dt + dB[i]
        x[i + 1] = xi
    if not np.all(np.isfinite(x)):
        raise NumericalError("SDE path became non-finite")
    return SampledPath(grid, x)


@dataclass
class ProbeReport:
    growth_ok: bool
    lipschitz_ok: bool
    gradient_ok: bool
    max_growth_ratio: float
    max_lipschitz_ratio: float
    max_gradient_relerr: float

    @property
    def ok(self) -> bool:
        return self.growth_ok and self.lipschitz_ok and self.gradient_ok


def check_assumptions(model: DriftModel, box: ParameterBox, seed: int = 0,
                      n_probes: int = 200, x_scale: float = 10.0) -> ProbeReport:
    """Randomized spot checks of the growth, Lipschitz and gradient contracts."""
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(box.lower, box.upper, size=(n_probes, box.dim))
    xs = rng.uniform(-x_scale, x_scale, size=n_probes)
    ys = rng.uniform(-x_scale, x_scale, size=n_probes)
    growth, lip, grad_err = 0.0, 0.0, 0.0
    for th, x, y in zip(thetas, xs, ys):
        bx = float(model.b(np.asarray(x), th))
        by = float(model.b(np.asarray(y), th))
        growth = max(growth, abs(bx) / (model.growth_c * (1 + abs(x))))
        if x != y:
            lip = max(lip, abs(bx - by) / (abs(x - y) * max(model.lipschitz_L, 1e-300)))
        g = np.asarray(model.grad_theta_b(np.asarray(x), th), dtype=float)
        for k in range(model.dim):
            h = 1e-6 * max(1.0, abs(th[k]))
            e = np.zeros(model.dim)
            e[k] = h
            fd = (float(model.b(np.asarray(x), th + e)) - float(model.b(np.asarray(x), th - e))) / (2 * h)
            grad_err = max(grad_err, abs(fd - g[k]) / max(1.0, abs(g[k])))
    tol = 1e-12
    return ProbeReport(growth <= 1 + tol, lip <= 1 + tol, grad_err <= 1e-6, growth, lip, grad_err)
