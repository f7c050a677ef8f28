"""Maximum likelihood over a closed parameter box.

Deterministic multi-start projected gradient ascent.  Each start takes
Barzilai-Borwein trial steps, projects onto the box and backtracks until the
Armijo condition holds, so the objective never decreases along a start.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .likelihood import LikelihoodContext, loglik_and_grad
from .model import ParameterBox

__all__ = ["EstimationResult", "OptimizerOptions", "StartTrace", "maximize_likelihood", "start_points"]


@dataclass(frozen=True)
class OptimizerOptions:
    grad_tol: float = 1e-8
    max_iter: int = 500
    armijo: float = 1e-4
    max_backtracks: int = 60
    start_fraction: float = 0.4
    extra_starts: tuple[tuple[float, ...], ...] = ()
    tie_tol: float = 1e-12

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ConfigError("grad_tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError("max_iter must be a positive integer")
        if not 0 < self.start_fraction < 1:
            raise ConfigError("start_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class StartTrace:
    start: np.ndarray
    theta: np.ndarray
    value: float
    values: tuple[float, ...]
    converged: bool
    n_iter: int


@dataclass(frozen=True)
class EstimationResult:
    theta_hat: np.ndarray
    loglik_at_hat: float
    grad_at_hat: np.ndarray
    normalized_error: np.ndarray | None
    converged: bool
    n_evals: int
    hit_boundary: bool
    best_start: int
    starts: tuple[StartTrace, ...] = field(repr=False, default=())


def start_points(box: ParameterBox, opts: OptimizerOptions = OptimizerOptions()) -> np.ndarray:
    """Center, then center -/+ ``start_fraction * halfwidth`` along each axis, then extras."""
    c, hw = box.center, box.halfwidth
    pts = [c]
    for k in range(box.dim):
        for sign in (-1.0, 1.0):
            p = c.copy()
            p[k] += sign * opts.start_fraction * hw[k]
            pts.append(p)
    for extra in opts.extra_starts:
        p = np.asarray(extra, dtype=float)
        if p.shape != (box.dim,):
            raise ConfigError(f"extra start {extra!r} has the wrong dimension")
        pts.append(box.project(p))
    return np.array(pts)


def _projected_gradient(theta, grad, box: ParameterBox) -> np.ndarray:
    pg = grad.copy()
    pg[(theta <= box.lower) & (grad < 0)] = 0.0
    pg[(theta >= box.upper) & (grad > 0)] = 0.0
    return pg


def _ascend(ctx: LikelihoodContext, box: ParameterBox, x0: np.ndarray,
            opts: OptimizerOptions) -> tuple[StartTrace, int, np.ndarray]:
    x = box.project(x0)
    f, g = loglik_and_grad(ctx, x)
    evals = 1
    values = [f]
    step = None
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        pg = _projected_gradient(x, g, box)
        if np.linalg.norm(pg) <= opts.grad_tol * (1.0 + abs(f)):
            converged = True
            break
        if step is None:
            step = float(np.min(box.halfwidth)) / max(np.linalg.norm(g), 1e-300)
        accepted = False
        for _ in range(opts.max_backtracks):
            xn = box.project(x + step * g)
            dx = xn - x
            if not np.any(dx):
                break
            fn, gn = loglik_and_grad(ctx, xn)
            evals += 1
            if fn >= f + opts.armijo * float(g @ dx):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # no admissible move left: stationary up to rounding
            converged = bool(np.linalg.norm(pg) <= 1e3 * opts.grad_tol * (1.0 + abs(f)))
            break
        dg = gn - g
        curv = -float(dx @ dg)
        step = float(dx @ dx) / curv if curv > 0 else step * 2.0
        x, f, g = xn, fn, gn
        values.append(f)
    else:
        pg = _projected_gradient(x, g, box)
        converged = bool(np.linalg.norm(pg) <= opts.grad_tol * (1.0 + abs(f)))
    trace = StartTrace(np.asarray(x0, dtype=float), x, float(f), tuple(values), converged, it)
    return trace, evals, g


def maximize_likelihood(ctx: LikelihoodContext, box: ParameterBox,
                        opts: OptimizerOptions = OptimizerOptions(),
                        theta0=None) -> EstimationResult:
    """Best of all starts; near-ties go to the point closest to the box center.

    ``theta0`` (default ``box.true_theta``) only feeds the normalized error
    ``(theta_hat - theta0) / eps``; pass ``False`` to omit it.
    """
    if box.dim != ctx.model.dim:
        raise ConfigError(f"box has dimension {box.dim}, model expects {ctx.model.dim}")
    traces, grads = [], []
    total = 0
    for p in start_points(box, opts):
        trace, evals, g = _ascend(ctx, box, p, opts)
        traces.append(trace)
        grads.append(g)
        total += evals
    best_val = max(t.value for t in traces)
    center = box.center
    candidates = [k for k, t in enumerate(traces) if best_val - t.value < opts.tie_tol]
    best = min(candidates, key=lambda k: (float(np.linalg.norm(traces[k].theta - center)), k))
    tb = traces[best]
    if theta0 is None:
        theta0 = box.true_theta
    norm_err = None
    if theta0 is not False and theta0 is not None:
        norm_err = (tb.theta - np.asarray(theta0, dtype=float)) / ctx.cfg.epsilon
    return EstimationResult(
        theta_hat=tb.theta,
        loglik_at_hat=tb.value,
        grad_at_hat=grads[best],
        normalized_error=norm_err,
        converged=tb.converged,
        n_evals=total,
        hit_boundary=box.on_boundary(tb.theta),
        best_start=best,
        starts=tuple(traces),
    )
