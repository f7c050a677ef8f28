"""Monte Carlo studies of the normalized estimation error ``u = (theta_hat - theta0) / eps``.

The main study draws ``M`` replicates per noise level, estimates ``theta``
on each and compares the sample of ``u`` with its ``N(0, Gamma^-1)`` limit:
mean, covariance, per-coordinate Kolmogorov-Smirnov tests, polynomial
moments and tail frequencies.  Smaller companion studies check the Volterra
transform, the limit contrast and the Hessian of the log-likelihood.

Replicate ``r`` always uses the noise stream ``replicate_seed(seed, r)``, so
results do not depend on the order in which replicates are run.  Setting the
environment variable ``FBMDRIFT_WORKERS`` to an integer above 1 spreads
replicates over that many processes; aggregation is always in index order.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .asymptotics import FisherMatrix, gamma_matrix, y_empirical, y_limit
from .constants import estimation_hurst
from .errors import ConfigError, NumericalError
from .estimator import EstimationResult, OptimizerOptions, maximize_likelihood
from .fbm import replicate_seed, simulate_fbm
from .grid import SampledPath, TimeGrid
from .likelihood import compute_z, hessian_fd, make_context
from .model import ParameterBox, SdeConfig, builtin_model, simulate_sde

__all__ = [
    "ContrastReport",
    "DoublingCheck",
    "EpsilonBlock",
    "HessianReport",
    "KsResult",
    "ReplicateError",
    "StudyConfig",
    "StudyReport",
    "VolterraReport",
    "histogram_data",
    "ks_normality",
    "run_contrast_study",
    "run_hessian_study",
    "run_replicate",
    "run_study",
    "run_volterra_check",
    "worker_count",
    "write_csv",
    "write_json",
    "write_replicates_csv",
    "write_summary_csv",
]

WORKERS_ENV = "FBMDRIFT_WORKERS"
TAIL_LEVELS = (1.0, 2.0, 3.0)
UNRELIABLE_FRACTION = 0.05


class ReplicateError(NumericalError):
    def __init__(self, r: int, message: str):
        super().__init__(f"replicate {r}: {message}")
        self.r = r


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return n


def _map(fn, args: list) -> list:
    """``[fn(a) for a in args]``, optionally across processes, in input order."""
    workers = min(worker_count(), len(args))
    if workers <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args, chunksize=max(1, len(args) // (4 * workers))))


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class StudyConfig:
    model: str
    box: ParameterBox
    H: float
    epsilons: tuple[float, ...]
    T: float = 1.0
    n: int = 1024
    M: int = 500
    seed: int = 0
    x0: float = 1.0
    fbm_method: str = "circulant"
    doubling_check: bool = False
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)

    def __post_init__(self):
        eps = tuple(float(e) for e in np.atleast_1d(self.epsilons))
        if not eps:
            raise ConfigError("at least one epsilon is required")
        if any(not 0.0 < e <= 1.0 for e in eps):
            raise ConfigError(f"epsilon values must lie in (0, 1], got {eps}")
        object.__setattr__(self, "epsilons", eps)
        if int(self.M) != self.M or self.M < 2:
            raise ConfigError(f"M must be an integer >= 2, got {self.M}")
        if self.box.true_theta is None:
            raise ConfigError("the study box needs a true theta0")
        builtin_model(self.model, self.box)
        try:
            estimation_hurst(self.H)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.sde(eps[0])

    @property
    def theta0(self) -> np.ndarray:
        return self.box.true_theta

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.T, self.n)

    def sde(self, epsilon: float, grid: TimeGrid | None = None) -> SdeConfig:
        return SdeConfig(self.x0, float(epsilon), self.H, grid or self.grid)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "lower": self.box.lower.tolist(),
            "upper": self.box.upper.tolist(),
            "theta0": self.theta0.tolist(),
            "H": self.H,
            "epsilons": list(self.epsilons),
            "T": self.T,
            "n": self.n,
            "M": self.M,
            "seed": self.seed,
            "x0": self.x0,
            "fbm_method": self.fbm_method,
            "doubling_check": self.doubling_check,
        }


# --------------------------------------------------------------------------
# replicates


def _estimate_on(cfg: StudyConfig, sde: SdeConfig, noise: SampledPath) -> EstimationResult:
    model = builtin_model(cfg.model, cfg.box)
    X = simulate_sde(model, cfg.theta0, sde, noise)
    ctx = make_context(X, sde, model)
    return maximize_likelihood(ctx, cfg.box, cfg.optimizer)


def run_replicate(cfg: StudyConfig, r: int, epsilon: float | None = None) -> EstimationResult:
    """Simulate replicate ``r`` at ``theta0`` and estimate ``theta``."""
    if not 0 <= int(r) < cfg.M:
        raise ConfigError(f"replicate index {r} outside [0, {cfg.M})")
    eps = cfg.epsilons[0] if epsilon is None else float(epsilon)
    sde = cfg.sde(eps)
    try:
        noise = simulate_fbm(cfg.grid, cfg.H, replicate_seed(cfg.seed, r), cfg.fbm_method)
        return _estimate_on(cfg, sde, noise)
    except NumericalError as exc:
        raise ReplicateError(int(r), str(exc)) from exc


def _replicate_job(args):
    cfg, r, eps = args
    try:
        return run_replicate(cfg, r, eps)
    except ReplicateError as exc:
        return exc


def _doubling_job(args):
    cfg, r, eps = args
    fine = cfg.grid.refine(2)
    try:
        noise = simulate_fbm(fine, cfg.H, replicate_seed(cfg.seed, r), cfg.fbm_method)
        res_fine = _estimate_on(cfg, cfg.sde(eps, fine), noise)
        res_coarse = _estimate_on(cfg, cfg.sde(eps), noise.subsample(2))
    except NumericalError as exc:
        return ReplicateError(r, str(exc))
    return res_coarse.normalized_error, res_fine.normalized_error


# --------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class KsResult:
    statistic: float
    pvalue: float
    degenerate: bool

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "pvalue": self.pvalue, "degenerate": self.degenerate}


def ks_normality(sample, sigma2: float) -> KsResult:
    """One-sample KS test against ``N(0, sigma2)`` with the asymptotic p-value."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 8:
        raise ValueError("KS test needs at least 8 observations")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    if np.ptp(x) == 0:
        return KsResult(math.nan, math.nan, True)
    res = stats.kstest(x, "norm", args=(0.0, math.sqrt(sigma2)), method="asymp")
    return KsResult(float(res.statistic), float(res.pvalue), False)


def _normal_moment(name: str, sigma: float) -> float:
    return {
        "x": 0.0,
        "x^2": sigma**2,
        "x^4": 3.0 * sigma**4,
        "|x|^3": 2.0 * math.sqrt(2.0 / math.pi) * sigma**3,
    }[name]


_MOMENTS = {
    "x": lambda u: u,
    "x^2": lambda u: u**2,
    "x^4": lambda u: u**4,
    "|x|^3": lambda u: np.abs(u) ** 3,
}


def histogram_data(u: np.ndarray, sigma2: float, bins: int = 30, width_sd: float = 4.0) -> dict:
    """Histogram of one coordinate with the ``N(0, sigma2)`` density at bin centers."""
    sd = math.sqrt(sigma2)
    lim = max(width_sd * sd, float(np.max(np.abs(u))) if u.size else 0.0)
    edges = np.linspace(-lim, lim, bins + 1)
    counts, _ = np.histogram(u, bins=edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    width = edges[1] - edges[0]
    return {
        "edges": edges.tolist(),
        "centers": centers.tolist(),
        "counts": counts.tolist(),
        "density": (counts / max(u.size, 1) / width).tolist(),
        "normal_density": stats.norm.pdf(centers, scale=sd).tolist(),
    }


@dataclass
class EpsilonBlock:
    epsilon: float
    results: list
    failures: list[tuple[int, str]]
    u: np.ndarray
    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    frobenius_rel: float
    frobenius_ci: tuple[float, float]
    ks: list[KsResult]
    moments: list[dict]
    tails: list[dict]
    boundary_hits: int
    nonconverged: int
    unreliable: bool
    histograms: list[dict]

    @property
    def n_ok(self) -> int:
        return self.u.shape[0]

    def summary(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "replicates_ok": self.n_ok,
            "failures": [{"replicate": r, "error": msg} for r, msg in self.failures],
            "boundary_hits": self.boundary_hits,
            "nonconverged": self.nonconverged,
            "unreliable": self.unreliable,
            "mean": self.mean.tolist(),
            "mean_se": self.mean_se.tolist(),
            "cov": self.cov.tolist(),
            "frobenius_rel": self.frobenius_rel,
            "frobenius_ci": list(self.frobenius_ci),
            "ks": [k.to_dict() for k in self.ks],
            "moments": self.moments,
            "tails": self.tails,
            "histograms": self.histograms,
        }


@dataclass
class DoublingCheck:
    n: int
    cov_n: np.ndarray
    cov_2n: np.ndarray
    rel_change: float
    passed: bool
    threshold: float = 0.03

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "n_fine": 2 * self.n,
            "cov_n": self.cov_n.tolist(),
            "cov_2n": self.cov_2n.tolist(),
            "rel_change": self.rel_change,
            "threshold": self.threshold,
            "passed": self.passed,
        }


@dataclass
class StudyReport:
    config: StudyConfig
    fisher: FisherMatrix
    blocks: list[EpsilonBlock]
    doubling: DoublingCheck | None
    monotone: bool | None

    @property
    def unreliable(self) -> bool:
        return any(b.unreliable for b in self.blocks)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "gamma": self.fisher.gamma.tolist(),
            "gamma_inv": self.fisher.inv.tolist(),
            "gamma_eigenvalues": self.fisher.eigenvalues.tolist(),
            "unreliable": self.unreliable,
            "epsilon_monotone": self.monotone,
            "blocks": [b.summary() for b in self.blocks],
            "doubling": None if self.doubling is None else self.doubling.to_dict(),
        }


def _frobenius_rel(cov: np.ndarray, target: np.ndarray) -> float:
    return float(np.linalg.norm(cov - target) / np.linalg.norm(target))


def _bootstrap_ci(u: np.ndarray, target: np.ndarray, seed: int, reps: int = 200) -> tuple[float, float]:
    if u.shape[0] < 2:
        return (math.nan, math.nan)
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(reps):
        s = u[rng.integers(0, u.shape[0], u.shape[0])]
        vals.append(_frobenius_rel(np.atleast_2d(np.cov(s, rowvar=False, ddof=1)), target))
    lo, hi = np.quantile(vals, [0.025, 0.975])
    return (float(lo), float(hi))


def _aggregate(cfg: StudyConfig, eps: float, outcomes: list, fisher: FisherMatrix,
               ci_seed: int) -> EpsilonBlock:
    d = cfg.box.dim
    results, failures = [], []
    for r, out in enumerate(outcomes):
        if isinstance(out, ReplicateError):
            failures.append((r, str(out)))
            results.append(None)
        else:
            results.append(out)
    ok = [res for res in results if res is not None]
    u = np.array([res.normalized_error for res in ok], dtype=float).reshape(-1, d)
    m = u.shape[0]
    gi = fisher.inv
    if m >= 2:
        mean = u.mean(axis=0)
        cov = np.atleast_2d(np.cov(u, rowvar=False, ddof=1))
        mean_se = np.sqrt(np.diag(cov) / m)
    else:
        mean = u.mean(axis=0) if m else np.full(d, math.nan)
        cov = np.full((d, d), math.nan)
        mean_se = np.full(d, math.nan)
    ks, moments, tails, hists = [], [], [], []
    for k in range(d):
        uk = u[:, k]
        s2 = float(gi[k, k])
        ks.append(ks_normality(uk, s2) if m >= 8 else KsResult(math.nan, math.nan, m == 0))
        sd = math.sqrt(s2)
        mom = {}
        for name, f in _MOMENTS.items():
            emp = float(np.mean(f(uk))) if m else math.nan
            ref = _normal_moment(name, sd)
            mom[name] = {"empirical": emp, "limit": ref}
        moments.append(mom)
        tails.append({
            f"{r:g}": {
                "empirical": float(np.mean(np.abs(uk) > r * sd)) if m else math.nan,
                "limit": float(2.0 * stats.norm.sf(r)),
            }
            for r in TAIL_LEVELS
        })
        hists.append(histogram_data(uk, s2))
    boundary = sum(res.hit_boundary for res in ok)
    nonconv = sum(not res.converged for res in ok)
    unreliable = (len(failures) + boundary) > UNRELIABLE_FRACTION * cfg.M
    frob = _frobenius_rel(cov, gi) if m >= 2 else math.nan
    return EpsilonBlock(
        epsilon=eps, results=results, failures=failures, u=u, mean=mean, mean_se=mean_se,
        cov=cov, frobenius_rel=frob, frobenius_ci=_bootstrap_ci(u, gi, ci_seed),
        ks=ks, moments=moments, tails=tails, boundary_hits=boundary, nonconverged=nonconv,
        unreliable=unreliable, histograms=hists,
    )


def _monotone_up_to_ci(values: list[float], cis: list[tuple[float, float]]) -> bool:
    """True when each step either does not increase or has overlapping intervals."""
    for k in range(len(values) - 1):
        if values[k + 1] > values[k] and cis[k + 1][0] > cis[k][1]:
            return False
    return True


def run_study(cfg: StudyConfig) -> StudyReport:
    """All replicates at every noise level, plus the optional grid-doubling check.

    The doubling check simulates the noise at ``2n`` and reuses its
    subsample at ``n``, so the difference of the two covariance estimates is
    driven by the discretization rather than Monte Carlo noise.
    """
    model = builtin_model(cfg.model, cfg.box)
    fisher = gamma_matrix(model, cfg.theta0, cfg.sde(cfg.epsilons[0]))
    blocks = []
    for k, eps in enumerate(cfg.epsilons):
        outcomes = _map(_replicate_job, [(cfg, r, eps) for r in range(cfg.M)])
        ci_seed = replicate_seed(cfg.seed, cfg.M + k)
        blocks.append(_aggregate(cfg, eps, outcomes, fisher, ci_seed))
    monotone = None
    if len(blocks) > 1:
        order = sorted(range(len(blocks)), key=lambda k: -blocks[k].epsilon)
        monotone = _monotone_up_to_ci([blocks[k].frobenius_rel for k in order],
                                      [blocks[k].frobenius_ci for k in order])
    doubling = None
    if cfg.doubling_check:
        eps = cfg.epsilons[0]
        pairs = _map(_doubling_job, [(cfg, r, eps) for r in range(cfg.M)])
        good = [p for p in pairs if not isinstance(p, ReplicateError)]
        d = cfg.box.dim
        un = np.array([p[0] for p in good]).reshape(-1, d)
        u2 = np.array([p[1] for p in good]).reshape(-1, d)
        cn = np.atleast_2d(np.cov(un, rowvar=False, ddof=1))
        c2 = np.atleast_2d(np.cov(u2, rowvar=False, ddof=1))
        rel = float(np.linalg.norm(c2 - cn) / np.linalg.norm(c2))
        doubling = DoublingCheck(cfg.n, cn, c2, rel, rel < 0.03)
    return StudyReport(cfg, fisher, blocks, doubling, monotone)


# --------------------------------------------------------------------------
# companion studies


@dataclass
class VolterraReport:
    H: float
    epsilon: float
    times: list[float]
    variances: list[float]
    rel_errors: list[float]
    M: int

    def to_dict(self) -> dict:
        return {"H": self.H, "epsilon": self.epsilon, "M": self.M, "times": self.times,
                "variances": self.variances, "rel_errors": self.rel_errors}


def _volterra_job(args):
    grid, H, eps, x0, seed, r, idx, method = args
    model = builtin_model("sine")
    sde = SdeConfig(x0, eps, H, grid)
    noise = simulate_fbm(grid, H, replicate_seed(seed, r), method)
    X = simulate_sde(model, [0.0, 0.0], sde, noise)
    return compute_z(X, sde).values[list(idx)]


def run_volterra_check(H: float, grid: TimeGrid, M: int = 2000, seed: int = 0,
                       epsilon: float = 0.1, x0: float = 1.0,
                       fractions=(0.25, 0.5, 1.0), fbm_method: str = "circulant") -> VolterraReport:
    """Empirical ``Var(Z_t)`` under zero drift, where ``Z`` should be a Wiener process."""
    idx = tuple(int(round(f * grid.n)) for f in fractions)
    rows = np.array(_map(_volterra_job, [(grid, H, epsilon, x0, seed, r, idx, fbm_method)
                                         for r in range(M)]))
    var = rows.var(axis=0, ddof=1)
    times = [float(grid.nodes[i]) for i in idx]
    rel = [float(v / t - 1.0) for v, t in zip(var, times)]
    return VolterraReport(H, epsilon, times, var.tolist(), rel, M)


@dataclass
class ContrastReport:
    model: str
    H: float
    theta: list[float]
    theta0: list[float]
    y_limit: float
    epsilons: list[float]
    means: list[float]
    ses: list[float]
    rel_errors: list[float]
    monotone: bool
    M: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "model", "H", "theta", "theta0", "y_limit", "epsilons", "means", "ses",
            "rel_errors", "monotone", "M")}


def _contrast_job(args):
    cfg, r, eps, theta = args
    model = builtin_model(cfg.model, cfg.box)
    sde = cfg.sde(eps)
    noise = simulate_fbm(cfg.grid, cfg.H, replicate_seed(cfg.seed, r), cfg.fbm_method)
    X = simulate_sde(model, cfg.theta0, sde, noise)
    return -y_empirical(make_context(X, sde, model), theta, cfg.theta0)


def run_contrast_study(cfg: StudyConfig, theta) -> ContrastReport:
    """Mean of ``-eps^2 (L(theta) - L(theta0))`` against the limit contrast, per noise level."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    model = builtin_model(cfg.model, cfg.box)
    ylim = y_limit(model, theta, cfg.theta0, cfg.sde(cfg.epsilons[0]))
    eps_sorted = sorted(cfg.epsilons, reverse=True)
    means, ses, rels, cis = [], [], [], []
    for eps in eps_sorted:
        vals = np.array(_map(_contrast_job, [(cfg, r, eps, theta) for r in range(cfg.M)]))
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(cfg.M))
        rel = abs(mean / ylim - 1.0)
        means.append(mean)
        ses.append(se)
        rels.append(rel)
        cis.append((max(rel - 2 * se / ylim, 0.0), rel + 2 * se / ylim))
    return ContrastReport(cfg.model, cfg.H, theta.tolist(), cfg.theta0.tolist(), ylim,
                          eps_sorted, means, ses, rels, _monotone_up_to_ci(rels, cis), cfg.M)


@dataclass
class HessianReport:
    model: str
    H: float
    epsilon: float
    gamma: list[list[float]]
    mean_neg_hessian: list[list[float]]
    rel_errors: list[list[float]]
    M: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "model", "H", "epsilon", "gamma", "mean_neg_hessian", "rel_errors", "M")}


def _hessian_job(args):
    cfg, r, eps = args
    model = builtin_model(cfg.model, cfg.box)
    sde = cfg.sde(eps)
    noise = simulate_fbm(cfg.grid, cfg.H, replicate_seed(cfg.seed, r), cfg.fbm_method)
    X = simulate_sde(model, cfg.theta0, sde, noise)
    return -eps * eps * hessian_fd(make_context(X, sde, model), cfg.theta0)


def run_hessian_study(cfg: StudyConfig) -> HessianReport:
    """Average of ``-eps^2`` times the finite-difference Hessian at ``theta0``, against ``Gamma``."""
    eps = cfg.epsilons[0]
    model = builtin_model(cfg.model, cfg.box)
    gamma = gamma_matrix(model, cfg.theta0, cfg.sde(eps)).gamma
    hs = np.array(_map(_hessian_job, [(cfg, r, eps) for r in range(cfg.M)]))
    mean = hs.mean(axis=0)
    rel = np.abs(mean - gamma) / np.abs(gamma)
    return HessianReport(cfg.model, cfg.H, eps, gamma.tolist(), mean.tolist(), rel.tolist(), cfg.M)


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False, default=_json_default, allow_nan=True)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def write_replicates_csv(report: StudyReport, path: Path) -> None:
    d = report.config.box.dim
    header = (["epsilon", "replicate", "seed"] + [f"theta_hat_{k + 1}" for k in range(d)]
              + [f"u_{k + 1}" for k in range(d)] + ["loglik", "converged", "hit_boundary", "error"])
    rows = []
    for b in report.blocks:
        fail = dict(b.failures)
        for r, res in enumerate(b.results):
            seed = replicate_seed(report.config.seed, r)
            if res is None:
                rows.append([b.epsilon, r, seed] + [""] * (2 * d) + ["", False, False, fail[r]])
            else:
                rows.append([b.epsilon, r, seed, *res.theta_hat, *res.normalized_error,
                             res.loglik_at_hat, res.converged, res.hit_boundary, ""])
    write_csv(path, header, rows)


def write_summary_csv(report: StudyReport, path: Path) -> None:
    rows = []
    gi = report.fisher.inv
    for b in report.blocks:
        for k in range(report.config.box.dim):
            c = k + 1
            rows.append([b.epsilon, c, "mean", b.mean[k], 0.0])
            rows.append([b.epsilon, c, "variance", b.cov[k, k], gi[k, k]])
            for name, m in b.moments[k].items():
                rows.append([b.epsilon, c, f"moment {name}", m["empirical"], m["limit"]])
            for r, t in b.tails[k].items():
                rows.append([b.epsilon, c, f"P(|u| > {r} sd)", t["empirical"], t["limit"]])
            rows.append([b.epsilon, c, "ks statistic", b.ks[k].statistic, ""])
            rows.append([b.epsilon, c, "ks pvalue", b.ks[k].pvalue, ""])
        rows.append([b.epsilon, "", "frobenius rel distance", b.frobenius_rel, 0.0])
    write_csv(path, ["epsilon", "coordinate", "quantity", "empirical", "limit"], rows)
