"""Exact samplers for fractional Brownian motion on a uniform grid.

Two methods are provided.  ``simulate_fbm_cholesky`` factorizes the full
covariance of ``(B_{t_1}, ..., B_{t_n})`` and is the reference sampler.
``simulate_fbm_circulant`` embeds the stationary increment covariance in a
circulant matrix (Davies-Harte) and runs in O(n log n).

Random streams come from the counter-based Philox generator.  A study derives
the stream of replicate ``r`` from ``(master_seed, r)`` via
:func:`replicate_seed`, so replicates can be generated in any order.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import NumericalError
from .grid import SampledPath, TimeGrid

__all__ = [
    "FbmSimulationError",
    "check_hurst",
    "fbm_covariance",
    "make_rng",
    "replicate_seed",
    "simulate_fbm",
    "simulate_fbm_cholesky",
    "simulate_fbm_circulant",
]

_U64 = 2**64


class FbmSimulationError(NumericalError):
    """Raised when a covariance factorization breaks down numerically."""


def check_hurst(H: float, *, allow_half: bool = True) -> float:
    H = float(H)
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst index must lie in (0, 1), got {H}")
    if not allow_half and H == 0.5:
        raise ValueError("H = 1/2 (standard Brownian motion) is excluded here")
    return H


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed))))


def replicate_seed(master_seed: int, r: int) -> int:
    """64-bit seed for replicate ``r`` of a study seeded with ``master_seed``."""
    ss = np.random.SeedSequence(_check_seed(master_seed), spawn_key=(int(r),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fbm_covariance(s, t, H: float):
    """``Cov(B_s, B_t) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2``."""
    H = check_hurst(H)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("fBm covariance is defined for non-negative times only")
    h2 = 2.0 * H
    out = 0.5 * (t**h2 + s**h2 - np.abs(t - s) ** h2)
    return out.item() if out.ndim == 0 else out


@lru_cache(maxsize=16)
def _cholesky_factor(T: float, n: int, H: float) -> np.ndarray:
    t = TimeGrid(T, n).nodes[1:]
    cov = fbm_covariance(t[:, None], t[None, :], H)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise FbmSimulationError(
            f"fBm covariance lost positive definiteness (H={H}, n={n})"
        ) from exc
    L.setflags(write=False)
    return L


def simulate_fbm_cholesky(grid: TimeGrid, H: float, seed: int) -> SampledPath:
    H = check_hurst(H)
    L = _cholesky_factor(grid.T, grid.n, H)
    z = make_rng(seed).standard_normal(grid.n)
    values = np.empty(grid.n + 1)
    values[0] = 0.0
    values[1:] = L @ z
    return SampledPath(grid, values)


@lru_cache(maxsize=16)
def _circulant_sqrt_eigs(n: int, H: float, tol: float = 1e-10) -> np.ndarray:
    k = np.arange(n + 1, dtype=float)
    h2 = 2.0 * H
    # autocovariance of unit-step fractional Gaussian noise
    gamma = 0.5 * ((k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -tol * lam.max():
        raise FbmSimulationError(
            f"circulant embedding has a negative eigenvalue {lam.min():.3e} "
            f"(H={H}, n={n}); use simulate_fbm_cholesky instead"
        )
    out = np.sqrt(np.clip(lam, 0.0, None) / row.size)
    out.setflags(write=False)
    return out


def simulate_fbm_circulant(grid: TimeGrid, H: float, seed: int) -> SampledPath:
    H = check_hurst(H)
    sq = _circulant_sqrt_eigs(grid.n, H)
    rng = make_rng(seed)
    m = sq.size
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    fgn = np.fft.fft(sq * w).real[: grid.n] * grid.dt**H
    values = np.concatenate([[0.0], np.cumsum(fgn)])
    return SampledPath(grid, values)


def simulate_fbm(grid: TimeGrid, H: float, seed: int, method: str = "circulant") -> SampledPath:
    if method == "circulant":
        return simulate_fbm_circulant(grid, H, seed)
    if method == "cholesky":
        return simulate_fbm_cholesky(grid, H, seed)
    raise ValueError(f"unknown fBm method {method!r}")
