"""Hurst-dependent constants: ``d_H`` and the drift-transform constants ``c1, c2, c3``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.integrate import quad

from .fbm import check_hurst

__all__ = ["AsymptoticConstants", "constants", "dh_const", "estimation_hurst"]


def estimation_hurst(H: float) -> float:
    """Validate a Hurst index for estimation objects (``H = 1/2`` excluded)."""
    return check_hurst(H, allow_half=False)


def dh_const(H: float) -> float:
    """``d_H = sqrt(2H Gamma(3/2 - H) Gamma(H + 1/2) / Gamma(2 - 2H))``."""
    H = check_hurst(H)
    return math.sqrt(2 * H * math.gamma(1.5 - H) * math.gamma(H + 0.5) / math.gamma(2 - 2 * H))


def _c2_bracket_integral(H: float) -> float:
    """``int_0^1 (1 - s^(1/2-H)) (1-s)^(-H-1/2) ds`` via ``1 - s = u^2``."""
    a = H - 0.5

    def smooth(u):
        # 2 u^(-2a-1) (1 - (1-u^2)^-a), regular at u = 0
        return 2 * u ** (-2 * a - 1) * (-math.expm1(-a * math.log1p(-u * u)))

    head, _ = quad(smooth, 0.0, 0.5, epsabs=0, epsrel=1e-13, limit=200)
    plain, _ = quad(lambda u: 2 * u ** (-2 * a - 1), 0.5, 1.0, epsabs=0, epsrel=1e-13)
    # the (1 - u)^-a endpoint singularity goes into the algebraic weight
    sing, _ = quad(lambda u: 2 * u ** (-2 * a - 1) * (1 + u) ** -a, 0.5, 1.0,
                   weight="alg", wvar=(0.0, -a), epsabs=0, epsrel=1e-13)
    return head + plain - sing


@dataclass(frozen=True)
class AsymptoticConstants:
    H: float
    c1: float | None
    c2: float | None
    c3: float | None


@lru_cache(maxsize=64)
def constants(H: float) -> AsymptoticConstants:
    """``c1`` for ``H < 1/2``; ``c2, c3`` for ``H > 1/2``.

    ``c1 = (d_H Gamma(1/2 - H))^-2``
    ``c2 = (d_H Gamma(3/2 - H))^-1 (1 + (H - 1/2) int_0^1 (1 - s^(1/2-H)) / (1-s)^(H+1/2) ds)``
    ``c3 = (H - 1/2) (d_H Gamma(3/2 - H))^-1``
    """
    H = estimation_hurst(H)
    d = dh_const(H)
    if H < 0.5:
        return AsymptoticConstants(H, (d * math.gamma(0.5 - H)) ** -2, None, None)
    base = 1.0 / (d * math.gamma(1.5 - H))
    c2 = base * (1.0 + (H - 0.5) * _c2_bracket_integral(H))
    c3 = (H - 0.5) * base
    return AsymptoticConstants(H, None, c2, c3)
