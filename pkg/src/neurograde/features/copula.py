"""Frank-copula dependence between channel pairs.

The channel series are mapped to the unit interval by the probability
integral transform; the copula parameter theta is then recovered by
inverting the Kendall-tau relation tau(theta) = 1 - (4/theta)(1 - D1(theta))
with D1 the first Debye function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, stats

from ..errors import CopulaError

#: |theta| ceiling: tau(35) ~ 0.8915, and theta diverges as |tau| -> 1.
THETA_CAP = 35.0
#: estimates below this magnitude are reported as independence
INDEPENDENCE_EPS = 1e-4


@dataclass(frozen=True)
class CopulaEstimate:
    """Fitted Frank dependence for one channel pair."""

    theta: float
    tau: float
    u1: np.ndarray
    u2: np.ndarray
    channel_pair: tuple[str, str] = ("", "")


def pit(x) -> np.ndarray:
    """Empirical probability integral transform: rank / (n + 1).

    Ties get mid-ranks, so a constant series maps to all 0.5. Output is
    strictly inside (0, 1).
    """
    arr = np.asarray(x, dtype=np.float64)
    ranks = stats.rankdata(arr, method="average")
    return ranks / (arr.size + 1)


def debye1(x: float) -> float:
    """First Debye function D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt."""
    if x == 0:
        return 1.0
    if x < 0:
        # D1(-x) = D1(x) + x/2
        return debye1(-x) - x / 2.0
    if x < 1e-4:
        # Maclaurin: 1 - x/4 + x^2/36 + O(x^4)
        return 1.0 - x / 4.0 + x * x / 36.0

    def integrand(t: float) -> float:
        return t / math.expm1(t) if t > 0 else 1.0

    value, _ = integrate.quad(integrand, 0.0, x, limit=200)
    return value / x


def tau_of_theta(theta: float) -> float:
    """Kendall tau implied by a Frank parameter; odd in theta."""
    if theta == 0:
        return 0.0
    return 1.0 - (4.0 / theta) * (1.0 - debye1(theta))


def theta_of_tau(tau: float, cap: float = THETA_CAP) -> float:
    """Invert tau(theta) by bracketed root finding to |tau(theta) - tau| < 1e-6."""
    if abs(tau) < 1e-12:
        return 0.0
    sign = 1.0 if tau > 0 else -1.0
    target = abs(tau)
    if target >= tau_of_theta(cap):
        return sign * cap
    theta = optimize.brentq(lambda t: tau_of_theta(t) - target, 1e-9, cap, xtol=1e-12)
    if abs(tau_of_theta(theta) - target) >= 1e-6:
        raise CopulaError(f"theta inversion did not converge for tau {tau}")
    return sign * theta


def frank_theta(u1, u2, channel_pair: tuple[str, str] = ("", ""),
                cap: float = THETA_CAP) -> CopulaEstimate:
    """Fit the Frank parameter to two PIT series via Kendall tau inversion."""
    a = np.asarray(u1, dtype=np.float64)
    b = np.asarray(u2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise CopulaError(f"need equal-length 1-D series, got {a.shape} and {b.shape}")
    if a.size < 32:
        raise CopulaError(f"need at least 32 samples to fit, got {a.size}")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise CopulaError("degenerate series: all values tied")
    tau = float(stats.kendalltau(a, b).statistic)
    if math.isnan(tau):
        raise CopulaError("Kendall tau undefined for the given series")
    theta = theta_of_tau(tau, cap=cap)
    if abs(theta) < INDEPENDENCE_EPS:
        theta = 0.0
    return CopulaEstimate(theta=theta, tau=tau, u1=a, u2=b, channel_pair=channel_pair)


def frank_cdf(u, v, theta: float):
    """Closed-form Frank copula C(u, v)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if theta == 0:
        return u * v
    num = np.expm1(-theta * u) * np.expm1(-theta * v)
    return -np.log1p(num / math.expm1(-theta)) / theta


def frank_sample(theta: float, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw n pairs from the Frank copula by conditional inverse sampling.

    u is uniform; v solves dC/du(u, v) = w for a second uniform w.
    """
    u = rng.random(n)
    w = rng.random(n)
    if abs(theta) < 1e-12:
        return u, w
    d = math.expm1(-theta)
    v = -np.log1p(w * d / (w + (1.0 - w) * np.exp(-theta * u))) / theta
    return u, v
