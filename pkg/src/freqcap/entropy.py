"""Poisson-entropy calculus in nats.

``H(lam)`` has no closed form, so it and its first two derivatives are
evaluated as truncated series over ``k = 0..K`` with
``K = ceil(lam + 12 sqrt(lam + 1) + 30)``.  The derivatives use the Poisson
forward-difference identity ``d/dlam E[phi(N)] = E[phi(N + 1) - phi(N)]``:

    H'(lam)  = E[log(N + 1)] - log(lam)
    H''(lam) = E[log(1 + 1/(N + 1))] - 1/lam
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import OutOfRange


@dataclass(frozen=True)
class EntropyValue:
    value: float
    truncation_k: int
    tail_bound: float

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {"value": self.value, "truncation_k": self.truncation_k, "tail_bound": self.tail_bound}


def binary_entropy(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise OutOfRange(f"q must lie in [0, 1], got {q}")
    return float(-xlogy(q, q) - xlogy(1 - q, 1 - q))


def psi(mu: float) -> float:
    """Maximal entropy of a non-negative integer variable with mean at most ``mu``."""
    if mu < 0:
        raise OutOfRange(f"mu must be >= 0, got {mu}")
    return (mu + 1) * binary_entropy(1.0 / (mu + 1))


def truncation_k(lam: float) -> int:
    return math.ceil(lam + 12.0 * math.sqrt(lam + 1.0) + 30.0)


def _log_pmf(lam: float, K: int) -> np.ndarray:
    k = np.arange(K + 1, dtype=float)
    return xlogy(k, lam) - lam - gammaln(k + 1)


def _tail_bound(lam: float, K: int) -> float:
    """Bound on ``sum_{k > K} -p_k log p_k``.

    Past ``K`` the pmf ratio ``lam/(k+1)`` is at most ``rho = lam/(K+2)``, so
    ``p_k <= p_{K+1} rho^(k-K-1)``.  Since ``-x log x`` increases on
    ``(0, 1/e)``, summing the geometric majorant gives
    ``p_{K+1} [A/(1-rho) + B rho/(1-rho)^2]`` with ``A = -log p_{K+1}`` and
    ``B = -log rho``.
    """
    if lam == 0:
        return 0.0
    logp = (K + 1) * math.log(lam) - lam - math.lgamma(K + 2)
    p = math.exp(logp)
    if p == 0.0:
        return 0.0
    rho = lam / (K + 2)
    a, b = -logp, -math.log(rho)
    return p * (a / (1 - rho) + b * rho / (1 - rho) ** 2)


def poisson_entropy(lam: float) -> EntropyValue:
    if lam < 0:
        raise OutOfRange(f"lambda must be >= 0, got {lam}")
    if lam == 0:
        return EntropyValue(0.0, 0, 0.0)
    K = truncation_k(lam)
    logp = _log_pmf(lam, K)
    value = float(-np.sum(np.exp(logp) * logp))
    return EntropyValue(value, K, _tail_bound(lam, K))


def poisson_entropy_deriv(lam: float) -> float:
    if lam <= 0:
        raise OutOfRange(f"lambda must be > 0, got {lam}")
    K = truncation_k(lam)
    p = np.exp(_log_pmf(lam, K))
    return float(np.sum(p * np.log1p(np.arange(K + 1))) - math.log(lam))


def poisson_entropy_second_deriv(lam: float) -> float:
    if lam <= 0:
        raise OutOfRange(f"lambda must be > 0, got {lam}")
    K = truncation_k(lam)
    p = np.exp(_log_pmf(lam, K))
    return float(np.sum(p * np.log1p(1.0 / (np.arange(K + 1) + 1.0))) - 1.0 / lam)


_CHUNK = 1 << 21


def poisson_entropy_vec(lam: np.ndarray) -> np.ndarray:
    """Elementwise ``H(lam)`` for an array, sharing one truncation grid."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise OutOfRange("lambda must be >= 0")
    flat = lam.ravel()
    if flat.size == 0:
        return lam.copy()
    K = truncation_k(float(flat.max()))
    k = np.arange(K + 1, dtype=float)
    lgk = gammaln(k + 1)
    out = np.empty(flat.size)
    step = max(1, _CHUNK // (K + 1))
    for a in range(0, flat.size, step):
        f = flat[a:a + step, None]
        logp = xlogy(k[None, :], f) - f - lgk[None, :]
        # logp = -inf where lambda = 0 and k > 0; those terms vanish
        finite = np.isfinite(logp)
        safe = np.where(finite, logp, 0.0)
        out[a:a + step] = -np.sum(np.exp(safe) * safe * finite, axis=1)
    return out.reshape(lam.shape)


def poisson_entropy_deriv_vec(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise OutOfRange("lambda must be > 0")
    flat = lam.ravel()
    K = truncation_k(float(flat.max()))
    k = np.arange(K + 1, dtype=float)
    lgk = gammaln(k + 1)
    out = np.empty(flat.size)
    step = max(1, _CHUNK // (K + 1))
    for a in range(0, flat.size, step):
        f = flat[a:a + step, None]
        p = np.exp(xlogy(k[None, :], f) - f - lgk[None, :])
        out[a:a + step] = p @ np.log1p(k) - np.log(f[:, 0])
    return out.reshape(lam.shape)
