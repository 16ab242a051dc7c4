"""The frequency-based channel and its Poissonized surrogate.

An input is a count vector ``x`` over ``n`` types with ``sum(x) = n*g``.  The
reader draws ``n*r`` items and identifies each through the kernel, giving a
multinomial histogram over ``m`` output types with probabilities
``p_j = sum_i x_i W[i, j] / (n g)``.  The Poissonized channel replaces it by
independent counts ``Z_j ~ Poisson(lambda_j)``,
``lambda_j = (r/g) sum_i x_i W[i, j]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _rng
from .entropy import poisson_entropy_vec
from .errors import ConstraintViolated, DimensionMismatch, InfeasibleTarget, InvalidProbabilityVector
from .kernel import TransitionKernel

_INT_TOL = 1e-9


def _as_count(value: float, what: str) -> int:
    k = round(value)
    if k < 1 or abs(value - k) > _INT_TOL:
        raise InfeasibleTarget(f"{what} = {value!r} must be a positive integer")
    return int(k)


@dataclass(frozen=True)
class ChannelConfig:
    """Scaling parameters of one channel instance.

    ``g`` and ``r`` are the normalized abundance and sample count; they may
    be real as long as ``n*g`` and ``n*r`` are integers.
    """

    n: int
    m: int
    g: float
    r: float

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.g <= 0 or self.r <= 0:
            raise ValueError("g and r must be positive")
        _as_count(self.n * self.g, "n*g")
        _as_count(self.n * self.r, "n*r")

    @classmethod
    def for_kernel(cls, kernel: TransitionKernel, g: float, r: float) -> "ChannelConfig":
        return cls(kernel.rows, kernel.cols, g, r)

    @property
    def total_objects(self) -> int:
        return round(self.n * self.g)

    @property
    def total_samples(self) -> int:
        return round(self.n * self.r)

    @property
    def ratio(self) -> float:
        """``r/g``, the per-object sampling intensity."""
        return self.r / self.g

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "g": self.g, "r": self.r}


@dataclass(frozen=True)
class OutputHistogram:
    """Output counts; ``counts`` is ``(m,)`` for one draw or ``(trials, m)``."""

    counts: np.ndarray
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in ("multinomial", "poissonized"):
            raise ValueError(f"unknown mode {self.mode!r}")


def _check_dims(x: np.ndarray, kernel: TransitionKernel, cfg: ChannelConfig) -> None:
    if kernel.shape != (cfg.n, cfg.m):
        raise DimensionMismatch(f"kernel is {kernel.shape}, config expects ({cfg.n}, {cfg.m})")
    if x.shape[-1] != cfg.n:
        raise DimensionMismatch(f"x has {x.shape[-1]} entries, expected n={cfg.n}")


def in_constraint_set(x, cfg: ChannelConfig) -> bool:
    """Membership in F_n: non-negative integers summing to ``n*g``."""
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= 0) and np.all(x == np.round(x)) and x.sum() == cfg.total_objects)


def output_probs(x, kernel: TransitionKernel, cfg: ChannelConfig) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_dims(x, kernel, cfg)
    if not in_constraint_set(x, cfg):
        raise ConstraintViolated(f"x must be non-negative integers summing to n*g = {cfg.total_objects}")
    return x @ kernel.entries / cfg.total_objects


def poisson_intensities(x, kernel: TransitionKernel, cfg: ChannelConfig) -> np.ndarray:
    """``lambda_j(x)``; ``x`` need not meet the total-count constraint."""
    x = np.asarray(x, dtype=float)
    _check_dims(x, kernel, cfg)
    return cfg.ratio * (x @ kernel.entries)


def conditional_entropy_h(x, kernel: TransitionKernel, cfg: ChannelConfig) -> float:
    """``h(x) = sum_j H_Poiss(lambda_j(x))``; ``x`` may be real-valued."""
    lam = poisson_intensities(x, kernel, cfg)
    return float(np.sum(poisson_entropy_vec(lam)))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _check_probs(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidProbabilityVector(f"not a probability vector: {p}")
    return p


def multinomial_rows(rng: np.random.Generator, p: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """One multinomial draw per entry of ``totals`` by sequential binomial conditioning."""
    totals = np.asarray(totals, dtype=np.int64)
    m = p.size
    out = np.zeros(totals.shape + (m,), dtype=np.int64)
    remaining = totals.copy()
    # mass still unallocated before coordinate j, summed from the right for accuracy
    rest = np.cumsum(p[::-1])[::-1]
    for j in range(m - 1):
        if rest[j] <= 0 or not np.any(remaining):
            break
        q = min(1.0, p[j] / rest[j])
        c = rng.binomial(remaining, q)
        out[..., j] = c
        remaining -= c
    out[..., m - 1] += remaining
    return out


def sample_multinomial(p, total: int, seed: int, trials: int | None = None) -> OutputHistogram:
    """Multinomial histograms with ``total`` samples; one per trial."""
    p = _check_probs(p)
    if total < 0:
        raise ValueError("total must be >= 0")
    n_trials = 1 if trials is None else trials
    parts = _rng.map_blocks(
        lambda rng, b, size: multinomial_rows(rng, p, np.full(size, total)), n_trials, seed, stream=1
    )
    counts = np.concatenate(parts, axis=0) if parts else np.zeros((0, p.size), dtype=np.int64)
    return OutputHistogram(counts[0] if trials is None else counts, "multinomial")


def sample_poissonized(lam, seed: int, trials: int | None = None) -> OutputHistogram:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("intensities must be >= 0")
    n_trials = 1 if trials is None else trials
    parts = _rng.map_blocks(lambda rng, b, size: rng.poisson(lam, size=(size, lam.size)), n_trials, seed, stream=2)
    counts = np.concatenate(parts, axis=0).astype(np.int64)
    return OutputHistogram(counts[0] if trials is None else counts, "poissonized")


def sample_channel(x, kernel: TransitionKernel, cfg: ChannelConfig, seed: int, trials: int,
                   mode: str = "multinomial") -> OutputHistogram:
    if mode == "multinomial":
        return sample_multinomial(output_probs(x, kernel, cfg), cfg.total_samples, seed, trials)
    if mode in ("poisson", "poissonized"):
        return sample_poissonized(poisson_intensities(x, kernel, cfg), seed, trials)
    raise ValueError(f"unknown mode {mode!r}")


def sample_degraded(x, kernel: TransitionKernel, cfg: ChannelConfig, seed: int, trials: int) -> OutputHistogram:
    """Noiseless multinomial sampling followed by routing each item through ``W``.

    Distributionally identical to :func:`sample_channel` in multinomial mode;
    kept separate so the equivalence can be tested.
    """
    x = np.asarray(x, dtype=float)
    _check_dims(x, kernel, cfg)
    if not in_constraint_set(x, cfg):
        raise ConstraintViolated("x must lie in the constraint set")
    ideal = x / cfg.total_objects
    w = kernel.entries

    def block(rng: np.random.Generator, b: int, size: int) -> np.ndarray:
        clean = multinomial_rows(rng, ideal, np.full(size, cfg.total_samples))
        out = np.zeros((size, cfg.m), dtype=np.int64)
        for i in range(cfg.n):
            out += multinomial_rows(rng, w[i], clean[:, i])
        return out

    return OutputHistogram(np.concatenate(_rng.map_blocks(block, trials, seed, stream=3)), "multinomial")


def poissonization_tv(p, totals) -> list[dict]:
    """Total-variation gaps between multinomial and Poissonized laws, by enumeration.

    ``tv_conditioned`` compares the multinomial law with the Poisson law
    (intensities ``N p``) conditioned on the total equal to ``N``;
    ``tv_marginal`` compares the first coordinate's Binomial and Poisson laws
    without conditioning.  Only two output types are supported.

    A Poisson vector conditioned on its total is exactly multinomial, so
    ``tv_conditioned`` is zero up to rounding; it is kept as a sanity check.
    """
    p = _check_probs(p)
    if p.size != 2:
        raise DimensionMismatch("poissonization_tv enumerates two output types only")
    out = []
    for N in totals:
        k = np.arange(N + 1)
        multi = stats.binom.pmf(k, N, p[0])
        lam = N * p
        joint = np.exp(stats.poisson.logpmf(k, lam[0]) + stats.poisson.logpmf(N - k, lam[1]))
        cond = joint / joint.sum()
        tv_cond = 0.5 * float(np.abs(multi - cond).sum())
        kk = np.arange(int(lam[0] + 20 * math.sqrt(lam[0] + 1) + 50))
        b = stats.binom.pmf(kk, N, p[0])
        po = stats.poisson.pmf(kk, lam[0])
        tv_marg = 0.5 * float(np.abs(b - po).sum() + (1 - po.sum()))
        out.append({"total": int(N), "tv_conditioned": tv_cond, "tv_marginal": tv_marg})
    return out
