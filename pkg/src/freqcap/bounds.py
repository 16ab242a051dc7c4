"""Capacity bounds for noisy frequency-based channels.

All rates are in nats per input type.  The asymptotic ``o(1)`` corrections
have no finite-n form and are omitted; every report carries
``asymptotic_terms_omitted = True``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .channel import ChannelConfig
from .entropy import psi
from .errors import InvalidParams, NotWellConditioned, RegimeViolation
from .kernel import (
    TransitionKernel,
    det_penalty,
    drop_zero_columns,
    gram_logdet,
    kron_det_shortcut,
    kron_power,
    well_conditioned_report,
)


def converse_bound(cfg: ChannelConfig) -> float:
    """``0.5 log(min(r, e g))``."""
    return 0.5 * math.log(min(cfg.r, math.e * cfg.g))


@dataclass(frozen=True)
class BoundReport:
    converse: float
    achievability: float
    penalty_delta: float
    psi_term: float
    half_log_r: float
    params_echo: ChannelConfig
    asymptotic_terms_omitted: bool = True
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "converse": self.converse,
            "achievability": self.achievability,
            "penalty_delta": self.penalty_delta,
            "psi_term": self.psi_term,
            "half_log_r": self.half_log_r,
            "params_echo": self.params_echo.to_dict(),
            "asymptotic_terms_omitted": self.asymptotic_terms_omitted,
            "warnings": list(self.warnings),
        }


def achievability_bound(
    cfg: ChannelConfig,
    kernel: TransitionKernel,
    tau: float | None = None,
    eta: float | None = None,
    c_max: float | None = None,
) -> BoundReport:
    """``0.5 log r - Psi(r/g) + (1/(2n)) log det(W W^T)`` with the converse alongside.

    Conditioning parameters left as ``None`` default to the values the
    kernel achieves, so the check then only rejects kernels with all-zero
    columns.  Output columns that no input can reach are dropped before the
    check: they are never observed and leave ``W W^T`` unchanged.
    """
    if kernel.shape != (cfg.n, cfg.m):
        raise ValueError(f"kernel is {kernel.shape}, config expects ({cfg.n}, {cfg.m})")
    used = drop_zero_columns(kernel)
    rep = well_conditioned_report(used)
    rep = well_conditioned_report(
        used,
        rep.tau_achieved if tau is None else tau,
        rep.eta_achieved if eta is None else eta,
        rep.cmax_achieved if c_max is None else c_max,
    )
    if not rep.passes:
        raise NotWellConditioned(
            f"kernel fails (tau={rep.tau}, eta={rep.eta}, C_max={rep.c_max}): "
            f"tau_achieved={rep.tau_achieved}, eta_achieved={rep.eta_achieved}, cmax_achieved={rep.cmax_achieved}"
        )
    delta = det_penalty(kernel)
    half = 0.5 * math.log(cfg.r)
    ps = psi(cfg.ratio)
    ach = half - ps + delta
    notes = []
    if ach < 0:
        notes.append("achievability is negative; the bound is only meaningful asymptotically")
    return BoundReport(converse_bound(cfg), ach, delta, ps, half, cfg, warnings=notes)


def mutual_info_lower_bound(cfg: ChannelConfig, kernel: TransitionKernel) -> float:
    """Total (not per-type) lower bound ``(n/2) log r - n Psi(r/g) + 0.5 log det(W W^T)``.

    For square kernels the last term is ``log|det W|``; both agree.
    """
    n = cfg.n
    return n * 0.5 * math.log(cfg.r) - n * psi(cfg.ratio) + 0.5 * gram_logdet(kernel)


def effective_support(s_n: float, kernel: TransitionKernel, c_max: float | None = None) -> float:
    """``s_n`` scaled by the largest column sum."""
    s_star = s_n * float(kernel.col_sums.max())
    if c_max is not None and s_star > c_max * s_n * (1 + 1e-12):
        raise NotWellConditioned(f"effective support {s_star} exceeds C_max * s_n = {c_max * s_n}")
    return s_star


# ---------------------------------------------------------------------------
# DNA storage rate
# ---------------------------------------------------------------------------


def beta_interval(alphabet_size: int) -> tuple[float, float]:
    la = math.log(alphabet_size)
    return 2.0 / (3.0 * la), 1.0 / la


@dataclass(frozen=True)
class DnaParams:
    K: float
    beta: float
    alphabet_size: int = 4
    reads: float = 0.0

    def __post_init__(self) -> None:
        if self.K <= 1 or self.beta <= 0 or self.alphabet_size < 2 or self.reads <= 0:
            raise ValueError("need K > 1, beta > 0, alphabet_size >= 2 and reads > 0")

    @property
    def L(self) -> float:
        return self.beta * math.log(self.K)

    @property
    def n(self) -> float:
        return self.alphabet_size**self.L

    @property
    def g(self) -> float:
        return self.K / self.n

    def in_regime(self) -> bool:
        lo, hi = beta_interval(self.alphabet_size)
        return lo < self.beta < hi


@dataclass(frozen=True)
class DnaReport:
    rate: float
    sampling_term: float
    psi_term: float
    penalty_delta: float
    L: float
    n: float
    g: float
    beta_interval: tuple[float, float]
    in_regime: bool
    asymptotic_terms_omitted: bool = True
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["beta_interval"] = list(self.beta_interval)
        d["warnings"] = list(self.warnings)
        return d


def dna_penalty(nucleotide_kernel: TransitionKernel, route: str = "shortcut", L: int = 1) -> float:
    """Per-nucleotide penalty ``(1/(2|A|)) log det(w w^T)``.

    ``route='shortcut'`` applies the Kronecker determinant lemma to
    ``w^{(x)L}``; ``'materialized'`` builds the ``|A|^L``-type kernel and takes
    its per-type penalty.  Either is divided by ``L``, so both return the
    same single-letter value.
    """
    a = nucleotide_kernel.rows
    if route == "shortcut":
        return kron_det_shortcut(nucleotide_kernel, L) / (2 * a**L * L)
    if route == "materialized":
        return det_penalty(kron_power(nucleotide_kernel, L)) / L
    raise ValueError(f"unknown route {route!r}")


def dna_rate_bound(
    dna: DnaParams,
    nucleotide_kernel: TransitionKernel,
    strict: bool = False,
    route: str = "shortcut",
    L_eval: int = 1,
) -> DnaReport:
    """Normalized stored-bits lower bound for DNA storage in the short-molecule regime.

    ``(1/(2 beta)) log N / log K - Psi(N / K^{1 - beta log|A|}) / (beta log K) + Delta``.

    The Psi argument is kept as stated, i.e. ``N / g`` with ``g = K / n``.
    Substituting ``n = |A|^L`` and ``n g = K`` into ``Psi(r / g)`` of the
    general bound would give ``N / K`` instead; see ``psi_term`` if the
    other reading is wanted.
    """
    if nucleotide_kernel.rows != dna.alphabet_size:
        raise ValueError("nucleotide kernel rows must equal the alphabet size")
    lo, hi = beta_interval(dna.alphabet_size)
    notes = []
    ok = dna.in_regime()
    if not ok:
        msg = f"beta={dna.beta} outside ({lo:.6g}, {hi:.6g})"
        if strict:
            raise RegimeViolation(msg)
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    cmax = float(nucleotide_kernel.col_sums.max())
    if cmax > 1 + 1e-12:
        notes.append(f"column sums reach {cmax} > 1")
    delta = dna_penalty(nucleotide_kernel, route, L_eval)
    logK = math.log(dna.K)
    sampling = math.log(dna.reads) / (2 * dna.beta * logK)
    mu = dna.reads / dna.K ** (1 - dna.beta * math.log(dna.alphabet_size))
    ps = psi(mu) / (dna.beta * logK)
    return DnaReport(
        rate=sampling - ps + delta,
        sampling_term=sampling,
        psi_term=ps,
        penalty_delta=delta,
        L=dna.L,
        n=dna.n,
        g=dna.g,
        beta_interval=(lo, hi),
        in_regime=ok,
        warnings=notes,
    )


# ---------------------------------------------------------------------------
# Feinstein bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeinsteinParams:
    """Parameters of the error-probability bound.

    Zero ``delta_n`` or ``eta`` are accepted and produce a vacuous bound.
    """

    delta_n: float
    s_n: int
    tau: float = 1.0
    c_max: float = 1.0
    eta: float = 0.0
    c: float = 1.0
    log_m: float | None = None
    gamma: float | None = None

    def validate(self, cfg: ChannelConfig) -> None:
        if self.delta_n < 0 or self.eta < 0 or self.c <= 0 or self.c_max <= 0:
            raise InvalidParams("delta_n, eta must be >= 0 and c, C_max > 0")
        if self.s_n < 1:
            raise InvalidParams("s_n must be >= 1")
        if not 0 < self.tau <= 1:
            raise InvalidParams("tau must lie in (0, 1]")
        upper = self.s_n * self.c_max / cfg.ratio
        if self.delta_n >= upper:
            raise InvalidParams(f"delta_n must be < (g/r) s_n C_max = {upper}")


@dataclass(frozen=True)
class FeinsteinReport:
    epsilon_bound: float
    entropy_exponent: float
    info_density_exponent: float
    exponent: float
    vacuous: bool
    log_m: float | None

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def feinstein_code_size(mi_per_type: float, n: int, delta_n: float, r: float) -> float:
    """``log M = n I - 3 n delta_n - 0.5 log(6 pi n r)``."""
    return n * mi_per_type - 3 * n * delta_n - 0.5 * math.log(6 * math.pi * n * r)


def feinstein_exponents(fp: FeinsteinParams, cfg: ChannelConfig) -> tuple[float, float]:
    """The entropy-concentration and information-density rates, before ``min``."""
    n, ratio, s = cfg.n, cfg.ratio, fp.s_n
    if n > 1:
        ent = fp.c * fp.eta / (ratio**2 * s * s * math.log(n) ** 2)
    else:
        ent = math.inf if fp.eta > 0 else 0.0
    beta = math.log(s) - math.log(fp.tau)
    den = 19 * fp.c_max * cfg.r * s * beta * beta
    info = math.inf if den == 0 else cfg.g / den
    return ent, info


def feinstein_epsilon_bound(
    fp: FeinsteinParams,
    cfg: ChannelConfig,
    kernel: TransitionKernel | None = None,
    mass_f: float = 1.0,
) -> FeinsteinReport:
    """``(11 / P(F_n)) [sqrt(n r) exp(-n delta^2 min(A, B)) + exp(-n delta)]``.

    ``A`` is the entropy-concentration rate, ``B`` the information-density
    rate.  The kernel, when given, must match the configuration; its
    conditioning is not re-derived here because the rates take ``tau``,
    ``eta`` and ``C_max`` as stated parameters.
    """
    if not 0 < mass_f <= 1:
        raise InvalidParams("mass_F must lie in (0, 1]")
    if kernel is not None and kernel.shape != (cfg.n, cfg.m):
        raise InvalidParams("kernel does not match config")
    fp.validate(cfg)
    n = cfg.n
    a, b = feinstein_exponents(fp, cfg)
    rate = min(a, b)
    tail = math.exp(-n * fp.delta_n * fp.delta_n * rate) if math.isfinite(rate) else 0.0
    eps = 11.0 / mass_f * (math.sqrt(n * cfg.r) * tail + math.exp(-n * fp.delta_n))
    return FeinsteinReport(eps, a, b, rate, eps >= 1.0, fp.log_m)
