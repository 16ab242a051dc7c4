"""Desk-scale experiments: random coding, constraint-set mass, example tables."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import xlogy

from . import _rng
from ._stats import wilson_interval
from .bounds import BoundReport, DnaParams, achievability_bound, dna_penalty, dna_rate_bound
from .channel import ChannelConfig, multinomial_rows
from .errors import DimensionMismatch, FreqcapError, RejectionStall, StateSpaceTooLarge
from .infodensity import InputPrior, enumerate_marginal, info_density
from .kernel import (
    KernelFamily,
    TransitionKernel,
    closed_form_penalty,
    det_penalty,
    drop_zero_columns,
    family_eigenvalues,
    kron_power,
    make_family,
    well_conditioned_report,
)

MAX_N = 16
MAX_S = 8
MIN_ACCEPTANCE = 1e-4
_STREAM_CODING = 40
_STREAM_CONSTRAINT = 41


@dataclass(frozen=True)
class CodingExperimentSpec:
    """One random-coding experiment.

    Either ``prior`` (codewords drawn IID per trial) or a fixed ``codebook``
    of shape ``(M, n)`` must be given.  ``decoder`` is ``"ml"`` or
    ``"threshold"``; the threshold decoder compares ``i(x; y)`` with
    ``log_gamma`` and succeeds only when exactly the sent codeword passes.
    """

    M: int
    cfg: ChannelConfig
    kernel: TransitionKernel
    trials: int
    seed: int
    prior: InputPrior | None = None
    codebook: np.ndarray | None = None
    decoder: str = "ml"
    log_gamma: float = 0.0
    constrain: bool = True
    max_n: int = MAX_N
    max_s: int = MAX_S

    def __post_init__(self) -> None:
        if self.M < 2 or self.trials < 1:
            raise ValueError("need M >= 2 and trials >= 1")
        if self.decoder not in ("ml", "threshold"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.kernel.shape != (self.cfg.n, self.cfg.m):
            raise DimensionMismatch(f"kernel is {self.kernel.shape}, config expects ({self.cfg.n}, {self.cfg.m})")
        if self.codebook is None and self.prior is None:
            raise ValueError("give a prior or an explicit codebook")
        if self.codebook is not None:
            cb = np.asarray(self.codebook)
            if cb.shape != (self.M, self.cfg.n):
                raise DimensionMismatch(f"codebook must have shape ({self.M}, {self.cfg.n})")
        if self.decoder == "threshold" and self.prior is None:
            raise ValueError("the threshold decoder needs a prior for the output marginal")


@dataclass(frozen=True)
class ExperimentResult:
    empirical_error: float
    error_interval: tuple[float, float]
    errors: int
    trials: int
    rate_nats_per_type: float
    constraint_hit_rate: float
    bound_report: BoundReport | None
    seed: int
    decoder: str

    def to_dict(self) -> dict:
        return {
            "empirical_error": self.empirical_error,
            "error_interval": list(self.error_interval),
            "errors": self.errors,
            "trials": self.trials,
            "rate_nats_per_type": self.rate_nats_per_type,
            "constraint_hit_rate": self.constraint_hit_rate,
            "bound_report": None if self.bound_report is None else self.bound_report.to_dict(),
            "seed": self.seed,
            "decoder": self.decoder,
        }


def _draw_codewords(rng, prior: InputPrior, count: int, n: int, target: int | None) -> tuple[np.ndarray, int, int]:
    """``count`` codewords, rejected onto ``sum = target`` when given.

    Returns the codewords with the number drawn and the number that hit the
    constraint set, which gives the hit rate.
    """
    if target is None:
        x = prior.sample(rng, (count, n))
        return x, count, 0
    kept, drawn, hits = [], 0, 0
    have = 0
    while have < count:
        batch = max(64, 2 * (count - have))
        x = prior.sample(rng, (batch, n))
        ok = x.sum(axis=1) == target
        drawn += batch
        hits += int(ok.sum())
        if drawn >= 10_000 and hits < MIN_ACCEPTANCE * drawn:
            raise RejectionStall(f"acceptance {hits / drawn:.2e} below {MIN_ACCEPTANCE:g}")
        kept.append(x[ok])
        have += int(ok.sum())
    return np.concatenate(kept)[:count], drawn, hits


def _ml_decode(rng, y: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Index maximizing ``sum_j y_j log p_j``; ties broken uniformly."""
    scores = xlogy(y[:, None, :], probs).sum(axis=2)
    best = scores.max(axis=1, keepdims=True)
    tied = scores == best
    keys = rng.random(scores.shape) * tied
    return keys.argmax(axis=1)


def random_coding_experiment(spec: CodingExperimentSpec) -> ExperimentResult:
    cfg, w = spec.cfg, spec.kernel.entries
    if cfg.n > spec.max_n or (spec.prior is not None and spec.prior.s > spec.max_s):
        raise StateSpaceTooLarge(f"instance exceeds n <= {spec.max_n}, s <= {spec.max_s}")
    fixed = None if spec.codebook is None else np.asarray(spec.codebook, dtype=float)
    target = cfg.total_objects if spec.constrain else None
    marginal = None
    if spec.decoder == "threshold":
        marginal = enumerate_marginal(spec.prior, spec.kernel, cfg)

    def block(rng: np.random.Generator, b: int, size: int) -> tuple[int, int, int]:
        if fixed is None:
            flat, drawn, hits = _draw_codewords(rng, spec.prior, size * spec.M, cfg.n, target)
            books = flat.reshape(size, spec.M, cfg.n)
            if target is None:
                hits = int((books.sum(axis=2) == cfg.total_objects).sum())
        else:
            books = np.broadcast_to(fixed, (size, spec.M, cfg.n))
            drawn = size * spec.M
            hits = drawn * int((fixed.sum(axis=1) == cfg.total_objects).all())
        # the composition fixes the read distribution; off F_n it is renormalized
        mass = books @ w
        probs = mass / mass.sum(axis=2, keepdims=True)
        sent = rng.integers(spec.M, size=size)
        p_sent = probs[np.arange(size), sent]
        y = np.empty((size, cfg.m), dtype=np.int64)
        for t in range(size):
            y[t] = multinomial_rows(rng, p_sent[t], np.array(cfg.total_samples))
        if spec.decoder == "ml":
            wrong = _ml_decode(rng, y, probs) != sent
        else:
            z = np.repeat(y, spec.M, axis=0)
            dens = info_density(books.reshape(-1, cfg.n), z, marginal, spec.kernel, cfg).reshape(size, spec.M)
            passing = dens > spec.log_gamma
            ok = passing[np.arange(size), sent] & (passing.sum(axis=1) == 1)
            wrong = ~ok
        return int(wrong.sum()), drawn, hits

    parts = _rng.map_blocks(block, spec.trials, spec.seed, stream=_STREAM_CODING)
    errors = sum(p[0] for p in parts)
    drawn = sum(p[1] for p in parts)
    hits = sum(p[2] for p in parts)
    try:
        bound = achievability_bound(cfg, spec.kernel)
    except FreqcapError:
        bound = None
    return ExperimentResult(
        empirical_error=errors / spec.trials,
        error_interval=wilson_interval(errors, spec.trials),
        errors=errors,
        trials=spec.trials,
        rate_nats_per_type=math.log(spec.M) / cfg.n,
        constraint_hit_rate=hits / drawn if drawn else 0.0,
        bound_report=bound,
        seed=spec.seed,
        decoder=spec.decoder,
    )


def exact_ml_error(codebook, kernel: TransitionKernel, cfg: ChannelConfig, max_outputs: int = 2_000_000) -> float:
    """Exact ML error of a fixed codebook by enumerating every output histogram.

    Ties are split uniformly, matching the randomized decoder.
    """
    cb = np.asarray(codebook, dtype=float)
    N, m = cfg.total_samples, cfg.m
    if math.comb(N + m - 1, m - 1) > max_outputs:
        raise StateSpaceTooLarge("too many output histograms to enumerate")
    mass = cb @ kernel.entries
    probs = mass / mass.sum(axis=1, keepdims=True)
    total = 0.0
    for cut in itertools.combinations(range(N + m - 1), m - 1):
        bounds = (-1,) + cut + (N + m - 1,)
        y = np.diff(bounds) - 1
        scores = xlogy(y[None, :], probs).sum(axis=1)
        like = np.exp(stats.multinomial.logpmf(y, N, probs))
        tied = scores == scores.max()
        # codeword u decodes correctly with probability tied[u] / |tied|
        total += float(like @ (1.0 - tied / tied.sum()))
    return total / cb.shape[0]


# ---------------------------------------------------------------------------
# constraint-set mass
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintMass:
    estimate: float
    stderr: float
    interval: tuple[float, float]
    hits: int
    trials: int
    reference: float
    prior_mean: float
    meets_reference: bool
    seed: int
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["interval"] = list(self.interval)
        d["warnings"] = list(self.warnings)
        return d


def constraint_set_probability(prior: InputPrior, cfg: ChannelConfig, trials: int, seed: int) -> ConstraintMass:
    """Monte Carlo estimate of ``P(sum X_i = n g)`` under IID draws from ``prior``.

    A non-integer ``n g`` is already rejected by :class:`ChannelConfig` with
    ``InfeasibleTarget``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    target = cfg.total_objects

    def block(rng, b, size):
        return int((prior.sample(rng, (size, cfg.n)).sum(axis=1) == target).sum())

    hits = sum(_rng.map_blocks(block, trials, seed, stream=_STREAM_CONSTRAINT))
    est = hits / trials
    ref = 1.0 / (3 * cfg.n * cfg.g)
    notes = []
    if abs(prior.mean - cfg.g) > 0.05 * cfg.g:
        notes.append(f"prior mean {prior.mean:.4g} differs from g={cfg.g:g}; the mass may be exponentially small")
    lo, hi = wilson_interval(hits, trials)
    meets = hi >= ref
    if not meets:
        notes.append(f"estimate {est:.4g} falls below 1/(3 n g) = {ref:.4g}")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return ConstraintMass(
        estimate=est,
        stderr=math.sqrt(est * (1 - est) / trials),
        interval=(lo, hi),
        hits=hits,
        trials=trials,
        reference=ref,
        prior_mean=prior.mean,
        meets_reference=meets,
        seed=seed,
        warnings=notes,
    )


# ---------------------------------------------------------------------------
# example tables
# ---------------------------------------------------------------------------

DEFAULT_GRID: tuple[tuple[KernelFamily, tuple[int, ...]], ...] = (
    *((KernelFamily.general_substitution(4, p), (1,)) for p in (0.0, 0.01, 0.05, 0.1)),
    *((KernelFamily.general_substitution(8, p), (1,)) for p in (0.05, 0.2)),
    *((KernelFamily.dna_substitution(p), (1, 2, 3)) for p in (0.0, 0.01, 0.03, 0.1)),
    *((KernelFamily.dna_erasure(e), (1, 2, 3)) for e in (0.0, 0.05, 0.1, 0.2)),
)
# the DNA rate columns use one in-regime operating point
DNA_POINT = DnaParams(K=1e6, beta=0.6, alphabet_size=4, reads=1e7)
AGREEMENT_TOL = 1e-9


def _numeric_spectrum(kernel: TransitionKernel) -> np.ndarray:
    w = kernel.entries
    if kernel.rows == kernel.cols:
        ev = np.linalg.eigvals(w).real
    else:
        ev = np.linalg.eigvalsh(w @ w.T)
    return np.sort(ev)[::-1]


def _closed_spectrum(spec: KernelFamily, L: int) -> np.ndarray:
    base = np.array(family_eigenvalues(spec))
    ev = base
    for _ in range(L - 1):
        ev = np.multiply.outer(ev, base).ravel()
    return np.sort(ev)[::-1]


def _fmt(values) -> str:
    return ";".join(f"{v:.10g}" for v in values)


def reproduce_examples(grid=DEFAULT_GRID) -> list[dict]:
    """One row per (family, parameter, L) with closed-form and numeric columns."""
    rows = []
    for spec, levels in grid:
        base = make_family(spec)
        for L in levels:
            w = kron_power(base, L)
            ev_num = _numeric_spectrum(w)
            ev_cf = _closed_spectrum(spec, L)
            d_num = det_penalty(w)
            d_cf = closed_form_penalty(spec, L)
            rep = well_conditioned_report(drop_zero_columns(w))
            row = {
                "family": spec.family,
                "param": spec.param,
                "size": spec.size,
                "L": L,
                "n": w.rows,
                "m": w.cols,
                "eigenvalues_closed": _fmt(np.unique(np.round(ev_cf, 12))[::-1]),
                "eigenvalues_numeric": _fmt(np.unique(np.round(ev_num, 12))[::-1]),
                "eigen_max_abs_diff": float(np.max(np.abs(ev_cf - ev_num))),
                "delta_closed": d_cf,
                "delta_numeric": d_num,
                "delta_abs_diff": abs(d_cf - d_num),
                "col_sums": _fmt(np.unique(np.round(w.col_sums, 12))[::-1]) if L == 1 else "",
                "kappa_max": float(np.max(rep.kappa_per_column)),
                "tau": rep.tau_achieved,
                "eta": rep.eta_achieved,
                "c_max": rep.cmax_achieved,
                "dna_delta_shortcut": "",
                "dna_delta_materialized": "",
                "dna_rate": "",
            }
            if spec.family != "general_substitution":
                row["dna_delta_shortcut"] = dna_penalty(base, "shortcut", L)
                row["dna_delta_materialized"] = dna_penalty(base, "materialized", L)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    row["dna_rate"] = dna_rate_bound(DNA_POINT, base, route="shortcut", L_eval=L).rate
            row["agree"] = bool(row["eigen_max_abs_diff"] <= AGREEMENT_TOL and row["delta_abs_diff"] <= AGREEMENT_TOL)
            rows.append(row)
    return rows
