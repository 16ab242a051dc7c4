"""Input priors, exact tiny-scale marginals and the Poisson information density.

Inputs are IID ``X_i`` on ``{1..s}`` (never 0).  Conditioned on ``x`` the
Poissonized outputs are independent, ``Z_j ~ Poisson(lambda_j(x))``, so

    i(x; z) = sum_j log Pois(z_j; lambda_j(x)) - log P_Z(z).

``P_Z`` is available two ways.  ``full_joint`` enumerates every support
point of ``X`` (ground truth, tiny instances only).  ``product_of_marginals``
uses the exact per-coordinate marginals ``P_{Z_j}``, each a Poisson mixture
over the law of ``sum_i X_i W[i, j]``; the approximation is only in treating
the joint output density as their product.  The additive information
density built from it is what the Lipschitz and concentration diagnostics
study.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, stats
from scipy.special import gammaln, logsumexp, xlogy

from . import _rng
from ._stats import wilson_interval
from .channel import ChannelConfig, poisson_intensities
from .entropy import poisson_entropy_deriv_vec, poisson_entropy_vec, truncation_k
from .errors import (
    ColumnBoundViolated,
    InfeasibleMean,
    StateSpaceTooLarge,
    TruncationExceeded,
)
from .kernel import TransitionKernel, well_conditioned_report

MAX_JOINT_STATES = 10**5
MAX_COORD_STATES = 2 * 10**5
DEFAULT_DELTAS = (0.05, 0.1, 0.2, 0.5)


def log_pois(z, lam):
    """Poisson log-pmf, broadcasting; ``log Pois(0; 0) = 0``."""
    z = np.asarray(z, dtype=float)
    return xlogy(z, lam) - lam - gammaln(z + 1)


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InputPrior:
    """pmf over ``{1..s}``; ``pmf[k]`` is ``P(X = k + 1)``."""

    pmf: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.pmf, dtype=float).ravel()
        if p.size < 1 or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
            raise ValueError(f"prior pmf must be non-negative and sum to 1, got sum {p.sum()}")
        p = p / p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "pmf", p)

    @property
    def s(self) -> int:
        return self.pmf.size

    @property
    def values(self) -> np.ndarray:
        return np.arange(1, self.s + 1)

    @property
    def mean(self) -> float:
        return float(self.values @ self.pmf)

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        keep = self.pmf > 0
        return self.values[keep], self.pmf[keep]

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.choice(self.values, size=shape, p=self.pmf)

    def to_dict(self) -> dict:
        return {"s": self.s, "pmf": self.pmf.tolist(), "mean": self.mean}


def uniform_prior(s: int) -> InputPrior:
    return InputPrior(np.full(s, 1.0 / s))


def point_mass_prior(value: int, s: int | None = None) -> InputPrior:
    s = value if s is None else s
    p = np.zeros(s)
    p[value - 1] = 1.0
    return InputPrior(p)


def read_prior_csv(path: str | Path) -> InputPrior:
    """pmf over ``1..s`` as comma- or newline-separated values."""
    return InputPrior(np.loadtxt(path, delimiter=",", ndmin=1).ravel())


def _gamma_pmf(values: np.ndarray, shape: float, log_scale: float) -> np.ndarray:
    logw = stats.gamma.logpdf(values, a=shape, scale=math.exp(log_scale))
    return np.exp(logw - logsumexp(logw))


def default_prior(g: float, s: int, shape: float = 0.5) -> InputPrior:
    """Zero-excluded Gamma(shape) discretized on ``{1..s}`` with mean ``g``.

    The scale is solved numerically so that the discretized, renormalized
    pmf has mean exactly ``g``.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if g > s:
        raise InfeasibleMean(f"mean {g} exceeds the support cap {s}")
    if s == 1:
        return point_mass_prior(1)
    if g == 1:
        return point_mass_prior(1, s)
    values = np.arange(1, s + 1, dtype=float)

    def gap(ls: float) -> float:
        return float(values @ _gamma_pmf(values, shape, ls)) - g

    lo, hi = -60.0, 60.0
    if gap(lo) >= 0 or gap(hi) <= 0:
        raise InfeasibleMean(
            f"Gamma(shape={shape}) on 1..{s} cannot reach mean {g} "
            f"(reachable range ({gap(lo) + g:.6g}, {gap(hi) + g:.6g}))"
        )
    ls = optimize.brentq(gap, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    return InputPrior(_gamma_pmf(values, shape, ls))


# ---------------------------------------------------------------------------
# marginals
# ---------------------------------------------------------------------------


def _coordinate_law(vals: np.ndarray, probs: np.ndarray, column: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Law of ``sum_i X_i column[i]`` for IID ``X_i``, by convolution over ``i``."""
    law: dict[float, float] = {0.0: 1.0}
    for w in column:
        nxt: dict[float, float] = {}
        for v, pv in law.items():
            for x, px in zip(vals, probs):
                key = round(v + x * w, 12)
                nxt[key] = nxt.get(key, 0.0) + pv * px
        if len(nxt) > MAX_COORD_STATES:
            raise StateSpaceTooLarge(f"coordinate law has more than {MAX_COORD_STATES} atoms")
        law = nxt
    keys = np.array(sorted(law))
    return keys, np.array([law[k] for k in keys])


@dataclass(frozen=True, eq=False)
class EnumeratedMarginal:
    """Exact output marginals of the Poissonized channel under an IID prior.

    ``logp[j, z]`` is ``log P_{Z_j}(z)`` for ``z = 0..z_cap`` and
    ``tail[j]`` the exact mass beyond ``z_cap``.  In ``full_joint`` mode the
    support points of ``X`` and their intensities are kept so the joint
    density can be evaluated at any ``z``.
    """

    z_cap: int
    logp: np.ndarray
    tail: np.ndarray
    joint_mode: str
    ratio: float
    coord_values: list = field(repr=False)
    coord_probs: list = field(repr=False)
    support_x: np.ndarray | None = field(default=None, repr=False)
    log_px: np.ndarray | None = field(default=None, repr=False)
    support_lam: np.ndarray | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.logp.shape[0]

    def mass(self) -> np.ndarray:
        """Per-coordinate enumerated mass (sums to ``1 - tail``)."""
        return np.exp(logsumexp(self.logp, axis=1))

    def log_joint(self, z: np.ndarray) -> np.ndarray:
        """``log P_Z(z)`` for a batch ``z`` of shape ``(B, m)``."""
        if self.support_lam is None:
            raise ValueError("joint density needs a full_joint marginal")
        z = np.atleast_2d(np.asarray(z, dtype=float))
        S, m = self.support_lam.shape
        chunk = max(1, 4_000_000 // max(1, S * m))
        out = np.empty(z.shape[0])
        for a in range(0, z.shape[0], chunk):
            zc = z[a:a + chunk]
            lp = log_pois(zc[:, None, :], self.support_lam[None, :, :]).sum(axis=2)
            out[a:a + chunk] = logsumexp(lp + self.log_px[None, :], axis=1)
        return out


def _auto_zcap(kernel: TransitionKernel, prior: InputPrior, cfg: ChannelConfig) -> int:
    lam_max = cfg.ratio * prior.s * float(kernel.col_sums.max())
    return truncation_k(lam_max)


def enumerate_marginal(
    prior: InputPrior,
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    z_cap: int | None = None,
    joint_mode: str = "auto",
) -> EnumeratedMarginal:
    if joint_mode not in ("auto", "full_joint", "product_of_marginals"):
        raise ValueError(f"unknown joint_mode {joint_mode!r}")
    if kernel.shape != (cfg.n, cfg.m):
        raise ValueError("kernel does not match config")
    if z_cap is None:
        z_cap = _auto_zcap(kernel, prior, cfg)
    vals, probs = prior.support()
    n_states = vals.size**cfg.n
    if joint_mode == "auto":
        joint_mode = "full_joint" if n_states <= MAX_JOINT_STATES else "product_of_marginals"
    if joint_mode == "full_joint" and n_states > MAX_JOINT_STATES:
        raise StateSpaceTooLarge(f"{vals.size}^{cfg.n} = {n_states} joint states > {MAX_JOINT_STATES}")

    w = kernel.entries
    z = np.arange(z_cap + 1)
    logp = np.empty((cfg.m, z_cap + 1))
    tail = np.empty(cfg.m)
    cvals, cprobs = [], []
    for j in range(cfg.m):
        v, pv = _coordinate_law(vals, probs, w[:, j])
        lam = cfg.ratio * v
        logp[j] = logsumexp(np.log(pv)[:, None] + log_pois(z[None, :], lam[:, None]), axis=0)
        tail[j] = float(pv @ stats.poisson.sf(z_cap, lam))
        cvals.append(v)
        cprobs.append(pv)

    support_x = log_px = support_lam = None
    if joint_mode == "full_joint":
        support_x = np.array(list(itertools.product(vals, repeat=cfg.n)), dtype=float)
        idx = np.array(list(itertools.product(range(vals.size), repeat=cfg.n)))
        log_px = np.log(probs)[idx].sum(axis=1)
        support_lam = cfg.ratio * support_x @ w
    return EnumeratedMarginal(
        z_cap=z_cap,
        logp=logp,
        tail=tail,
        joint_mode=joint_mode,
        ratio=cfg.ratio,
        coord_values=cvals,
        coord_probs=cprobs,
        support_x=support_x,
        log_px=log_px,
        support_lam=support_lam,
    )


def info_density(
    x,
    z,
    marginal: EnumeratedMarginal,
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    additive: bool | None = None,
):
    """``i(x; z)``; batched when ``x`` and ``z`` are 2-D.

    ``additive`` selects the per-coordinate (product-of-marginals) form; by
    default it is used exactly when the marginal has no joint table.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z)
    single = z.ndim == 1
    x2, z2 = np.atleast_2d(x), np.atleast_2d(z)
    if additive is None:
        additive = marginal.joint_mode == "product_of_marginals"
    lam = poisson_intensities(x2, kernel, cfg)
    cond = log_pois(z2, lam).sum(axis=1)
    if additive:
        if np.any(z2 > marginal.z_cap):
            raise TruncationExceeded(f"output count {int(z2.max())} beyond z_cap={marginal.z_cap}")
        cols = np.arange(marginal.m)
        marg = marginal.logp[cols[None, :], z2].sum(axis=1)
    else:
        marg = marginal.log_joint(z2)
    out = cond - marg
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# mutual information
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MIEstimate:
    value: float
    stderr: float
    trials: int
    mode: str
    seed: int

    def to_dict(self) -> dict:
        return {"mi": self.value, "stderr": self.stderr, "trials": self.trials, "mode": self.mode, "seed": self.seed}


@dataclass(frozen=True)
class ExactMI:
    value: float
    output_entropy: float
    conditional_entropy: float
    tail_mass: float
    box_size: int


def exact_mutual_information(
    prior: InputPrior,
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    tail: float = 1e-15,
    max_work: int = 4 * 10**8,
) -> ExactMI:
    """``I(X; Z) = H(Z) - H(Z|X)`` by full enumeration of inputs and an output box.

    The box extends per coordinate to the ``1 - tail`` quantile of the
    largest intensity; the mass it misses is reported as ``tail_mass``.
    """
    marg = enumerate_marginal(prior, kernel, cfg, z_cap=1, joint_mode="full_joint")
    lam = marg.support_lam
    caps = [int(stats.poisson.isf(tail, lm)) + 1 if lm > 0 else 0 for lm in lam.max(axis=0)]
    box = int(np.prod([c + 1 for c in caps]))
    if box * lam.shape[0] * cfg.m > max_work:
        raise StateSpaceTooLarge(f"output box {box} x {lam.shape[0]} states exceeds the work budget")
    h_z = 0.0
    mass = 0.0
    shape = tuple(c + 1 for c in caps)
    step = 1 << 16
    for a in range(0, box, step):
        zc = np.stack(np.unravel_index(np.arange(a, min(box, a + step)), shape), axis=1)
        p = np.exp(marg.log_joint(zc))
        h_z -= float(np.sum(xlogy(p, p)))
        mass += float(p.sum())
    px = np.exp(marg.log_px)
    h_zx = float(px @ poisson_entropy_vec(lam).sum(axis=1))
    return ExactMI(h_z - h_zx, h_z, h_zx, max(0.0, 1.0 - mass), box)


def mc_mutual_information(
    prior: InputPrior,
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    trials: int,
    seed: int,
    mode: str = "auto",
) -> MIEstimate:
    """Monte Carlo mean of ``i(X; Z)`` with its standard error.

    ``mode='full_joint'`` uses the exact joint marginal and estimates
    ``I(X; Z)``; ``product_of_marginals`` estimates the mean of the additive
    density instead, which is what is available beyond enumeration.
    """
    marg = enumerate_marginal(prior, kernel, cfg, joint_mode=mode)
    w = kernel.entries

    def block(rng: np.random.Generator, b: int, size: int) -> np.ndarray:
        x = prior.sample(rng, (size, cfg.n)).astype(float)
        z = rng.poisson(cfg.ratio * x @ w)
        return np.atleast_1d(info_density(x, z, marg, kernel, cfg))

    parts = _rng.map_blocks(block, trials, seed, stream=10)
    vals = np.concatenate(parts)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return MIEstimate(mean, se, trials, marg.joint_mode, seed)


# ---------------------------------------------------------------------------
# Lipschitz semi-norm
# ---------------------------------------------------------------------------


def one_step_log_ratios(
    x,
    marginal: EnumeratedMarginal,
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    z_box: int = 30,
) -> np.ndarray:
    """``f(z + e_j) - f(z)`` of the additive density, shape ``(m, z_box)``.

    By additivity the step in coordinate ``j`` depends only on ``z_j``:
    ``log(lambda_j(x)/(z_j+1)) - log(P_{Z_j}(z_j+1)/P_{Z_j}(z_j))``.
    """
    if z_box < 1:
        raise ValueError("z_box must be >= 1")
    if z_box > marginal.z_cap:
        raise StateSpaceTooLarge(f"z_box={z_box} beyond the enumerated z_cap={marginal.z_cap}")
    lam = poisson_intensities(x, kernel, cfg)
    z = np.arange(z_box)
    cond = np.log(lam)[:, None] - np.log(z + 1.0)[None, :]
    marg = marginal.logp[:, 1:z_box + 1] - marginal.logp[:, :z_box]
    return cond - marg


def lipschitz_seminorm_bruteforce(
    x,
    marginal: EnumeratedMarginal,
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    z_box: int = 30,
    prior: InputPrior | None = None,
) -> float:
    """``max_{j, z} |f_x(z + e_j) - f_x(z)|`` over the box ``z_j <= z_box``.

    With ``x=None`` the supremum is also taken over inputs in the prior's
    support.  Each one-step difference is monotone in ``lambda_j(x)``, so
    the extremes sit at the all-minimum and all-maximum support vectors.
    """
    if x is not None:
        return float(np.max(np.abs(one_step_log_ratios(x, marginal, kernel, cfg, z_box))))
    if prior is None:
        raise ValueError("x=None needs the prior to locate its support")
    vals, _ = prior.support()
    best = 0.0
    for v in (vals.min(), vals.max()):
        xv = np.full(cfg.n, float(v))
        best = max(best, float(np.max(np.abs(one_step_log_ratios(xv, marginal, kernel, cfg, z_box)))))
    return best


# ---------------------------------------------------------------------------
# gradient and convexity of the conditional entropy
# ---------------------------------------------------------------------------


def _h_batch(x: np.ndarray, kernel: TransitionKernel, cfg: ChannelConfig) -> np.ndarray:
    lam = cfg.ratio * np.atleast_2d(x) @ kernel.entries
    return poisson_entropy_vec(lam).sum(axis=-1)


@dataclass(frozen=True)
class GradientReport:
    points: int
    max_abs_grad: float
    max_fd_error: float
    exact_bound_holds: bool
    asymptotic_bound: float
    asymptotic_applicable: bool
    asymptotic_holds: bool | None
    eta: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def gradient_bound_check(
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    eta: float,
    s_n: int | None = None,
    points: int = 50,
    seed: int = 0,
    step: float = 1e-4,
    x_points: np.ndarray | None = None,
) -> GradientReport:
    """Finite-difference gradients of ``h`` against the column-sum bounds.

    At every probed ``x`` the gradient must satisfy the exact bound
    ``|dh/dx_k| <= (r/g) max_j log(1 + 1/lambda_j(x))``.  The asymptotic form
    ``(r/g) eta log n`` is also checked whenever
    ``log(1 + n^eta g/r) <= eta log n (1 + 1e-3)`` holds at this ``n``.
    """
    n = cfg.n
    min_cs = float(kernel.col_sums.min())
    if min_cs < n ** (-eta) * (1 - 1e-12):
        raise ColumnBoundViolated(f"min column sum {min_cs} < n^-eta = {n ** (-eta)}")
    s_n = s_n if s_n is not None else max(2, math.ceil(2 * cfg.g))
    if x_points is None:
        rng = _rng.generator(seed, 20)
        x_points = rng.uniform(1.0, float(s_n), size=(points, n))
    x_points = np.atleast_2d(np.asarray(x_points, dtype=float))
    w = kernel.entries
    max_grad = 0.0
    max_err = 0.0
    exact_ok = True
    for x in x_points:
        lam = cfg.ratio * x @ w
        analytic = cfg.ratio * w @ poisson_entropy_deriv_vec(lam)
        fd = np.empty(n)
        for k in range(n):
            up, dn = x.copy(), x.copy()
            lo_edge, hi_edge = x[k] - step < 1.0, x[k] + step > s_n
            if hi_edge:
                dn[k] -= step
                fd[k] = (_h_batch(x, kernel, cfg)[0] - _h_batch(dn, kernel, cfg)[0]) / step
            elif lo_edge:
                up[k] += step
                fd[k] = (_h_batch(up, kernel, cfg)[0] - _h_batch(x, kernel, cfg)[0]) / step
            else:
                up[k] += step
                dn[k] -= step
                fd[k] = (_h_batch(up, kernel, cfg)[0] - _h_batch(dn, kernel, cfg)[0]) / (2 * step)
        max_err = max(max_err, float(np.max(np.abs(fd - analytic))))
        g = float(np.max(np.abs(fd)))
        max_grad = max(max_grad, g)
        bound = cfg.ratio * float(np.max(np.log1p(1.0 / lam)))
        if g > bound + 1e-6:
            exact_ok = False
    asym = cfg.ratio * eta * math.log(n) if n > 1 else 0.0
    applicable = n > 1 and eta > 0 and math.log1p(n**eta / cfg.ratio) <= eta * math.log(n) * (1 + 1e-3)
    holds = (max_grad <= asym * (1 + 1e-3)) if applicable else None
    return GradientReport(len(x_points), max_grad, max_err, exact_ok, asym, applicable, holds, eta)


@dataclass(frozen=True)
class ConvexityReport:
    probes: int
    max_second_difference: float
    passes: bool

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def convexity_probe(
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    directions: int = 200,
    seed: int = 0,
    s_n: int | None = None,
    eps: float = 1e-3,
    tol: float = 1e-8,
    x_points: np.ndarray | None = None,
    d_points: np.ndarray | None = None,
) -> ConvexityReport:
    """Second differences of ``h`` along random lines; concavity means all ``<= tol``."""
    n = cfg.n
    s_n = s_n if s_n is not None else max(2, math.ceil(2 * cfg.g))
    rng = _rng.generator(seed, 21)
    if x_points is None:
        x_points = rng.uniform(1.0 + eps, s_n - eps if s_n > 1 + 2 * eps else 1.0 + 2 * eps, size=(directions, n))
    if d_points is None:
        d = rng.normal(size=(len(x_points), n))
        d_points = d / np.linalg.norm(d, axis=1, keepdims=True)
    x_points = np.atleast_2d(np.asarray(x_points, dtype=float))
    d_points = np.atleast_2d(np.asarray(d_points, dtype=float))
    second = (
        _h_batch(x_points + eps * d_points, kernel, cfg)
        - 2 * _h_batch(x_points, kernel, cfg)
        + _h_batch(x_points - eps * d_points, kernel, cfg)
    )
    worst = float(second.max())
    return ConvexityReport(len(x_points), worst, bool(worst <= tol))


# ---------------------------------------------------------------------------
# concentration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConcentrationReport:
    deltas: list[float]
    empirical_tail: list[float]
    wilson_lower: list[float]
    wilson_upper: list[float]
    bound_bl: list[float]
    bound_exponent_bl: list[float]
    bound_exponent_tal: list[float | None]
    deviations: dict[str, float]
    beta_lip_measured: float
    beta_lip_bound: float
    lambda_bar: float
    trials: int
    seed: int
    passes: bool

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def bobkov_ledoux_exponent(delta: float, beta: float, lambda_bar: float) -> float:
    """``delta^2 / (16 beta^2 lambda_bar + 3 beta delta)``; ``inf`` when ``beta = 0``."""
    denom = 16 * beta * beta * lambda_bar + 3 * beta * delta
    return math.inf if denom == 0 else delta * delta / denom


def talagrand_exponent(delta: float, n: int, eta: float, ratio: float, s: int, c: float = 1.0) -> float | None:
    """``c eta delta^2 n / ((r/g)^2 s^2 log^2 n)``; undefined at ``n = 1``."""
    if n <= 1:
        return None
    return c * eta * delta * delta * n / (ratio**2 * s * s * math.log(n) ** 2)


def concentration_experiment(
    prior: InputPrior,
    kernel: TransitionKernel,
    cfg: ChannelConfig,
    trials: int,
    delta_grid=DEFAULT_DELTAS,
    seed: int = 0,
    tau: float | None = None,
    c_max: float | None = None,
    eta: float | None = None,
    c_talagrand: float = 1.0,
    confidence: float = 0.99,
) -> ConcentrationReport:
    """Empirical lower tail of ``(f_X(Z) - E[f_X(Z) | X]) / n`` against the Poisson bound.

    ``f`` is the additive information density; its conditional mean is
    computed exactly per coordinate.  The Bobkov-Ledoux curve uses
    ``beta = log s - log tau`` and ``lambda_bar = (r/g) s C_max``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rep = well_conditioned_report(kernel)
    tau = rep.tau_achieved if tau is None else tau
    c_max = rep.cmax_achieved if c_max is None else c_max
    eta = rep.eta_achieved if eta is None else eta
    marg = enumerate_marginal(prior, kernel, cfg, joint_mode="product_of_marginals")
    w = kernel.entries
    zgrid = np.arange(marg.z_cap + 1, dtype=float)
    n = cfg.n

    def cond_mean(lam: np.ndarray) -> np.ndarray:
        # E[f | x] = sum_j [-H(lam_j) - sum_z Pois(z; lam_j) log P_{Z_j}(z)]
        pz = np.exp(log_pois(zgrid[None, None, :], lam[:, :, None]))
        cross = np.einsum("bjz,jz->b", pz, marg.logp)
        return -poisson_entropy_vec(lam).sum(axis=1) - cross

    def block(rng: np.random.Generator, b: int, size: int) -> np.ndarray:
        x = prior.sample(rng, (size, n)).astype(float)
        lam = cfg.ratio * x @ w
        z = rng.poisson(lam)
        f = info_density(x, z, marg, kernel, cfg, additive=True)
        return (np.atleast_1d(f) - cond_mean(lam)) / n

    dev = np.concatenate(_rng.map_blocks(block, trials, seed, stream=30))
    beta = math.log(prior.s) - math.log(tau)
    lambda_bar = cfg.ratio * prior.s * c_max
    deltas = [float(d) for d in delta_grid]
    emp, lo, hi, bl, ebl, etal = [], [], [], [], [], []
    for d in deltas:
        k = int(np.count_nonzero(dev < -d))
        a, b = wilson_interval(k, trials, confidence)
        e = bobkov_ledoux_exponent(d, beta, lambda_bar)
        emp.append(k / trials)
        lo.append(a)
        hi.append(b)
        ebl.append(e)
        bl.append(math.exp(-n * e) if math.isfinite(e) else 0.0)
        etal.append(talagrand_exponent(d, n, eta, cfg.ratio, prior.s, c_talagrand))
    qs = (0.001, 0.01, 0.05, 0.5, 0.95, 0.99)
    quant = {f"q{q:g}": float(v) for q, v in zip(qs, np.quantile(dev, qs))}
    beta_meas = lipschitz_seminorm_bruteforce(None, marg, kernel, cfg, z_box=min(30, marg.z_cap), prior=prior)
    passes = all(l <= bnd for l, bnd in zip(lo, bl))
    return ConcentrationReport(
        deltas=deltas,
        empirical_tail=emp,
        wilson_lower=lo,
        wilson_upper=hi,
        bound_bl=bl,
        bound_exponent_bl=ebl,
        bound_exponent_tal=etal,
        deviations=quant,
        beta_lip_measured=beta_meas,
        beta_lip_bound=beta,
        lambda_bar=lambda_bar,
        trials=trials,
        seed=seed,
        passes=bool(passes),
    )


__all__ = [
    "InputPrior",
    "EnumeratedMarginal",
    "ConcentrationReport",
    "MIEstimate",
    "ExactMI",
    "GradientReport",
    "ConvexityReport",
    "default_prior",
    "uniform_prior",
    "point_mass_prior",
    "read_prior_csv",
    "enumerate_marginal",
    "info_density",
    "exact_mutual_information",
    "mc_mutual_information",
    "one_step_log_ratios",
    "lipschitz_seminorm_bruteforce",
    "gradient_bound_check",
    "convexity_probe",
    "concentration_experiment",
    "bobkov_ledoux_exponent",
    "talagrand_exponent",
]
