"""Transition kernels: validation, conditioning, Kronecker powers, log-det penalty.

A kernel is a row-stochastic ``n x m`` matrix ``W`` where ``W[i, j]`` is the
probability that an item of input type ``i`` is identified as output type
``j``.  Kernels are immutable once built; the column statistics used by the
conditioning checks are cached at construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    AllZeroColumn,
    DimensionOverflow,
    NegativeEntry,
    NoClosedForm,
    NonStochasticRow,
    ParameterOutOfRange,
    SingularGram,
)

ROW_SUM_TOL = 1e-9
#: Default cap on ``rows**L * cols**L`` for materialized Kronecker powers.
MAX_ENTRIES = 10**6


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Validated row-stochastic matrix with cached column statistics."""

    entries: np.ndarray
    col_sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        w = np.array(self.entries, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError(f"kernel must be a non-empty 2-D matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("kernel entries must be finite")
        if np.any(w < 0):
            i, j = np.argwhere(w < 0)[0]
            raise NegativeEntry(f"W[{i}][{j}] = {w[i, j]} < 0")
        sums = w.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NonStochasticRow(f"row {i} sums to {sums[i]!r}")
        # absorb sub-tolerance drift so rows sum to 1 at machine precision
        w /= sums[:, None]
        w.setflags(write=False)
        col = w.sum(axis=0)
        col.setflags(write=False)
        object.__setattr__(self, "entries", w)
        object.__setattr__(self, "col_sums", col)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def min_positive_entry(self) -> float:
        pos = self.entries[self.entries > 0]
        return float(pos.min())

    @property
    def max_entry(self) -> float:
        return float(self.entries.max())

    def __repr__(self) -> str:
        return f"TransitionKernel(rows={self.rows}, cols={self.cols})"


def new_kernel(entries: Sequence[Sequence[float]] | np.ndarray) -> TransitionKernel:
    return TransitionKernel(np.asarray(entries, dtype=float))


def read_kernel_csv(path: str | Path) -> TransitionKernel:
    """Load a kernel from headerless CSV, one row per line."""
    data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    return new_kernel(data)


def write_kernel_csv(kernel: TransitionKernel, path: str | Path) -> None:
    np.savetxt(path, kernel.entries, delimiter=",", fmt="%.17g")


# ---------------------------------------------------------------------------
# conditioning
# ---------------------------------------------------------------------------


def condition_number(kernel: TransitionKernel, j: int) -> float:
    """Ratio of the largest to the smallest positive entry of column ``j``."""
    col = kernel.entries[:, j]
    pos = col[col > 0]
    if pos.size == 0:
        raise AllZeroColumn(f"column {j} has no positive entry")
    return float(pos.max() / pos.min())


@dataclass(frozen=True)
class WellConditionReport:
    kappa_per_column: list[float]
    tau_achieved: float
    eta_achieved: float
    cmax_achieved: float
    min_col_sum: float
    passes: bool
    tau: float
    eta: float
    c_max: float

    @property
    def minus_log_tau(self) -> float:
        return 0.0 - math.log(self.tau_achieved)

    def to_dict(self) -> dict:
        return {
            "kappa_per_column": list(self.kappa_per_column),
            "tau_achieved": self.tau_achieved,
            "eta_achieved": self.eta_achieved,
            "cmax_achieved": self.cmax_achieved,
            "passes": self.passes,
            "minus_log_tau": self.minus_log_tau,
        }


def achieved_eta(min_col_sum: float, n: int) -> float:
    """Smallest ``eta >= 0`` with ``min_col_sum >= n**-eta``."""
    if min_col_sum >= 1.0:
        return 0.0
    if n <= 1:
        return math.inf
    return -math.log(min_col_sum) / math.log(n)


def well_conditioned_report(
    kernel: TransitionKernel,
    tau: float = 1.0,
    eta: float = 0.0,
    c_max: float = 1.0,
    *,
    rtol: float = 1e-12,
) -> WellConditionReport:
    """Check the kernel against well-conditioning parameters ``(tau, eta, c_max)``.

    The three comparisons use a relative slack of ``rtol`` so that exactly
    doubly stochastic kernels built in floating point are not rejected over
    rounding in their column sums.
    """
    if not 0 < tau <= 1:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    if eta < 0 or c_max <= 0:
        raise ValueError("eta must be >= 0 and c_max > 0")
    kappas = [condition_number(kernel, j) for j in range(kernel.cols)]
    n = kernel.rows
    cs = kernel.col_sums
    min_cs, max_cs = float(cs.min()), float(cs.max())
    kmax = max(kappas)
    passes = (
        kmax <= (1.0 / tau) * (1 + rtol)
        and min_cs >= n ** (-eta) * (1 - rtol)
        and max_cs <= c_max * (1 + rtol)
    )
    return WellConditionReport(
        kappa_per_column=kappas,
        tau_achieved=1.0 / kmax,
        eta_achieved=achieved_eta(min_cs, n),
        cmax_achieved=max_cs,
        min_col_sum=min_cs,
        passes=bool(passes),
        tau=tau,
        eta=eta,
        c_max=c_max,
    )


def drop_zero_columns(kernel: TransitionKernel) -> TransitionKernel:
    """Remove output symbols that no input can produce."""
    keep = kernel.col_sums > 0
    return new_kernel(kernel.entries[:, keep])


# ---------------------------------------------------------------------------
# Kronecker powers and determinants
# ---------------------------------------------------------------------------


def kron_power(
    base: TransitionKernel, L: int, *, max_entries: int = MAX_ENTRIES
) -> TransitionKernel:
    """``base`` tensored with itself ``L`` times.

    Index packing is row-major over tuples: row ``(i_1, ..., i_L)`` lives at
    ``sum_t i_t * rows**(L - t)``, and likewise for columns with ``cols``.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    n, m = base.rows**L, base.cols**L
    if n * m > max_entries:
        raise DimensionOverflow(
            f"{base.rows}^{L} x {base.cols}^{L} = {n * m} entries exceeds cap {max_entries}"
        )
    if L == 1:
        return base
    return new_kernel(reduce(np.kron, [base.entries] * L))


def kron_index(digits: Sequence[int], base: int) -> int:
    """Pack a digit tuple into a row-major Kronecker index."""
    idx = 0
    for d in digits:
        idx = idx * base + d
    return idx


def _logdet_spd(g: np.ndarray) -> float:
    """log det of a symmetric PSD matrix via pivoted LU, summing log-pivots."""
    n = g.shape[0]
    with warnings.catch_warnings():
        # exact singularity is reported below as SingularGram
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(g, check_finite=False)
    d = np.diag(lu)
    mag = np.abs(d)
    if mag.max() == 0 or mag.min() <= n * np.finfo(float).eps * mag.max():
        raise SingularGram("W W^T is numerically singular")
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    sign = (-1) ** swaps * int(np.prod(np.sign(d)))
    if sign <= 0:
        raise SingularGram("W W^T has non-positive determinant")
    return float(np.sum(np.log(mag)))


def gram_logdet(kernel: TransitionKernel) -> float:
    """Natural-log determinant of ``W W^T``."""
    if kernel.cols < kernel.rows:
        raise SingularGram(f"rank of W W^T is at most m={kernel.cols} < n={kernel.rows}")
    w = kernel.entries
    return _logdet_spd(w @ w.T)


def det_penalty(kernel: TransitionKernel) -> float:
    """Per-type penalty ``(1/(2n)) log det(W W^T)``."""
    return gram_logdet(kernel) / (2 * kernel.rows)


def kron_det_shortcut(base: TransitionKernel, L: int) -> float:
    """``log det`` of the Gram matrix of ``base^{(x)L}`` without materializing it.

    Uses ``(A (x) B)(A (x) B)^T = AA^T (x) BB^T`` and
    ``det(G^{(x)L}) = det(G)^{L a^{L-1}}`` for an ``a x a`` Gram matrix ``G``.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    a = base.rows
    return L * a ** (L - 1) * gram_logdet(base)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

FAMILIES = ("identity", "general_substitution", "dna_substitution", "dna_erasure")


@dataclass(frozen=True)
class KernelFamily:
    """A named parametric kernel.

    ``size`` is ``n`` for ``identity``/``general_substitution`` and the
    alphabet size for the DNA families.  ``param`` is ``p`` for the
    substitution families and ``epsilon`` for erasure.
    """

    family: str
    size: int = 4
    param: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ParameterOutOfRange(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.size < 1:
            raise ParameterOutOfRange("size must be >= 1")
        if self.param < 0:
            raise ParameterOutOfRange("noise parameter must be >= 0")
        k = self.size
        if self.family in ("general_substitution", "dna_substitution"):
            if k < 2:
                raise ParameterOutOfRange("substitution needs at least 2 types")
            if k * self.param / (k - 1) >= 1:
                raise ParameterOutOfRange(f"need n*p/(n-1) < 1, got p={self.param}, n={k}")
        elif self.family == "dna_erasure":
            if self.param >= 1.0 / k:
                raise ParameterOutOfRange(f"erasure needs epsilon < 1/|A| = {1.0 / k}")

    @classmethod
    def identity(cls, n: int) -> "KernelFamily":
        return cls("identity", n, 0.0)

    @classmethod
    def general_substitution(cls, n: int, p: float) -> "KernelFamily":
        return cls("general_substitution", n, p)

    @classmethod
    def dna_substitution(cls, p: float, alphabet_size: int = 4) -> "KernelFamily":
        return cls("dna_substitution", alphabet_size, p)

    @classmethod
    def dna_erasure(cls, epsilon: float, alphabet_size: int = 4) -> "KernelFamily":
        return cls("dna_erasure", alphabet_size, epsilon)

    @property
    def label(self) -> str:
        if self.family == "identity":
            return f"identity(n={self.size})"
        name = "eps" if self.family == "dna_erasure" else "p"
        return f"{self.family}({name}={self.param:g}, size={self.size})"


def make_family(spec: KernelFamily) -> TransitionKernel:
    k, q = spec.size, spec.param
    if spec.family == "identity":
        return new_kernel(np.eye(k))
    if spec.family in ("general_substitution", "dna_substitution"):
        off = q / (k - 1)
        w = (1 - q - off) * np.eye(k) + off * np.ones((k, k))
        return new_kernel(w)
    # dna_erasure: [(1 - eps) I | eps 1]
    w = np.hstack([(1 - q) * np.eye(k), np.full((k, 1), q)])
    return new_kernel(w)


def closed_form_penalty(spec: KernelFamily, L: int = 1) -> float:
    """Closed-form ``(1/(2n)) log det(W W^T)`` for ``W = w^{(x)L}``.

    Per the Kronecker lemma this is ``L`` times the single-letter value
    ``(1/(2a)) log det(w w^T)``; at ``L = 1`` it is the per-nucleotide
    penalty used by the DNA rate bound.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    k, q = spec.size, spec.param
    if spec.family in ("general_substitution", "dna_substitution"):
        base = (k - 1) / k * math.log1p(-k * q / (k - 1))
    elif spec.family == "dna_erasure":
        base = (math.log((1 - q) ** 2 + k * q * q) + 2 * (k - 1) * math.log1p(-q)) / (2 * k)
    else:
        raise NoClosedForm(f"no closed-form penalty for {spec.family}")
    return L * base + 0.0


def family_eigenvalues(spec: KernelFamily) -> list[float]:
    """Closed-form spectrum: of ``w`` for square families, of ``w w^T`` for erasure."""
    k, q = spec.size, spec.param
    if spec.family == "identity":
        return [1.0] * k
    if spec.family in ("general_substitution", "dna_substitution"):
        return [1.0] + [1 - k * q / (k - 1)] * (k - 1)
    return [(1 - q) ** 2 + k * q * q] + [(1 - q) ** 2] * (k - 1)
