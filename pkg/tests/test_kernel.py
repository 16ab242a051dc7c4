import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freqcap.errors import (
    AllZeroColumn,
    DimensionOverflow,
    NegativeEntry,
    NoClosedForm,
    NonStochasticRow,
    ParameterOutOfRange,
    SingularGram,
)
from freqcap.kernel import (
    KernelFamily,
    closed_form_penalty,
    condition_number,
    det_penalty,
    family_eigenvalues,
    gram_logdet,
    kron_det_shortcut,
    kron_index,
    kron_power,
    make_family,
    new_kernel,
    read_kernel_csv,
    well_conditioned_report,
    write_kernel_csv,
)

BSC = [[0.9, 0.1], [0.1, 0.9]]


def eig_penalty(w):
    """Independent oracle: half the mean log-eigenvalue of the Gram matrix."""
    ev = np.linalg.eigvalsh(w @ w.T)
    return float(np.sum(np.log(ev))) / (2 * w.shape[0])


def random_stochastic(rng, a, m):
    w = rng.dirichlet(np.ones(m), size=a)
    return new_kernel(w)


# construction ---------------------------------------------------------------


def test_identity_kernel_is_valid():
    k = new_kernel(np.eye(2))
    assert k.col_sums.tolist() == [1.0, 1.0]


def test_min_positive_entry():
    assert new_kernel(BSC).min_positive_entry == pytest.approx(0.1)


def test_bad_rows_rejected():
    with pytest.raises(NonStochasticRow):
        new_kernel([[0.5, 0.4], [0.5, 0.5]])
    with pytest.raises(NegativeEntry):
        new_kernel([[1.1, -0.1], [0.5, 0.5]])


def test_entries_are_read_only():
    k = new_kernel(BSC)
    with pytest.raises(ValueError):
        k.entries[0, 0] = 0.5


def test_csv_round_trip(tmp_path):
    k = make_family(KernelFamily.dna_erasure(0.1))
    path = tmp_path / "w.csv"
    write_kernel_csv(k, path)
    assert np.array_equal(read_kernel_csv(path).entries, k.entries)


# condition numbers -----------------------------------------------------------


def test_condition_numbers_of_families():
    assert condition_number(new_kernel(np.eye(3)), 1) == 1.0
    sub = make_family(KernelFamily.general_substitution(4, 0.1))
    for j in range(4):
        assert condition_number(sub, j) == pytest.approx(0.9 / (0.1 / 3))
    eras = make_family(KernelFamily.dna_erasure(0.1))
    assert condition_number(eras, 4) == pytest.approx(1.0)


def test_all_zero_column_is_an_error():
    with pytest.raises(AllZeroColumn):
        condition_number(make_family(KernelFamily.dna_erasure(0.0)), 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_condition_number_matches_literal_ratio(a, m, seed):
    w = random_stochastic(np.random.default_rng(seed), a, m)
    for j in range(m):
        col = w.entries[:, j]
        pos = col[col > 0]
        assert condition_number(w, j) == pytest.approx(pos.max() / pos.min())
        assert condition_number(w, j) >= 1.0


# well-conditioning -------------------------------------------------------------


def test_report_identity_passes():
    rep = well_conditioned_report(new_kernel(np.eye(4)), 1.0, 0.0, 1.0)
    assert rep.passes and rep.tau_achieved == 1.0


def test_report_erasure_column_sums():
    rep = well_conditioned_report(make_family(KernelFamily.dna_erasure(0.1)))
    assert rep.cmax_achieved == pytest.approx(0.9)
    assert rep.min_col_sum == pytest.approx(0.4)
    assert rep.eta_achieved == pytest.approx(-math.log(0.4) / math.log(4))


def test_report_substitution_doubly_stochastic():
    rep = well_conditioned_report(make_family(KernelFamily.general_substitution(4, 0.1)))
    assert rep.cmax_achieved == pytest.approx(1.0)
    assert rep.eta_achieved == 0.0


def test_report_json_fields():
    d = well_conditioned_report(new_kernel(BSC)).to_dict()
    for key in ("kappa_per_column", "tau_achieved", "eta_achieved", "cmax_achieved", "passes", "minus_log_tau"):
        assert key in d
    assert d["minus_log_tau"] == pytest.approx(math.log(9))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**31 - 1),
       st.floats(0.01, 1.0), st.floats(0.0, 3.0), st.floats(0.2, 3.0))
def test_passes_iff_definition(a, m, seed, tau, eta, cmax):
    w = random_stochastic(np.random.default_rng(seed), a, m)
    rep = well_conditioned_report(w, tau, eta, cmax)
    kappa = max(rep.kappa_per_column)
    cs = w.col_sums
    expected = kappa <= 1 / tau and cs.min() >= a ** (-eta) and cs.max() <= cmax
    # the implementation grants a 1e-12 relative slack at the boundaries
    near = (abs(kappa * tau - 1) < 1e-9 or abs(cs.min() - a ** (-eta)) < 1e-9 or abs(cs.max() - cmax) < 1e-9)
    if not near:
        assert rep.passes == expected


# Kronecker powers ------------------------------------------------------------


def test_kron_power_l1_unchanged():
    k = new_kernel(BSC)
    assert np.array_equal(kron_power(k, 1).entries, k.entries)


def test_kron_power_entry_and_packing():
    k2 = kron_power(new_kernel(BSC), 2)
    assert k2.shape == (4, 4)
    assert k2.entries[kron_index((0, 0), 2), kron_index((0, 1), 2)] == pytest.approx(0.09)


def test_kron_power_erasure_shape_and_rows():
    k2 = kron_power(make_family(KernelFamily.dna_erasure(0.1)), 2)
    assert k2.shape == (16, 25)
    assert np.allclose(k2.entries.sum(axis=1), 1.0, atol=1e-12)


def test_kron_power_overflow():
    with pytest.raises(DimensionOverflow):
        kron_power(make_family(KernelFamily.dna_erasure(0.1)), 6)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_kron_power_stays_stochastic_and_addressable(a, m, L, seed):
    rng = np.random.default_rng(seed)
    base = random_stochastic(rng, a, m)
    big = kron_power(base, L)
    assert np.all(np.abs(big.entries.sum(axis=1) - 1) <= 1e-12)
    rows = rng.integers(a, size=L)
    cols = rng.integers(m, size=L)
    expected = np.prod(base.entries[rows, cols])
    assert big.entries[kron_index(rows, a), kron_index(cols, m)] == pytest.approx(expected, rel=1e-12)


# determinant penalty ---------------------------------------------------------


def test_identity_penalty_zero():
    assert det_penalty(new_kernel(np.eye(5))) == 0.0


def test_substitution_penalty_matches_eigen_oracle():
    w = make_family(KernelFamily.general_substitution(4, 0.1))
    assert det_penalty(w) == pytest.approx(-0.10732563273050, abs=1e-12)
    assert det_penalty(w) == pytest.approx(eig_penalty(w.entries), abs=1e-12)


def test_erasure_penalty_matches_eigen_oracle():
    w = make_family(KernelFamily.dna_erasure(0.1))
    frozen = (math.log(0.85) + 6 * math.log(0.9)) / 8
    assert det_penalty(w) == pytest.approx(frozen, abs=1e-12)
    assert det_penalty(w) == pytest.approx(-0.099335252930, abs=1e-11)


def test_singular_gram():
    with pytest.raises(SingularGram):
        det_penalty(new_kernel([[0.5, 0.5], [0.5, 0.5]]))
    with pytest.raises(SingularGram):
        gram_logdet(new_kernel([[1.0], [1.0]]))


def test_kron_det_shortcut_examples():
    base = new_kernel(BSC)
    assert math.exp(kron_det_shortcut(base, 2)) == pytest.approx(0.8 ** 8, rel=1e-12)
    # 0.4096 is det(w^{(x)2}) itself; the Gram determinant is its square
    assert math.exp(0.5 * kron_det_shortcut(base, 2)) == pytest.approx(0.4096, rel=1e-12)
    assert kron_det_shortcut(base, 1) == gram_logdet(base)
    eras = make_family(KernelFamily.dna_erasure(0.1))
    assert kron_det_shortcut(eras, 3) == pytest.approx(gram_logdet(kron_power(eras, 3)), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_kronecker_lemma_property(a, L, seed):
    rng = np.random.default_rng(seed)
    base = random_stochastic(rng, a, a + int(rng.integers(0, 2)))
    direct = gram_logdet(kron_power(base, L))
    assert kron_det_shortcut(base, L) == pytest.approx(direct, rel=1e-8, abs=1e-10)


# families -------------------------------------------------------------------


def test_family_matrices():
    e0 = make_family(KernelFamily.dna_erasure(0.0))
    assert np.array_equal(e0.entries, np.hstack([np.eye(4), np.zeros((4, 1))]))
    s = make_family(KernelFamily.general_substitution(4, 0.1)).entries
    assert np.allclose(np.diag(s), 0.9)
    assert s[0, 1] == pytest.approx(0.1 / 3)
    assert np.array_equal(make_family(KernelFamily.dna_substitution(0.0)).entries, np.eye(4))


def test_family_parameter_ranges():
    with pytest.raises(ParameterOutOfRange):
        KernelFamily.general_substitution(4, 0.75)
    with pytest.raises(ParameterOutOfRange):
        KernelFamily.dna_erasure(0.25)
    with pytest.raises(ParameterOutOfRange):
        KernelFamily("insertion", 4, 0.1)


def test_closed_form_values():
    assert closed_form_penalty(KernelFamily.dna_substitution(0.03)) == pytest.approx(0.75 * math.log(0.96), abs=1e-14)
    assert closed_form_penalty(KernelFamily.dna_erasure(0.1)) == pytest.approx(-0.099335253, abs=1e-9)
    assert closed_form_penalty(KernelFamily.dna_substitution(0.0)) == 0.0
    assert closed_form_penalty(KernelFamily.dna_erasure(0.0)) == 0.0
    with pytest.raises(NoClosedForm):
        closed_form_penalty(KernelFamily.identity(3))


PENALTY_CASES = [
    *((KernelFamily.general_substitution(4, p), 1) for p in (0.0, 0.01, 0.05, 0.1, 0.3)),
    *((KernelFamily.dna_substitution(p), L) for p in (0.01, 0.03, 0.1) for L in (1, 2, 3)),
    *((KernelFamily.dna_erasure(e), L) for e in (0.05, 0.1, 0.2) for L in (1, 2, 3)),
]


@pytest.mark.parametrize("spec,L", PENALTY_CASES, ids=lambda v: getattr(v, "label", str(v)))
def test_closed_form_matches_det_penalty(spec, L):
    w = kron_power(make_family(spec), L)
    assert det_penalty(w) == pytest.approx(closed_form_penalty(spec, L), abs=1e-9)
    assert det_penalty(w) <= 1e-15


@pytest.mark.parametrize("n,p", [(2, 0.1), (4, 0.1), (6, 0.3), (8, 0.05)])
def test_substitution_spectrum(n, p):
    w = make_family(KernelFamily.general_substitution(n, p)).entries
    numeric = np.sort(np.linalg.eigvals(w).real)
    closed = np.sort(family_eigenvalues(KernelFamily.general_substitution(n, p)))
    assert np.allclose(numeric, closed, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.floats(0.0, 0.99))
def test_substitution_penalty_nonpositive(n, frac):
    p = frac * (n - 1) / n
    assert det_penalty(make_family(KernelFamily.general_substitution(n, p))) <= 1e-12
