import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from freqcap.channel import ChannelConfig
from freqcap.errors import ColumnBoundViolated, InfeasibleMean, StateSpaceTooLarge, TruncationExceeded
from freqcap.infodensity import (
    InputPrior,
    bobkov_ledoux_exponent,
    concentration_experiment,
    convexity_probe,
    default_prior,
    enumerate_marginal,
    exact_mutual_information,
    gradient_bound_check,
    info_density,
    lipschitz_seminorm_bruteforce,
    mc_mutual_information,
    one_step_log_ratios,
    point_mass_prior,
    read_prior_csv,
    talagrand_exponent,
    uniform_prior,
)
from freqcap.kernel import KernelFamily, make_family, new_kernel, well_conditioned_report

from .instances import tiny_instances

ONE = new_kernel([[1.0]])
CFG1 = ChannelConfig(1, 1, 1, 1)


def mixture_mi_oracle(zmax=80):
    """I(X; Z) for X uniform on {1, 2}, Z ~ Poisson(X), by direct summation."""
    z = np.arange(zmax)
    p1, p2 = stats.poisson.pmf(z, 1), stats.poisson.pmf(z, 2)
    mix = 0.5 * (p1 + p2)
    return 0.5 * np.sum(p1 * np.log(p1 / mix)) + 0.5 * np.sum(p2 * np.log(p2 / mix))


# priors -----------------------------------------------------------------------


def test_default_prior_examples():
    assert default_prior(1, 1).pmf.tolist() == [1.0]
    assert 1.96 <= default_prior(2, 40, shape=0.5).mean <= 2.04
    assert np.allclose(uniform_prior(5).pmf, 0.2)
    with pytest.raises(InfeasibleMean):
        default_prior(5, 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.95))
def test_default_prior_hits_mean(s, frac):
    g = 1 + frac * (s - 1)
    # infinite scale leaves weights x^{-1/2}: the largest mean shape 1/2 can reach
    x = np.arange(1, s + 1)
    ceiling = float(x @ x**-0.5 / np.sum(x**-0.5))
    if g >= ceiling * (1 - 1e-6):
        with pytest.raises(InfeasibleMean):
            default_prior(g, s)
        return
    prior = default_prior(g, s)
    assert prior.mean == pytest.approx(g, rel=1e-6)
    assert prior.pmf.sum() == pytest.approx(1.0)


def test_prior_csv(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("0.25\n0.75\n")
    prior = read_prior_csv(path)
    assert prior.s == 2 and prior.mean == pytest.approx(1.75)
    with pytest.raises(ValueError):
        InputPrior(np.array([0.5, 0.6]))


# marginal and density --------------------------------------------------------


def test_mixture_marginal():
    marg = enumerate_marginal(uniform_prior(2), ONE, CFG1)
    z = np.arange(marg.z_cap + 1)
    expected = 0.5 * stats.poisson.pmf(z, 1) + 0.5 * stats.poisson.pmf(z, 2)
    assert np.allclose(np.exp(marg.logp[0]), expected, atol=1e-15)


def test_point_mass_marginal_equals_conditional():
    w = make_family(KernelFamily.general_substitution(2, 0.1))
    cfg = ChannelConfig(2, 2, 2, 2)
    marg = enumerate_marginal(point_mass_prior(3), w, cfg)
    z = np.array([[0, 1], [4, 2], [3, 3]])
    assert np.allclose(info_density(np.full((3, 2), 3.0), z, marg, w, cfg), 0.0, atol=1e-12)


def test_full_joint_mass():
    w = make_family(KernelFamily.general_substitution(2, 0.2))
    cfg = ChannelConfig(2, 2, 1, 2)
    marg = enumerate_marginal(uniform_prior(2), w, cfg, joint_mode="full_joint")
    grid = np.array([(a, b) for a in range(marg.z_cap + 1) for b in range(marg.z_cap + 1)])
    mass = np.exp(marg.log_joint(grid)).sum()
    assert abs(mass - 1.0) <= marg.tail.sum() + 1e-9


def test_mixture_density_value():
    marg = enumerate_marginal(uniform_prior(2), ONE, CFG1)
    expected = -2 - math.log(0.5 * math.exp(-1) + 0.5 * math.exp(-2))
    assert info_density([2], [0], marg, ONE, CFG1) == pytest.approx(expected, abs=1e-12)
    assert info_density([2], [0], marg, ONE, CFG1) == pytest.approx(-0.6201, abs=1e-4)
    assert info_density([2], [2], marg, ONE, CFG1) > 0


def test_density_truncation():
    marg = enumerate_marginal(uniform_prior(2), ONE, CFG1, z_cap=5, joint_mode="product_of_marginals")
    with pytest.raises(TruncationExceeded):
        info_density([1], [6], marg, ONE, CFG1)


def test_joint_state_cap():
    w = new_kernel(np.eye(8))
    with pytest.raises(StateSpaceTooLarge):
        enumerate_marginal(uniform_prior(6), w, ChannelConfig(8, 8, 1, 1), joint_mode="full_joint")


# mutual information ----------------------------------------------------------


def test_point_mass_mi_is_zero():
    est = mc_mutual_information(point_mass_prior(2), ONE, CFG1, trials=1000, seed=1)
    assert est.value == pytest.approx(0.0, abs=1e-12) and est.stderr == pytest.approx(0.0, abs=1e-12)


def test_mixture_mi_exact_and_mc():
    oracle = mixture_mi_oracle()
    exact = exact_mutual_information(uniform_prior(2), ONE, CFG1)
    assert exact.value == pytest.approx(oracle, abs=1e-12)
    est = mc_mutual_information(uniform_prior(2), ONE, CFG1, trials=10**5, seed=11)
    assert abs(est.value - oracle) <= 3 * est.stderr


def test_identity_pair_mc_matches_exact():
    w = new_kernel(np.eye(2))
    cfg = ChannelConfig(2, 2, 1, 1)
    exact = exact_mutual_information(uniform_prior(2), w, cfg)
    est = mc_mutual_information(uniform_prior(2), w, cfg, trials=10**5, seed=12)
    assert exact.value >= -1e-12
    assert abs(est.value - exact.value) <= 3 * est.stderr
    # identity kernel decouples coordinates: twice the single-letter value
    assert exact.value == pytest.approx(2 * mixture_mi_oracle(), abs=1e-10)


# Lipschitz -------------------------------------------------------------------


def test_lipschitz_point_mass_zero():
    marg = enumerate_marginal(point_mass_prior(2), ONE, CFG1)
    assert lipschitz_seminorm_bruteforce([2], marg, ONE, CFG1) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("label,w,cfg,prior", tiny_instances(), ids=lambda v: v if isinstance(v, str) else "")
def test_log_ratios_two_sided(label, w, cfg, prior):
    marg = enumerate_marginal(prior, w, cfg)
    beta = math.log(prior.s) - math.log(well_conditioned_report(w).tau_achieved)
    for v in prior.values:
        r = one_step_log_ratios(np.full(cfg.n, float(v)), marg, w, cfg)
        assert np.all(np.abs(r) <= beta + 1e-9)


def test_lipschitz_grows_with_support():
    w = make_family(KernelFamily.general_substitution(2, 0.1))
    cfg = ChannelConfig(2, 2, 2, 3)
    values = []
    for s in (2, 4, 8):
        prior = uniform_prior(s)
        marg = enumerate_marginal(prior, w, cfg)
        values.append(lipschitz_seminorm_bruteforce(None, marg, w, cfg, prior=prior))
    assert values == sorted(values)


# gradient and convexity -------------------------------------------------------


def test_gradient_identity_and_substitution():
    ident = new_kernel(np.eye(3))
    rep = gradient_bound_check(ident, ChannelConfig(3, 3, 2, 3), eta=0.0, s_n=5)
    assert rep.exact_bound_holds and rep.max_fd_error < 1e-5
    sub = make_family(KernelFamily.general_substitution(4, 0.1))
    rep = gradient_bound_check(sub, ChannelConfig(4, 4, 2, 2), eta=0.0, s_n=6)
    assert rep.exact_bound_holds


def test_gradient_boundary_points():
    sub = make_family(KernelFamily.general_substitution(2, 0.2))
    pts = np.array([[1.0, 5.0], [5.0, 5.0], [1.0, 1.0]])
    rep = gradient_bound_check(sub, ChannelConfig(2, 2, 2, 2), eta=0.0, s_n=5, x_points=pts)
    assert rep.points == 3 and rep.exact_bound_holds


def test_gradient_column_bound():
    eras = make_family(KernelFamily.dna_erasure(0.1))
    with pytest.raises(ColumnBoundViolated):
        gradient_bound_check(eras, ChannelConfig(4, 5, 2, 2), eta=0.1)
    eta = well_conditioned_report(eras).eta_achieved
    assert gradient_bound_check(eras, ChannelConfig(4, 5, 2, 2), eta=eta).exact_bound_holds


def test_convexity_examples():
    lam, eps = 2.0, 1e-3
    rep = convexity_probe(ONE, CFG1, x_points=[[lam]], d_points=[[1.0]], eps=eps)
    assert rep.max_second_difference <= -math.exp(-lam) / lam * eps**2 * 0.99
    axis = np.eye(3)
    w = make_family(KernelFamily.general_substitution(3, 0.2))
    cfg = ChannelConfig(3, 3, 2, 2)
    assert convexity_probe(w, cfg, x_points=np.full((3, 3), 2.0), d_points=axis).passes
    zero = convexity_probe(w, cfg, x_points=[[2.0, 3.0, 1.5]], d_points=[[0.0, 0.0, 0.0]])
    assert zero.max_second_difference == 0.0


@pytest.mark.parametrize("label,w,cfg,prior", tiny_instances()[::4], ids=lambda v: v if isinstance(v, str) else "")
def test_convexity_random_lines(label, w, cfg, prior):
    assert convexity_probe(w, cfg, directions=200, seed=3, s_n=prior.s).passes


# concentration ---------------------------------------------------------------


def test_exponent_helpers():
    assert bobkov_ledoux_exponent(0.1, 0.0, 3.0) == math.inf
    assert bobkov_ledoux_exponent(0.2, 1.0, 1.0) == pytest.approx(0.04 / 16.6)
    assert talagrand_exponent(0.1, 1, 0.5, 1.0, 3) is None


def test_concentration_point_mass():
    rep = concentration_experiment(point_mass_prior(2), ONE, CFG1, trials=2000, seed=1)
    assert all(t == 0 for t in rep.empirical_tail) and rep.passes


@pytest.mark.parametrize("kernel", [np.eye(2), [[0.9, 0.1], [0.1, 0.9]]], ids=["identity", "substitution"])
def test_concentration_below_bound(kernel):
    w = new_kernel(kernel)
    cfg = ChannelConfig(2, 2, 1.5, 1.5)
    rep = concentration_experiment(uniform_prior(3), w, cfg, trials=10**5, delta_grid=(0.1, 0.2, 0.5), seed=5)
    assert rep.passes
    assert all(lo <= b for lo, b in zip(rep.wilson_lower, rep.bound_bl))
    assert rep.beta_lip_measured <= rep.beta_lip_bound + 1e-9
