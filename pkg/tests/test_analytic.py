import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar
from scipy.stats import poisson

from cuckoothresh.analytic import (core_fractions, core_objective, core_xi, entropy_H, f_beta_q,
                                   f_critical, h_beta, lambda2, lambda2_argmin,
                                   largest_fixed_point_xbar, rate_function, rate_I, solve_Tz,
                                   solve_xi_star, threshold_c_star, truncated_poisson_mean)

# 40-digit mpmath roots of the core balance 1 - e^-x - x e^-x = x (1 - e^-x) / k
XI_STAR_MP = {
    3: 2.1491257999070625421,
    4: 3.5935119694474260823,
    5: 4.8010075497225178434,
    6: 5.9030000589489438105,
    10: 9.9954411338148427414,
    20: 19.999999175537903575,
}
C_STAR_MP = {
    3: 0.91793527665808601352,
    4: 0.97677016487804613156,
    5: 0.99243839126210062666,
    6: 0.99737955277867234803,
}
LAMBDA2_MP = {3: (1.256431208626169677, 2.4554074822841279494),
              4: (1.9038136944403834847, 3.089119359210033745)}


def mean_map(x):
    return x * (math.exp(x) - 1) / (math.exp(x) - 1 - x)


# --- xi*, c_k* -------------------------------------------------------------

@pytest.mark.parametrize("k", sorted(XI_STAR_MP))
def test_xi_star_matches_high_precision_oracle(k):
    xi = solve_xi_star(k)
    assert xi == pytest.approx(XI_STAR_MP[k], abs=1e-9)
    assert abs(k - mean_map(xi)) <= 1e-10


def test_xi_star_k3_value():
    assert solve_xi_star(3) == pytest.approx(2.14913, abs=1e-5)


def test_xi_star_k10_between_k_minus_1_and_k():
    assert mean_map(9) < 10 < mean_map(10)
    xi = solve_xi_star(10)
    assert 9 < xi < 10
    assert abs(10 - mean_map(xi)) <= 1e-10


@pytest.mark.parametrize("k", [2, 1, 0])
def test_xi_star_rejects_small_k(k):
    with pytest.raises(ValueError, match="k = 2"):
        solve_xi_star(k)


@pytest.mark.parametrize("k,lo,hi", [(3, 0.917, 0.918), (4, 0.976, 0.977), (5, 0.992, 0.993)])
def test_threshold_truncated_digits(k, lo, hi):
    sol = threshold_c_star(k)
    assert lo <= sol.c_star < hi
    assert sol.c_star == pytest.approx(C_STAR_MP[k], abs=1e-11)


def test_threshold_k2_is_half_limit_case():
    sol = threshold_c_star(2)
    assert sol.c_star == 0.5
    assert sol.xi_star == 0.0 and sol.limit_case
    # same formula as xi -> 0+: xi / (2 (1 - e^-xi)) -> 1/2
    assert core_objective(1e-8, 2) / 2 == pytest.approx(0.5, abs=1e-8)


def test_threshold_rejects_k_below_2():
    with pytest.raises(ValueError):
        threshold_c_star(1)


def test_threshold_solution_invariants():
    prev = 0.0
    for k in range(2, 21):
        sol = threshold_c_star(k)
        assert 0.5 <= sol.c_star < 1
        assert sol.c_star > prev
        prev = sol.c_star
        if k >= 3:
            assert sol.residual <= 1e-10
            assert sol.c_star == pytest.approx(
                sol.xi_star / (k * (1 - math.exp(-sol.xi_star)) ** (k - 1)), rel=1e-14)


@pytest.mark.parametrize("k", range(8, 21))
def test_asymptotic_exponential_approach(k):
    c = threshold_c_star(k).c_star
    assert abs(c - (1 - math.exp(-k))) <= math.exp(-k)


# --- lambda2, xbar, core fractions -----------------------------------------

@pytest.mark.parametrize("k", [3, 4])
def test_lambda2_against_golden_section(k):
    golden = minimize_scalar(lambda x: core_objective(x, k), bracket=(0.5, 1.5, 20.0),
                             method="golden", tol=1e-12)
    assert lambda2(k) == pytest.approx(golden.fun, rel=1e-12)
    arg, val = LAMBDA2_MP[k]
    assert lambda2_argmin(k) == pytest.approx(arg, abs=1e-9)
    assert lambda2(k) == pytest.approx(val, abs=1e-12)


def test_lambda2_is_local_min_and_below_threshold_load():
    x = lambda2_argmin(3)
    v = lambda2(3)
    assert v <= core_objective(x - 1e-4, 3)
    assert v <= core_objective(x + 1e-4, 3)
    assert v <= 3 * threshold_c_star(3).c_star
    assert 0 < lambda2(4) < math.inf


def test_xbar_at_threshold_recovers_xi_star():
    sol = threshold_c_star(3)
    xbar = largest_fixed_point_xbar(sol.c_star, 3)
    assert xbar * sol.c_star * 3 == pytest.approx(sol.xi_star, abs=1e-6)


def test_xbar_empty_core_regime():
    assert 0.3 < lambda2(3)
    assert largest_fixed_point_xbar(0.1, 3) == 0.0


def test_xbar_is_a_fixed_point():
    for c in (0.85, 0.9, 0.95, 1.2):
        x = largest_fixed_point_xbar(c, 3)
        assert abs(x - (1 - math.exp(-x * c * 3)) ** 2) <= 1e-9


def test_xi_increasing_in_load():
    k = 3
    c0 = lambda2(k) / k
    grid = np.linspace(c0 + 1e-3, 1.5, 50)
    xis = [core_xi(c, k) for c in grid]
    assert all(b > a for a, b in zip(xis, xis[1:]))


@pytest.mark.parametrize("k", range(3, 11))
def test_core_fractions_balance_at_threshold(k):
    v, e = core_fractions(threshold_c_star(k).c_star, k)
    assert v == pytest.approx(e, abs=1e-8)


def test_core_fractions_limits():
    assert core_fractions(1e-6, 3) == (0.0, 0.0)
    v, _ = core_fractions(0.917, 3)
    assert v >= 0.63


def test_core_density_crosses_one_at_threshold():
    c_star = threshold_c_star(3).c_star
    v, e = core_fractions(c_star - 0.01, 3)
    assert e / v < 1
    v, e = core_fractions(c_star + 0.01, 3)
    assert e / v > 1


# --- truncated Poisson mean, T_z, I(z) -------------------------------------

def test_truncated_mean_by_summation():
    ell = np.arange(2, 201)
    pmf = poisson.pmf(ell, 2.0)
    oracle = float((ell * pmf).sum() / pmf.sum())
    exact = 2 * (math.e**2 - 1) / (math.e**2 - 3)
    assert truncated_poisson_mean(2.0) == pytest.approx(oracle, rel=1e-12)
    assert truncated_poisson_mean(2.0) == pytest.approx(exact, rel=1e-14)


def test_truncated_mean_small_xi_limit():
    assert truncated_poisson_mean(1e-8) == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("k", [3, 4, 5, 7])
def test_truncated_mean_at_xi_star_is_k(k):
    assert truncated_poisson_mean(solve_xi_star(k)) == pytest.approx(k, abs=1e-9)


@given(st.floats(1e-6, 50.0), st.floats(1e-6, 50.0))
def test_truncated_mean_increasing(a, b):
    if a < b:
        assert truncated_poisson_mean(a) <= truncated_poisson_mean(b)


def test_tz_examples():
    xi = 1.7
    assert solve_Tz(truncated_poisson_mean(xi)) == pytest.approx(xi, abs=1e-8)
    assert solve_Tz(2 + 1e-6) < 0.01
    t = solve_Tz(3.0)
    assert t == pytest.approx(XI_STAR_MP[3], abs=1e-9)
    assert abs(3.0 - mean_map(t)) <= 1e-10


@pytest.mark.parametrize("z", [2.0, 1.5])
def test_tz_domain(z):
    with pytest.raises(ValueError):
        solve_Tz(z)


@given(st.floats(2.0001, 40.0))
@settings(max_examples=60)
def test_tz_back_substitution(z):
    t = solve_Tz(z)
    assert abs(z - truncated_poisson_mean(t)) <= 1e-10 * max(1.0, z)


def test_rate_zero_at_mean():
    xi = solve_xi_star(3)
    assert abs(rate_I(truncated_poisson_mean(xi), xi)) <= 1e-9
    ev = rate_function(3.0, xi)
    assert ev.value == pytest.approx(0.0, abs=1e-9)
    assert ev.t_z == pytest.approx(xi, abs=1e-8)


def test_rate_boundary_closed_form_and_continuity():
    xi = solve_xi_star(3)
    expected = math.log(2) - 2 * math.log(xi) + math.log(math.exp(xi) - xi - 1)
    assert rate_I(2.0, xi) == pytest.approx(expected, rel=1e-14)
    assert rate_I(2 + 1e-7, xi) - rate_I(2.0, xi) <= 1e-4
    assert abs(rate_I(2 + 1e-7, xi) - rate_I(2.0, xi)) <= 1e-4


def test_rate_matches_high_precision_values():
    xi = XI_STAR_MP[3]
    assert rate_I(4.0, xi) == pytest.approx(0.28942785979552928526, abs=1e-10)
    assert rate_I(2.5, xi) == pytest.approx(0.12150983678451914172, abs=1e-10)


def test_rate_is_legendre_transform():
    # I(z) = sup_t [t z - log E e^{t X}] for X ~ 2-truncated Poisson(xi)
    xi = 2.5
    ell = np.arange(2, 400)
    logp = poisson.logpmf(ell, xi)
    logp -= np.log(np.exp(logp).sum())

    def cgf(t):
        a = logp + t * ell
        return float(a.max() + np.log(np.exp(a - a.max()).sum()))

    for z in (2.2, 3.0, 4.5, 6.0):
        res = minimize_scalar(lambda t: -(t * z - cgf(t)), bounds=(-20, 5), method="bounded",
                              options={"xatol": 1e-12})
        assert rate_I(z, xi) == pytest.approx(-res.fun, abs=1e-7)


@pytest.mark.parametrize("k", [3, 4, 5])
def test_rate_nonnegative_and_convex_on_grid(k):
    xi = solve_xi_star(k)
    mu = truncated_poisson_mean(xi)
    zs = np.linspace(2.0, mu, 200)
    vals = np.array([rate_I(z, xi) for z in zs])
    assert vals.min() >= -1e-12
    assert np.diff(vals, 2).min() >= -1e-6


def test_rate_zero_only_at_mean():
    xi = solve_xi_star(4)
    mu = truncated_poisson_mean(xi)
    for z in np.linspace(2.0, 2 * mu, 101):
        if abs(z - mu) > 1e-3:
            assert rate_I(z, xi) > 1e-9


# --- entropy, f, h ---------------------------------------------------------

def test_entropy_values():
    assert entropy_H(0.5) == pytest.approx(math.log(2))
    assert entropy_H(0.0) == 0.0
    assert entropy_H(1.0) == 0.0
    assert entropy_H(0.99) < 0.06
    assert 2 * entropy_H(0.7) < 1.23
    assert entropy_H(0.7) > 0.6


@pytest.mark.parametrize("x", [-0.1, 1.1])
def test_entropy_domain(x):
    with pytest.raises(ValueError):
        entropy_H(x)


def test_f_endpoint_and_claimed_bound():
    xi = solve_xi_star(3)
    assert abs(f_beta_q(1.0, 1.0, 3, xi)) <= 1e-9
    eps = 1e-12
    assert abs(f_beta_q(1 - eps, 1 - eps, 3, xi)) <= 1e-9
    assert f_beta_q(0.7, 0.7, 3, xi) < -0.1
    assert f_beta_q(0.7, 0.7, 3, xi) < -0.6 + 0.3 * math.log(4)


def test_f_compositional_oracle():
    k, beta, q = 3, 0.8, 0.85
    xi = solve_xi_star(k)
    z = k * (1 - q) / (1 - beta)
    expected = (2 * entropy_H(beta) + (1 - beta) * math.log(2**k - k - 1) - k * entropy_H(q)
                - (1 - beta) * rate_I(z, xi))
    assert f_beta_q(beta, q, k, xi) == pytest.approx(expected, rel=1e-14)
    assert math.isfinite(expected)


def test_f_domain_errors():
    xi = solve_xi_star(3)
    with pytest.raises(ValueError, match="below 2"):
        f_beta_q(0.7, 0.95, 3, xi)
    with pytest.raises(ValueError):
        f_beta_q(0.7, 0.6, 3, xi)


def test_f_critical_equals_f_at_stationary_point():
    # Locate q0 with d f / d q = 0 numerically and compare both forms.
    k, beta = 4, 0.8
    xi = solve_xi_star(k)
    q_hi = 1 - 2 * (1 - beta) / k
    res = minimize_scalar(lambda q: -f_beta_q(beta, q, k, xi), bounds=(beta, q_hi - 1e-9),
                          method="bounded", options={"xatol": 1e-12})
    q0 = res.x
    assert beta < q0 < q_hi - 1e-6
    assert f_critical(beta, q0, k, xi) == pytest.approx(f_beta_q(beta, q0, k, xi), abs=1e-7)


def test_h_is_f_critical_at_largest_q0():
    for k in (3, 5, 8):
        xi = solve_xi_star(k)
        for beta in (0.7, 0.85, 0.99):
            q0 = 1 - 2 * (1 - beta) / k
            assert h_beta(beta, k, xi) == pytest.approx(f_critical(beta, q0, k, xi), abs=1e-12)


@pytest.mark.parametrize("k,bound", [(3, -0.02), (4, -0.11), (5, -0.2), (6, -0.3)])
def test_h_table_bounds(k, bound):
    assert h_beta(0.7, k, solve_xi_star(k)) <= bound + 5e-3


@pytest.mark.parametrize("k", range(3, 15))
def test_h_negative_at_0_7_for_all_k(k):
    assert h_beta(0.7, k, solve_xi_star(k)) < -0.02


@pytest.mark.parametrize("k", range(3, 9))
def test_h_endpoint_and_convexity(k):
    xi = solve_xi_star(k)
    assert abs(h_beta(1.0, k, xi)) <= 1e-9
    betas = np.linspace(0.7, 1.0, 301)
    vals = np.array([h_beta(b, k, xi) for b in betas])
    assert np.diff(vals, 2).min() > 0


@pytest.mark.parametrize("k", range(3, 9))
def test_f_critical_increasing_in_q0(k):
    xi = solve_xi_star(k)
    for beta in np.linspace(0.7, 0.99, 12):
        q0 = np.linspace(beta, 1 - 2 * (1 - beta) / k, 60)
        vals = np.array([f_critical(beta, q, k, xi) for q in q0])
        assert np.diff(vals).min() > 0


def test_h_domain_error():
    with pytest.raises(ValueError, match="nonpositive"):
        h_beta(0.7, 3, 20.0)
