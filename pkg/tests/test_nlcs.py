import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from confined_nlcs import (DeformationFunction, DomainError, TruncationError, build_deformed,
                           build_ladder, build_nlcs, derive_params, expectation, gen_bessel_I,
                           generalized_factorial, identity_moment_check, identity_moment_closed_form,
                           mandel_parameter, normalization_sq, normalization_sq_bessel,
                           photon_distribution, quadrature_variance, squeeze_S_deformed, squeeze_s)
from confined_nlcs.nlcs import deformed_commutator_mean, log_generalized_factorial, number_moments

import oracles

# frozen from oracles.mandel / oracles.squeeze_s / oracles.identity_moment_* (40 digits)
MANDEL_ORACLE = {
    (1.0, 1.0): -0.087948294234024457,
    (0.5, 1.0): -0.048465090834178248,
    (4.0, 1.0): -0.22397696365497932,
    (0.5, 10.0): -0.0058433156814284001,
    (1.0, 0.3): -0.011843683082267606,
    (4.0, 2.5): -0.2148517372372821,
}
SQUEEZE_ORACLE = {  # |beta|^2 = 4, (a_l, phi in degrees) -> s
    (2.5, 0): -0.2104572953680526, (2.5, 45): 0.030444008719323081, (2.5, 90): 0.27134531280669876,
    (1.0, 0): -0.21344516890296508, (1.0, 45): 0.035212676528724006, (1.0, 90): 0.2838705219604131,
    (0.5, 0): -0.10739033843663975, (0.5, 45): 0.0070476488598743678, (0.5, 90): 0.12148563615638849,
}
MOMENT_ORACLE_A1 = {0: 7.7018346610920144, 1: 17.181568621852743, 2: 33.254641060836552,
                    5: 219.6634472155742}
MOMENT_ORACLE_FREE = {0: 4.7123889803846899, 1: 7.0685834705770348, 5: 12.756584232056992,
                      10: 17.436489970835713}

FREE = DeformationFunction.identity()


def state(beta_sq, a, phase=0.0):
    return build_nlcs(math.sqrt(beta_sq) * cmath.exp(1j * phase), derive_params(a))


# generalized factorial -------------------------------------------------------

def test_generalized_factorial_examples():
    p = derive_params(1.0)
    assert generalized_factorial(0, p) == 1.0
    assert all(generalized_factorial(n, FREE) == 1.0 for n in range(40))
    one = DeformationFunction(1.0, 1.0)
    for n in range(25):
        assert generalized_factorial(n, one) == pytest.approx(math.factorial(n + 1), rel=1e-13)
    with pytest.raises(DomainError):
        generalized_factorial(-1, p)


def test_generalized_factorial_log_space():
    p = derive_params(0.6)
    direct = 1.0
    for n in range(1, 80):
        direct *= p.gamma_prime * n + p.eta
        assert generalized_factorial(n, p) == pytest.approx(direct, rel=1e-12)
    assert log_generalized_factorial(500, p) == pytest.approx(
        sum(math.log(p.gamma_prime * j + p.eta) for j in range(1, 501)), rel=1e-13)


# state construction -----------------------------------------------------------

def test_vacuum():
    s = build_nlcs(0.0, derive_params(1.0))
    np.testing.assert_array_equal(s.coeffs, [1.0, 0.0])
    assert s.tail_bound == 0.0


@pytest.mark.parametrize("beta", [0.3, 1.0 + 1.0j, -2.0, 3.0j])
def test_free_limit_is_glauber_state(beta):
    s = build_nlcs(beta, FREE)
    n = np.arange(s.trunc_dim)
    expected = np.exp(-abs(beta) ** 2 / 2) * beta**n / np.sqrt(special.factorial(n))
    np.testing.assert_allclose(s.coeffs, expected, atol=1e-14)


def test_mean_number_two_ways():
    s = state(1.0, 1.0)
    _, _, num = build_ladder(s.trunc_dim)
    series = float(np.sum(np.arange(s.trunc_dim) * photon_distribution(s)))
    engine = expectation(num, s.coeffs).real
    assert series == pytest.approx(engine, abs=1e-12)
    assert series == pytest.approx(number_moments(s)[0], abs=1e-15)


@pytest.mark.parametrize("beta", [float("nan"), complex(1, float("inf"))])
def test_non_finite_beta(beta):
    with pytest.raises(DomainError):
        build_nlcs(beta, derive_params(1.0))


def test_bad_eps_and_cap():
    with pytest.raises(DomainError):
        build_nlcs(1.0, derive_params(1.0), eps_tail=0.0)
    with pytest.raises(TruncationError):
        build_nlcs(100.0, FREE, max_dim=64)


beta_sq_st = st.floats(min_value=0.0, max_value=10.0)
phase_st = st.floats(min_value=-math.pi, max_value=math.pi)
a_st = st.floats(min_value=0.3, max_value=10.0)


@settings(max_examples=150, deadline=None)
@given(beta_sq_st, phase_st, a_st)
def test_state_invariants(beta_sq, phase, a):
    s = state(beta_sq, a, phase)
    d = s.deformation
    assert abs(np.sum(np.abs(s.coeffs) ** 2) - 1.0) < 1e-12
    assert s.tail_bound < s.eps_tail
    # successive coefficient ratios follow the closed form
    n = np.arange(1, s.trunc_dim)
    nz = np.abs(s.coeffs[:-1]) > 1e-150
    ratio = s.coeffs[1:][nz] / s.coeffs[:-1][nz]
    expected = s.beta / np.sqrt(n * (d.gamma_prime * n + d.eta))
    np.testing.assert_allclose(ratio, expected[nz], rtol=1e-10)
    # eigenvector of A, edge row included
    A, _ = build_deformed(s.trunc_dim, d)
    resid = np.linalg.norm(A @ s.coeffs - s.beta * s.coeffs) / (1 + abs(s.beta))
    assert resid <= math.sqrt(s.eps_tail)
    # on the valid block the relation is exact up to rounding
    valid = (A @ s.coeffs - s.beta * s.coeffs)[:-1]
    assert np.linalg.norm(valid) <= 1e-13 * (1 + abs(s.beta))


def test_truncation_is_minimal():
    s = state(4.0, 1.0)
    smaller = build_nlcs(2.0, derive_params(1.0), eps_tail=1e-6)
    assert smaller.trunc_dim < s.trunc_dim


# generalized Bessel series ---------------------------------------------------

def test_gen_bessel_at_zero_and_domain():
    assert gen_bessel_I(1.3, 0.4, 0.0) == 0.0
    with pytest.raises(DomainError):
        gen_bessel_I(1.0, 0.0, -1.0)


@pytest.mark.parametrize("eta,gp,x", [(1.0, 0.0, 2.0), (1.5880859697781755, 1.2337005501361697, 3.0),
                                      (2.5, 0.3, 10.0), (1.0, 1.0, 0.5)])
def test_gen_bessel_against_mpmath(eta, gp, x):
    assert gen_bessel_I(eta, gp, x) == pytest.approx(float(oracles.gen_bessel_I(eta, gp, x)), rel=1e-13)


def test_gen_bessel_relation_to_standard_bessel():
    # with g(s) = prod (gamma' j + eta) the standard I_eta appears at gamma' = 1:
    # I_eta^{1}(x) = Gamma(eta + 1) I_eta(x)
    for x in (1.0, 2.0, 4.0):
        assert gen_bessel_I(1.0, 1.0, x) / special.iv(1, x) == pytest.approx(1.0, rel=1e-13)
        assert gen_bessel_I(2.5, 1.0, x) / special.iv(2.5, x) == pytest.approx(special.gamma(3.5), rel=1e-13)
    # at gamma' = 0 the series sums to (x/2)^eta exp(x^2/4); its ratio to I_1 is not constant
    ratios = []
    for x in (1.0, 2.0, 4.0):
        assert gen_bessel_I(1.0, 0.0, x) == pytest.approx(x / 2 * math.exp(x * x / 4), rel=1e-13)
        ratios.append(gen_bessel_I(1.0, 0.0, x) / special.iv(1, x))
    assert ratios[2] / ratios[0] > 2


@pytest.mark.parametrize("beta", [0.2, 0.7j, 1.0, 1.5 - 1.0j, 3.0])
@pytest.mark.parametrize("a", [0.3, 0.8, 1.5, 4.0, 10.0])
def test_normalization_bessel_equals_direct(beta, a):
    p = derive_params(a)
    direct = normalization_sq(beta, p)
    assert normalization_sq_bessel(beta, p) == pytest.approx(direct, rel=1e-10)
    # and both agree with the coefficient of |0> of the built state
    assert abs(build_nlcs(beta, p).coeffs[0]) ** 2 == pytest.approx(direct, rel=1e-12)


# photon statistics ----------------------------------------------------------

def test_photon_distribution_examples():
    assert photon_distribution(build_nlcs(0, derive_params(2.0)))[0] == 1.0
    s = build_nlcs(1.7, FREE)
    P = photon_distribution(s)
    np.testing.assert_allclose(P, stats.poisson.pmf(np.arange(P.size), 1.7**2), atol=1e-15)
    p = derive_params(1.0)
    P = photon_distribution(build_nlcs(1.0, p))
    assert P[0] / P[1] == pytest.approx(p.gamma_prime + p.eta, rel=1e-13)
    assert P.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("key", sorted(MANDEL_ORACLE))
def test_mandel_against_oracle(key):
    beta_sq, a = key
    assert mandel_parameter(state(beta_sq, a)) == pytest.approx(MANDEL_ORACLE[key], abs=1e-12)


def test_mandel_limits():
    assert mandel_parameter(build_nlcs(0.0, derive_params(1.0))) == 0.0
    for b in (0.1, 1.0, 2.5 + 1j):
        assert mandel_parameter(build_nlcs(b, FREE)) == pytest.approx(0.0, abs=1e-12)


def test_mandel_small_beta_is_continuous():
    p = derive_params(1.0)
    values = [mandel_parameter(build_nlcs(math.sqrt(x), p)) for x in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(abs(b) < abs(a) for a, b in zip(values, values[1:]))
    assert abs(values[-1]) < 1e-7


@pytest.mark.parametrize("beta_sq", [0.5, 1.0, 1.5, 4.0])
def test_sub_poissonian(beta_sq):
    for a in np.linspace(0.3, 4.0, 15):
        assert mandel_parameter(state(beta_sq, a)) < 0


def test_mandel_ordering_in_beta():
    assert abs(mandel_parameter(state(0.5, 1.0))) < abs(mandel_parameter(state(4.0, 1.0)))


def test_mandel_recovers_poisson_for_wide_well():
    tail = [abs(mandel_parameter(state(1.0, a))) for a in (3, 5, 10, 20, 50, 200)]
    assert all(b < a for a, b in zip(tail, tail[1:]))
    assert tail[-1] < 1e-4


# quadratures ----------------------------------------------------------------

def test_vacuum_variance():
    vac = build_nlcs(0.0, derive_params(1.0))
    for phi in (0.0, 0.3, math.pi / 2):
        assert quadrature_variance(vac, phi) == pytest.approx(0.25, abs=1e-15)
        assert squeeze_s(vac, phi) == pytest.approx(0.0, abs=1e-15)
        assert squeeze_S_deformed(vac, phi) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("beta", [0.5, 1.0 + 1.0j, 2.0])
def test_coherent_state_is_minimum_uncertainty(beta):
    s = build_nlcs(beta, FREE)
    for phi in np.linspace(0, math.pi, 7):
        assert quadrature_variance(s, phi) == pytest.approx(0.25, abs=1e-12)
        assert squeeze_s(s, phi) == pytest.approx(0.0, abs=1e-12)
        assert squeeze_S_deformed(s, phi) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("key", sorted(SQUEEZE_ORACLE))
def test_squeeze_against_oracle(key):
    a, phi_deg = key
    assert squeeze_s(state(4.0, a), math.radians(phi_deg)) == pytest.approx(SQUEEZE_ORACLE[key], abs=1e-11)


@pytest.mark.parametrize("beta_sq,a", [(1.0, 0.5), (4.0, 1.0), (2.5, 3.0), (10.0, 0.3)])
def test_deformed_variance_identity(beta_sq, a):
    s = state(beta_sq, a, phase=0.4)
    quarter_comm = 0.25 * deformed_commutator_mean(s)
    n = np.arange(s.trunc_dim)
    d = s.deformation
    direct = 0.25 * float(photon_distribution(s) @ (d.gamma_prime * (2 * n + 1) + d.eta))
    assert quarter_comm == pytest.approx(direct, rel=1e-13)
    for phi in np.linspace(0, 2 * math.pi, 13):
        var = quadrature_variance(s, phi, deformed=True)
        assert abs(4 * var - 4 * quarter_comm) < 1e-9
        assert abs(squeeze_S_deformed(s, phi)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(beta_sq_st, phase_st, a_st, st.floats(min_value=0, max_value=2 * math.pi), st.booleans())
def test_phase_pi_covariance(beta_sq, phase, a, phi, deformed):
    s = state(beta_sq, a, phase)
    v0 = quadrature_variance(s, phi, deformed)
    v1 = quadrature_variance(s, phi + math.pi, deformed)
    assert abs(v0 - v1) <= 1e-12 * max(1.0, abs(v0))


@settings(max_examples=60, deadline=None)
@given(beta_sq_st, a_st, st.floats(min_value=0, max_value=math.pi))
def test_uncertainty_pair(beta_sq, a, phi):
    # Y at phi is X at phi - pi/2; the pair obeys Var X + Var Y = <n> - |<a>|^2 + 1/2 >= 1/2
    s = state(beta_sq, a)
    vx = quadrature_variance(s, phi)
    vy = quadrature_variance(s, phi - math.pi / 2)
    assert vx * vy >= 1 / 16 - 1e-12
    assert squeeze_s(s, phi) + squeeze_s(s, phi - math.pi / 2) >= -1e-12


# resolution of identity -------------------------------------------------------

def test_identity_moments_against_mpmath():
    rep = identity_moment_check(derive_params(1.0), 5)
    for n, ref in MOMENT_ORACLE_A1.items():
        assert rep.moments[n] == pytest.approx(ref, rel=1e-9)
        assert rep.closed_form[n] == pytest.approx(ref, rel=1e-12)
    assert all(rep.converged)
    assert rep.alpha == rep.eta and rep.alpha_interpretation == "eta"


def test_identity_moments_free_case():
    rep = identity_moment_check(FREE, 10)
    for n, ref in MOMENT_ORACLE_FREE.items():
        assert rep.moments[n] == pytest.approx(ref, rel=1e-9)
    # the measure as written gives 4 Gamma(n+3/2) Gamma(5/2) / n!, not 1
    for n in range(11):
        assert rep.closed_form[n] == pytest.approx(
            4 * special.gamma(n + 1.5) * special.gamma(2.5) / math.factorial(n), rel=1e-12)
    assert min(rep.deviations) > 1.0


def test_identity_n0_two_paths():
    p = derive_params(1.0)
    rep = identity_moment_check(p, 1)
    assert rep.moments[0] == pytest.approx(identity_moment_closed_form(0, p), rel=1e-8)


def test_identity_alpha_user_value():
    p = derive_params(2.0)
    rep = identity_moment_check(p, 3, alpha=0.5)
    assert rep.alpha_interpretation == "user-value" and rep.alpha == 0.5
    for n in range(4):
        ref = oracles.identity_moment_gamma(n, oracles.params(2.0)[1], oracles.params(2.0)[2], 0.5)
        assert rep.moments[n] == pytest.approx(float(ref), rel=1e-8)
    # alpha = 2 makes the gamma' = 0 moments constant (= 8)
    rep = identity_moment_check(FREE, 6, alpha=2.0)
    np.testing.assert_allclose(rep.closed_form, 8.0, rtol=1e-12)
    np.testing.assert_allclose(rep.moments, 8.0, rtol=1e-9)


def test_identity_divergent_alpha_is_flagged():
    rep = identity_moment_check(FREE, 1, alpha=10.0)
    # 1 - alpha/2 + n + 3/2 <= 0 for n = 0 and 1: the moment integral diverges
    assert rep.closed_form[0] == math.inf
    assert not rep.converged[0]


def test_identity_report_serializes():
    rep = identity_moment_check(derive_params(1.0), 2)
    doc = json.loads(rep.to_json())
    assert doc["alpha_interpretation"] == "eta"
    assert [r["n"] for r in doc["moments"]] == [0, 1, 2]
    assert all(r["moment"] > 0 and math.isfinite(r["moment"]) for r in doc["moments"])
    with pytest.raises(DomainError):
        identity_moment_check(FREE, 0)
