from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from compnoma.analytic import (
    QuadratureError, QuadratureSpec, assoc_probs, case_coverage, conditional_pdf, coverage_comp,
    coverage_noncomp, coverage_sum, coverage_tu, gamma_match, joint_pdf, laplace_kernel,
    nearest_cdf, nearest_pdf, rate_totals,
)
from compnoma.analytic.field import field_for
from compnoma.assoc import ClassKind
from compnoma.netmodel import LinkType, NetworkConfig
from compnoma.pointfield import sample_realization
from compnoma.sirlab import Scheme

CFG = NetworkConfig()
L, N = LinkType.LOS, LinkType.NLOS
EXC = {L: 120.0, N: 300.0}


# -- Laplace kernel ---------------------------------------------------------

@pytest.mark.parametrize("s", [1e8, 1e10])
def test_derivatives_match_finite_differences(s):
    k = laplace_kernel(s, EXC, 7, CFG)
    h = 1e-4 * s
    kp = laplace_kernel(s + h, EXC, 7, CFG)
    km = laplace_kernel(s - h, EXC, 7, CFG)
    fd = (kp.mu_derivs[:5] - km.mu_derivs[:5]) / (2 * h)
    assert np.all(np.abs(fd / k.mu_derivs[1:6] - 1) < 1e-4)
    # mu = -int C with C increasing in s, so mu^(j) has sign (-1)^j
    assert np.all(np.sign(k.mu_derivs[1:]) == (-1.0) ** np.arange(1, 7))


def test_k1_identity_and_zero_s():
    k = laplace_kernel(3e9, EXC, 4, CFG)
    assert coverage_sum(k, K=1) == np.exp(k.mu_derivs[0])
    assert coverage_sum(k, K=1) == k.L
    sums = [coverage_sum(k, K=j) for j in range(1, 5)]
    assert np.all(np.diff(sums) > 0) and sums[-1] <= 1
    z = laplace_kernel(0.0, EXC, 3, CFG)
    assert z.L == 1.0 and np.all(np.isfinite(z.mu_derivs))
    with pytest.raises(ValueError):
        coverage_sum(k, K=5)


def _mc_interference(n=3000, seed=8):
    I = np.empty(n)
    for i in range(n):
        R = sample_realization(CFG, seed, i)
        keep = np.where(R.los, R.z > EXC[L], R.z > EXC[N])
        eta = np.where(R.los, CFG.eta_L, CFG.eta_N)
        a = np.where(R.los, CFG.alpha_L, CFG.alpha_N)
        I[i] = np.sum((eta * R.r ** -a * R.fading_au)[keep])
    return I


@pytest.fixture(scope="module")
def interference():
    return _mc_interference()


def test_laplace_matches_mc(interference):
    # MC interference stops at the window edge, so compare the window-truncated exponent
    for s in (3e8, 3e9, 3e10):
        k = laplace_kernel(s, EXC, 1, CFG, outer=CFG.sim_radius)
        assert abs(k.L - np.mean(np.exp(-s * interference))) < 0.01


def _mu_quad(s, outer=np.inf):
    from compnoma.netmodel import los_probability, nlos_probability
    tot = 0.0
    for v, p in ((L, los_probability), (N, nlos_probability)):
        eta, a, m = CFG.link_params(v)
        f = lambda z: -np.expm1(-m * np.log1p(s * eta * (z * z + CFG.dh_u ** 2) ** (-a / 2) / m)) \
            * 2 * np.pi * CFG.lambda_b * z * p(z, CFG)
        # integrate in log z, panel by panel
        g = lambda u: f(np.exp(u)) * np.exp(u)
        edges = np.log(EXC[v]) + np.arange(0, 40)
        edges = edges[edges < np.log(outer)].tolist() + ([np.log(outer)] if np.isfinite(outer) else [])
        for u0, u1 in zip(edges[:-1], edges[1:]):
            tot += integrate.quad(g, u0, u1, epsabs=0, epsrel=1e-12, limit=200)[0]
    return -tot


@pytest.mark.parametrize("s", [1e8, 3e10])
def test_exponent_matches_adaptive_quadrature(s):
    # log-spaced panels out to e^39 times the exclusion radius, far beyond any relevance
    assert laplace_kernel(s, EXC, 1, CFG).mu_derivs[0] == pytest.approx(_mu_quad(s), rel=1e-6)
    w = laplace_kernel(s, EXC, 1, CFG, outer=4000.0).mu_derivs[0]
    assert w == pytest.approx(_mu_quad(s, 4000.0), rel=1e-6)


def test_coverage_sum_matches_gamma_tail(interference):
    # sum_{k<K} (-s)^k/k! L^(k)(s) = E[P(Gamma(K,1) > s I)]
    for s in (3e9, 3e10):
        for K in (2, 4):
            k = laplace_kernel(s, EXC, K, CFG, outer=CFG.sim_radius)
            mc = np.mean(special.gammaincc(K, s * interference))
            assert abs(coverage_sum(k) - mc) < 0.01


def test_gamma_match_examples():
    g = gamma_match(2e-9, 2e-9, 3)
    assert g.K_exact == pytest.approx(6.0, rel=1e-12)
    assert g.Theta_scale == pytest.approx(2e-9 / 3, rel=1e-12)
    assert gamma_match(2.0, 1.0, 3).K_exact == pytest.approx(5.4, rel=1e-12)
    assert gamma_match(2.0, 1.0, (3, 1)).K_shape == 4
    with pytest.raises(ValueError):
        gamma_match(0.0, 1.0, 1)


@settings(max_examples=200, deadline=None)
@given(z0=st.floats(1e-15, 1e-3), z1=st.floats(1e-15, 1e-3), m0=st.integers(1, 5), m1=st.integers(1, 5))
def test_gamma_match_moments(z0, z1, m0, m1):
    g = gamma_match(z0, z1, (m0, m1))
    mean, var = z0 + z1, z0 ** 2 / m0 + z1 ** 2 / m1
    assert g.K_exact * g.Theta_scale == pytest.approx(mean, rel=1e-12)
    assert g.K_exact * g.Theta_scale ** 2 == pytest.approx(var, rel=1e-12)
    assert min(m0, m1) <= g.K_exact <= m0 + m1 + 1e-9


# -- distance densities -----------------------------------------------------

def test_nearest_pdf_normalises_and_matches_cdf():
    dh = CFG.dh_u
    for link in (L, N):
        tot = integrate.quad(lambda r: nearest_pdf(link, r, CFG), dh, 3e5, points=[80, 200, 1000], limit=400)[0]
        assert tot == pytest.approx(nearest_cdf(link, 3e5, CFG), abs=1e-6)
        c = integrate.quad(lambda r: nearest_pdf(link, r, CFG), dh, 500.0, limit=200)[0]
        assert c == pytest.approx(nearest_cdf(link, 500.0, CFG), rel=1e-6)


def _poisson_masses():
    fld = field_for(CFG)
    lamL, lamN = fld.Lam(L, 1e7), fld.Lam(N, 1e7)
    return lamL, lamN


def _grid(lo, hi, n):
    # midpoint rule in log r
    e = np.linspace(np.log(lo), np.log(hi), n + 1)
    u = (e[:-1] + e[1:]) / 2
    return np.exp(u), np.exp(u) * np.diff(e)


def _mass2(fn, n0=1500, n1=1000):
    """Integral of fn(r0, r1) over the quadrant.

    Runs over horizontal z0 and the ratio t = z1/z0 so the r0 = r1 edge of the
    ordered supports falls on a cell boundary instead of cutting cells.
    """
    h = CFG.dh_u
    z0, w0 = _grid(1e-2, 1e5, n0)
    ta, wa = _grid(1e-4, 1.0, n1)
    tb, wb = _grid(1.0, 1e4, n1)
    t, wt = np.concatenate([ta, tb]), np.concatenate([wa, wb])
    Z0 = z0[:, None]
    Z1 = Z0 * t[None, :]
    R0, R1 = np.sqrt(Z0 ** 2 + h * h), np.sqrt(Z1 ** 2 + h * h)
    W = (w0[:, None] * Z0 / R0) * (wt[None, :] * Z0 * Z1 / R1)
    return float(np.sum(fn(R0, R1) * W))


def test_joint_pdf_masses_match_poisson_counts():
    lamL, lamN = _poisson_masses()
    for case, lam in ((ClassKind.COMP_LL, lamL), (ClassKind.COMP_NN, lamN)):
        m = _mass2(lambda a, b: joint_pdf(case, a, b, CFG))
        assert m == pytest.approx(1 - np.exp(-lam) * (1 + lam), abs=5e-3)
    mixed = _mass2(lambda a, b: joint_pdf(ClassKind.COMP_LN, a, b, CFG)
                   + joint_pdf(ClassKind.COMP_NL, a, b, CFG))
    assert mixed == pytest.approx((1 - np.exp(-lamL)) * (1 - np.exp(-lamN)), abs=5e-3)


def test_assoc_probs_sum_to_one():
    p = assoc_probs(CFG)
    assert sum(p.values()) == pytest.approx(1.0, abs=5e-3)
    assert all(v > 0 for v in p.values())
    p1 = assoc_probs(replace(CFG, theta=1.0))
    assert all(p1[k] == 0 for k in ClassKind if k.is_comp)
    assert p1[ClassKind.NON_COMP_L] + p1[ClassKind.NON_COMP_N] == pytest.approx(1.0, abs=5e-3)


@pytest.mark.parametrize("case", [ClassKind.NON_COMP_L, ClassKind.NON_COMP_N])
def test_conditional_pdf_noncomp_normalises(case):
    r, w = _grid(CFG.dh_u * (1 + 1e-12), 2e5, 20000)
    assert float(np.sum(conditional_pdf(case, r, CFG) * w)) == pytest.approx(1.0, abs=5e-3)


@pytest.mark.parametrize("case", [k for k in ClassKind if k.is_comp])
def test_conditional_pdf_comp_normalises(case):
    tot = _mass2(lambda a, b: conditional_pdf(case, (a, b), CFG))
    assert tot == pytest.approx(1.0, abs=5e-3)


# -- coverage and rates -----------------------------------------------------

def test_tu_closed_form_matches_quadrature():
    lam, dh, a = CFG.lambda_b, CFG.dh_t, CFG.alpha_t
    for T in (0.1, 1.0, 3.0):
        c = CFG.rho_t / T

        def lap(r):
            # Rayleigh interference beyond the serving distance
            g = lambda x: x / (1 + c * (x / r) ** a)
            f = integrate.quad(g, r, 100 * r, limit=200)[0] + integrate.quad(lambda u: g(1 / u) / u ** 2, 0, 1 / (100 * r))[0]
            return np.exp(-2 * np.pi * lam * f)

        pdf = lambda r: 2 * np.pi * lam * r * np.exp(-np.pi * lam * (r * r - dh * dh))
        ref = integrate.quad(lambda r: pdf(r) * lap(r), dh, np.inf, limit=200)[0]
        assert coverage_tu(T, CFG) == pytest.approx(ref, rel=1e-6)
    assert np.all(np.diff(coverage_tu(np.array([0.1, 1, 10]), CFG)) < 0)


def test_ceilings_are_exact_zeros():
    at = np.array([CFG.noma_ceiling, 2 * CFG.noma_ceiling])
    assert np.all(coverage_noncomp(ClassKind.NON_COMP_L, at, CFG) == 0)
    assert np.all(coverage_comp(ClassKind.COMP_LL, [CFG.comp_ceiling, 40.0], CFG) == 0)
    below = coverage_comp(ClassKind.COMP_LL, [0.99 * CFG.comp_ceiling], CFG)
    assert below[0] > 0
    with pytest.raises(ValueError):
        coverage_comp(ClassKind.NON_COMP_L, [1.0], CFG)


def test_oma_dominates_noma():
    T = np.array([0.3, 1.0, 3.0])
    for case in (ClassKind.NON_COMP_L, ClassKind.COMP_LL):
        n = case_coverage(case, T, CFG, Scheme.COMP_NOMA)
        o = case_coverage(case, T, CFG, Scheme.COMP_OMA)
        assert np.all(o >= n)


def test_rates():
    cn = rate_totals(CFG, Scheme.COMP_NOMA)
    assert cn["R"] == pytest.approx(cn["R_u_NC"] + cn["R_u_C"] + cn["R_t"])
    for k, (A, r) in cn["per_class"].items():
        cap = np.log2(1 + (2 if k.is_comp else 1) * CFG.noma_ceiling)
        assert 0 < r <= cap
    no = rate_totals(CFG, Scheme.NOMA_ONLY)
    one = rate_totals(replace(CFG, theta=1.0), Scheme.COMP_NOMA)
    assert no["R_u_C"] == 0 and one["R_u_C"] == 0
    assert no["R_u_NC"] == pytest.approx(one["R_u_NC"], rel=1e-12)
    assert no["R_u_NC"] <= np.log2(10.0)


def test_quadrature_failure_names_integral():
    tight = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-16, max_depth=0, order=4, laplace_order=4)
    with pytest.raises(QuadratureError, match="CompLL"):
        case_coverage(ClassKind.COMP_LL, [1.0], CFG, spec=tight)
