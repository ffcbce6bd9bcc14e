from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compnoma.assoc import classify_au
from compnoma.netmodel import NetworkConfig
from compnoma.pointfield import neighbor_summary, realization_from_points, sample_realization
from compnoma.sirlab import (
    Scheme, comp_sir, evaluate_all, noncomp_sir, sample_sir, sir_au_comp, sir_au_noncomp, sir_tu,
    tu_serving_index,
)

CFG = NetworkConfig()


def test_noncomp_arithmetic():
    assert noncomp_sir(1.0, 0.1, CFG, noma=True) == pytest.approx(4.5)
    assert noncomp_sir(1.0, 1e-30, CFG, noma=True) == pytest.approx(9.0)
    assert noncomp_sir(1.0, 0.1, CFG, noma=False) == pytest.approx(10.0)
    assert noncomp_sir(1.0, 0.0, CFG, noma=False) == np.inf


def test_comp_symmetric_ceiling():
    assert comp_sir(2.0, 2.0, 0.0, CFG, noma=True) == pytest.approx(18.0)
    # one amplitude vanishing reduces to the single-BS formula
    assert comp_sir(1.0, 0.0, 0.1, CFG, noma=True) == pytest.approx(noncomp_sir(1.0, 0.1, CFG, True))


def test_tu_arithmetic():
    R = realization_from_points([60.0, 5000.0], [True, True], CFG)
    k = tu_serving_index(R)
    P = CFG.p_tx * CFG.eta_t * R.r_tu ** -CFG.alpha_t
    want = CFG.rho_t * P[k] / P[1 - k]
    assert sir_tu(R, k, CFG, Scheme.COMP_NOMA) == pytest.approx(want)
    assert sir_tu(R, k, CFG, Scheme.OMA_ONLY) == pytest.approx(want / CFG.rho_t)


def _brute(R, cls, cfg, noma):
    # plain loops, amplitudes summed before squaring
    sig_amp, own, interf = 0.0, 0.0, 0.0
    serving = [cls.i0] if cls.i1 < 0 else [cls.i0, cls.i1]
    for i in range(R.n):
        eta, a = (cfg.eta_L, cfg.alpha_L) if R.los[i] else (cfg.eta_N, cfg.alpha_N)
        p = cfg.p_tx * eta * R.r[i] ** -a * R.fading_au[i]
        if i in serving:
            sig_amp += np.sqrt(p)
            own += p
        else:
            interf += p
    if noma:
        return cfg.rho_u * sig_amp ** 2 / (cfg.rho_t * own + interf)
    return sig_amp ** 2 / interf


@pytest.mark.parametrize("seed", range(8))
def test_matches_brute_force(seed):
    cfg = replace(CFG, theta=10.0)   # many cooperative draws
    R = sample_realization(cfg, seed, 0)
    cls = classify_au(neighbor_summary(R), cfg)
    for scheme in (Scheme.COMP_NOMA, Scheme.COMP_OMA):
        got = sample_sir(R, cfg, scheme).sir_au
        assert got == pytest.approx(_brute(R, cls, cfg, scheme.is_noma), rel=1e-10)
        if cls.kind.is_comp:
            assert sir_au_comp(R, (cls.i0, cls.i1), cfg, scheme) == pytest.approx(got, rel=1e-14)
        else:
            assert sir_au_noncomp(R, cls.i0, cfg, scheme) == pytest.approx(got, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), th_db=st.floats(0, 20))
def test_coupling_and_ceilings(seed, th_db):
    cfg = replace(CFG, theta=10 ** (th_db / 10))
    R = sample_realization(cfg, seed, 0)
    kt, k1, s, tn, to = evaluate_all(R, cfg)
    cn, co, nn, on = s
    assert co >= cn and on >= nn
    assert nn < cfg.noma_ceiling
    assert cn < (cfg.comp_ceiling if kt >= 2 else cfg.noma_ceiling)
    assert to == pytest.approx(tn / cfg.rho_t, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.floats(1e-3, 1e3))
def test_transmit_power_cancels(seed, k):
    R = sample_realization(CFG, seed, 0)
    a = evaluate_all(R, CFG)
    b = evaluate_all(R, replace(CFG, p_tx=CFG.p_tx * k))
    assert a[:2] == b[:2]
    assert np.allclose(a[2], b[2], rtol=1e-12)
    assert np.allclose(a[3:], b[3:], rtol=1e-12)


def test_baselines_are_theta_one():
    for i in range(20):
        R = sample_realization(CFG, 4, i)
        a = sample_sir(R, CFG, Scheme.NOMA_ONLY)
        b = sample_sir(R, replace(CFG, theta=1.0), Scheme.COMP_NOMA)
        assert a.sir_au == b.sir_au and a.au_class == b.au_class
