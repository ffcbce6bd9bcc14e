"""Coverage probabilities of the typical AU (per class and overall) and of the typical TU.

Non-cooperative AU, serving gain zeta, fading Gamma(m, 1/m):
    P(SIR > T) = E[ sum_{k<m} (-s)^k/k! L^(k)(s) ],  s = m T / ((rho_u - rho_t T) zeta)

Cooperative AU: the coherent sum is bounded by twice the power sum, whose
distribution is replaced by a moment-matched Gamma(K, Theta):
    s = T / ((2 rho_u - rho_t T) Theta), K summed terms.

OMA uses the same expressions with rho_u = 1, rho_t = 0.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from scipy.special import hyp2f1

from ..assoc import ClassKind
from ..netmodel import LinkType, NetworkConfig
from ..sirlab import Scheme
from .distances import case_nodes
from .field import field_for
from .laplace import coverage_sum_scaled, scaled_derivs
from .quadrature import DEFAULT_SPEC, QuadratureSpec, converge

L, N = LinkType.LOS, LinkType.NLOS


def power_split(cfg: NetworkConfig, scheme: Scheme):
    """(share of the AU message, share of the co-scheduled TU message)."""
    return (cfg.rho_u, cfg.rho_t) if scheme.is_noma else (1.0, 0.0)


def scheme_cfg(cfg: NetworkConfig, scheme: Scheme) -> NetworkConfig:
    return cfg if scheme.cooperative else replace(cfg, theta=1.0)


def _s_and_K(case, nodes, fld, T, rho_u, rho_t):
    """Per-node, per-threshold Laplace argument and number of series terms."""
    T = np.asarray(T, dtype=float)[None, :]
    cfg = fld.cfg
    if not case.is_comp:
        v = case.links[0]
        eta, alpha, m = cfg.link_params(v)
        zeta = fld.gain(v, fld.r3(nodes.z0))[:, None]
        den = rho_u - rho_t * T
        with np.errstate(divide="ignore"):
            s = np.where(den > 0, m * T / (den * zeta), np.inf)
        return s, m
    v0, v1 = case.links
    m0, m1 = cfg.link_params(v0)[2], cfg.link_params(v1)[2]
    z0 = fld.gain(v0, fld.r3(nodes.z0))
    z1 = fld.gain(v1, fld.r3(nodes.z1))
    theta_scale = ((z0 ** 2 / m0 + z1 ** 2 / m1) / (z0 + z1))[:, None]
    den = 2 * rho_u - rho_t * T
    with np.errstate(divide="ignore"):
        s = np.where(den > 0, T / (den * theta_scale), np.inf)
    return s, m0 + m1


def _case_coverage_level(case, fld, T, rho_u, rho_t, sp):
    nodes = case_nodes(case, fld, sp)
    if nodes.w.size == 0 or nodes.mass <= 0:
        return np.full(len(T), np.nan)
    s, K = _s_and_K(case, nodes, fld, T, rho_u, rho_t)
    finite = np.isfinite(s)
    P = np.zeros(s.shape)
    if np.any(finite):
        ss = np.where(finite, s, 0.0)
        nu = scaled_derivs(fld, ss, nodes.a_L[:, None], nodes.a_N[:, None], K, sp.laplace_order)
        P = np.where(finite, coverage_sum_scaled(nu, K), 0.0)
    return (nodes.w @ P) / nodes.mass


def case_coverage(case: ClassKind, T, cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA,
                  spec: QuadratureSpec = DEFAULT_SPEC, with_error=False):
    """Conditional coverage of one AU class at thresholds ``T`` (linear)."""
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if np.any(T <= 0):
        raise ValueError("thresholds must be positive")
    c = scheme_cfg(cfg, scheme)
    fld = field_for(c)
    ru, rt = power_split(c, scheme)
    val, err = converge(lambda sp: _case_coverage_level(case, fld, T, ru, rt, sp), spec,
                        f"coverage of class {case.value}")
    val = np.atleast_1d(val)
    return (val, err) if with_error else val


def coverage_noncomp(case: ClassKind, T, cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA,
                     spec: QuadratureSpec = DEFAULT_SPEC):
    if case.is_comp:
        raise ValueError(f"{case.value} is a cooperative class")
    return case_coverage(case, T, cfg, scheme, spec)


def coverage_comp(case: ClassKind, T, cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA,
                  spec: QuadratureSpec = DEFAULT_SPEC):
    if not case.is_comp:
        raise ValueError(f"{case.value} is not a cooperative class")
    return case_coverage(case, T, cfg, scheme, spec)


def _total_level(fld, T, ru, rt, sp):
    tot = np.zeros(len(T))
    parts = {}
    for case in ClassKind:
        nodes_mass = case_nodes(case, fld, sp).mass
        if nodes_mass <= 0:
            parts[case] = (0.0, np.full(len(T), np.nan))
            continue
        cov = _case_coverage_level(case, fld, T, ru, rt, sp)
        parts[case] = (nodes_mass, cov)
        tot += nodes_mass * cov
    return tot, parts


def coverage_breakdown(T, cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA,
                       spec: QuadratureSpec = DEFAULT_SPEC):
    """Association weights, per-class coverage and the overall AU coverage.

    Returns (overall, {class: (weight, coverage)}, error estimate).
    """
    T = np.atleast_1d(np.asarray(T, dtype=float))
    c = scheme_cfg(cfg, scheme)
    fld = field_for(c)
    ru, rt = power_split(c, scheme)
    store = {}

    def run(sp):
        tot, parts = _total_level(fld, T, ru, rt, sp)
        store["parts"] = parts
        return tot

    overall, err = converge(run, spec, "overall AU coverage")
    return np.atleast_1d(overall), store["parts"], err


def coverage_total_au(T, cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA,
                      spec: QuadratureSpec = DEFAULT_SPEC):
    return coverage_breakdown(T, cfg, scheme, spec)[0]


def _tu_F(c, alpha):
    # int_1^inf u / (1 + c u^alpha) du
    return hyp2f1(1.0, 1.0 - 2.0 / alpha, 2.0 - 2.0 / alpha, -1.0 / c) / (c * (alpha - 2.0))


def coverage_tu(T, cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA):
    """TU coverage, nearest-BS association, Rayleigh fading, perfect SIC.

    The radial integral has a closed form once the interference integral is
    scaled by the serving distance:
        P = exp(-2 pi lambda dh_t^2 F) / (1 + 2 F),  F = int_1^inf u/(1 + (rho/T) u^alpha) du
    """
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("thresholds must be positive")
    share = cfg.rho_t if scheme.is_noma else 1.0
    F = _tu_F(share / T, cfg.alpha_t)
    out = np.exp(-2 * np.pi * cfg.lambda_b * cfg.dh_t ** 2 * F) / (1 + 2 * F)
    return float(out) if out.ndim == 0 else out
