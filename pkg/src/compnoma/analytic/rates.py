"""Average ergodic rates, R = int_0^inf P(SIR > 2^tau - 1) dtau.

NOMA AU coverage vanishes beyond its SIR ceiling, which caps tau at
log2(1 + rho_u/rho_t) (single BS) or log2(1 + 2 rho_u/rho_t) (CoMP).
Without a ceiling (OMA, and the TU) the tau range is cut where the
coverage tail is negligible; coverage then decays like 2^(-2 tau/alpha).
"""

from __future__ import annotations

import numpy as np

from ..assoc import ClassKind
from ..netmodel import NetworkConfig
from ..sirlab import Scheme
from .coverage import _case_coverage_level, coverage_tu, power_split, scheme_cfg
from .distances import case_nodes
from .field import field_for
from .quadrature import DEFAULT_SPEC, QuadratureSpec, converge, panels


def tau_limit(case: ClassKind, cfg: NetworkConfig, scheme: Scheme):
    ru, rt = power_split(cfg, scheme)
    if rt == 0:
        return np.inf
    return float(np.log2(1 + (2 if case.is_comp else 1) * ru / rt))


def _tau_breaks(tmax, alpha):
    if np.isfinite(tmax):
        # the coverage drops fastest just below the ceiling
        return [0.0, 0.5 * tmax, 0.8 * tmax, 0.95 * tmax, tmax]
    # 2^(-2 tau / alpha) down to 1e-10
    hi = 5.0 * alpha * np.log2(10.0)
    return [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, max(hi, 24.0)]


def _case_rate_level(case, fld, scheme, sp):
    ru, rt = power_split(fld.cfg, scheme)
    tmax = tau_limit(case, fld.cfg, scheme)
    tau, wt = panels(_tau_breaks(tmax, max(fld.cfg.alpha_L, fld.cfg.alpha_N)), sp.order)
    cov = _case_coverage_level(case, fld, 2.0 ** tau - 1.0, ru, rt, sp)
    if np.all(np.isnan(cov)):
        return np.nan
    return scheme.resource_fraction * float(wt @ cov)


def rate_case(case: ClassKind, cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA,
              spec: QuadratureSpec = DEFAULT_SPEC, with_error=False):
    """Conditional average rate (bit/s/Hz) of an AU in ``case``; nan if the class is empty."""
    c = scheme_cfg(cfg, scheme)
    fld = field_for(c)
    val, err = converge(lambda sp: _case_rate_level(case, fld, scheme, sp), spec, f"rate of class {case.value}")
    return (val, err) if with_error else val


def rate_tu(cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA, spec: QuadratureSpec = DEFAULT_SPEC):
    def run(sp):
        tau, wt = panels(_tau_breaks(np.inf, cfg.alpha_t), sp.order)
        return scheme.resource_fraction * float(wt @ coverage_tu(2.0 ** tau - 1.0, cfg, scheme))
    return converge(run, spec, "TU rate")


def rate_totals(cfg: NetworkConfig, scheme: Scheme = Scheme.COMP_NOMA,
                spec: QuadratureSpec = DEFAULT_SPEC) -> dict:
    """Association-weighted AU rates, the TU rate and their sum.

    Keys: R_u_NC, R_u_C, R_t, R, plus per-class rates/weights and the
    largest quadrature error estimate under 'quadrature_error'.
    """
    c = scheme_cfg(cfg, scheme)
    fld = field_for(c)
    per = {}

    def run(sp):
        vals = []
        for case in ClassKind:
            A = case_nodes(case, fld, sp).mass
            r = _case_rate_level(case, fld, scheme, sp) if A > 0 else 0.0
            per[case] = (A, r)
            vals += [A, A * r]
        return np.array(vals)

    v, err = converge(run, spec, "AU rate totals")
    kinds = list(ClassKind)
    nc = sum(v[2 * i + 1] for i, k in enumerate(kinds) if not k.is_comp)
    cc = sum(v[2 * i + 1] for i, k in enumerate(kinds) if k.is_comp)
    rt, et = rate_tu(c, scheme, spec)
    return {"R_u_NC": float(nc), "R_u_C": float(cc), "R_t": rt, "R": float(nc + cc + rt),
            "per_class": {k: (float(v[2 * i]), float(v[2 * i + 1] / v[2 * i]) if v[2 * i] > 0 else np.nan)
                          for i, k in enumerate(kinds)},
            "quadrature_error": max(err, et)}
