"""Exact per-realization SIR of the typical AU and TU under the four access schemes.

Received powers are p_tx * gain * fading.  Transmit power cancels in every
ratio below but is kept so the cancellation can be checked.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .assoc import AuClass, ClassKind, classify_au
from .netmodel import NetworkConfig
from .pointfield import Realization, neighbor_summary


class Scheme(enum.Enum):
    COMP_NOMA = "CompNoma"
    COMP_OMA = "CompOma"
    NOMA_ONLY = "NomaOnly"
    OMA_ONLY = "OmaOnly"

    @property
    def is_noma(self) -> bool:
        return self in (Scheme.COMP_NOMA, Scheme.NOMA_ONLY)

    @property
    def cooperative(self) -> bool:
        return self in (Scheme.COMP_NOMA, Scheme.COMP_OMA)

    @property
    def resource_fraction(self) -> float:
        # OMA splits the resource block between AU and TU
        return 1.0 if self.is_noma else 0.5


@dataclass(frozen=True)
class SirSample:
    sir_au: float
    sir_tu: float
    au_class: AuClass


def scheme_config(cfg: NetworkConfig, scheme: Scheme) -> NetworkConfig:
    """Baselines without cooperation are the cooperative schemes at theta = 1."""
    return cfg if scheme.cooperative else replace(cfg, theta=1.0)


def au_powers(real: Realization, cfg: NetworkConfig) -> np.ndarray:
    gain = np.where(real.los, cfg.eta_L * real.r ** -cfg.alpha_L, cfg.eta_N * real.r ** -cfg.alpha_N)
    return cfg.p_tx * gain * real.fading_au


def tu_powers(real: Realization, cfg: NetworkConfig) -> np.ndarray:
    return cfg.p_tx * cfg.eta_t * real.r_tu ** -cfg.alpha_t * real.fading_tu


def _interference(P, exclude):
    keep = np.ones(len(P), dtype=bool)
    keep[list(exclude)] = False
    return float(np.sum(P[keep]))


def _div(num, den):
    return np.inf if den == 0.0 else num / den


def noncomp_sir(S, I, cfg: NetworkConfig, noma: bool) -> float:
    if noma:
        # rho_u S / (rho_t S + I), written so the ceiling rho_u/rho_t is never reached from float error
        return cfg.noma_ceiling / (1.0 + I / (cfg.rho_t * S))
    return _div(S, I)


def comp_sir(P0, P1, I, cfg: NetworkConfig, noma: bool) -> float:
    coh = (np.sqrt(P0) + np.sqrt(P1)) ** 2     # MRT: amplitudes add in phase
    if noma:
        return cfg.noma_ceiling * coh / (P0 + P1 + I / cfg.rho_t)
    return _div(coh, I)


def sir_au_noncomp(real: Realization, serving: int, cfg: NetworkConfig, scheme: Scheme) -> float:
    """SIR of a singly-served AU; ``serving`` indexes the serving BS."""
    P = au_powers(real, cfg)
    return noncomp_sir(float(P[serving]), _interference(P, [serving]), cfg, scheme.is_noma)


def sir_au_comp(real: Realization, serving: tuple, cfg: NetworkConfig, scheme: Scheme) -> float:
    i0, i1 = serving
    P = au_powers(real, cfg)
    return comp_sir(float(P[i0]), float(P[i1]), _interference(P, [i0, i1]), cfg, scheme.is_noma)


def tu_serving_index(real: Realization) -> int:
    return int(np.argmin(real.r_tu))


def sir_tu(real: Realization, serving: int, cfg: NetworkConfig, scheme: Scheme) -> float:
    """TU SIR after perfect SIC of the AU message (NOMA) or on its own half band (OMA)."""
    P = tu_powers(real, cfg)
    share = cfg.rho_t if scheme.is_noma else 1.0
    return _div(share * float(P[serving]), _interference(P, [serving]))


def sample_sir(real: Realization, cfg: NetworkConfig, scheme: Scheme) -> SirSample:
    c = scheme_config(cfg, scheme)
    cls = classify_au(neighbor_summary(real), c)
    if cls.kind.is_comp:
        s_au = sir_au_comp(real, (cls.i0, cls.i1), c, scheme)
    else:
        s_au = sir_au_noncomp(real, cls.i0, c, scheme)
    return SirSample(s_au, sir_tu(real, tu_serving_index(real), c, scheme), cls)


# compact per-realization record used by the Monte Carlo harness

KIND_CODE = {k: i for i, k in enumerate(ClassKind)}


def evaluate_all(real: Realization, cfg: NetworkConfig):
    """Class codes and SIRs of every scheme on one realization.

    Returns (kind_theta, kind_one, sir[4] in Scheme order, sir_tu_noma,
    sir_tu_oma).  Class codes follow ``ClassKind`` order; -1 marks an empty
    window (all SIRs NaN then).
    """
    if real.n == 0:
        nan = float("nan")
        return -1, -1, [nan] * 4, nan, nan
    nb = neighbor_summary(real)
    P = au_powers(real, cfg)
    Pt = tu_powers(real, cfg)
    k = tu_serving_index(real)
    St, It = float(Pt[k]), _interference(Pt, [k])

    sirs = {}
    kinds = {}
    for scheme in Scheme:
        c = scheme_config(cfg, scheme)
        cls = classify_au(nb, c)
        kinds[scheme.cooperative] = KIND_CODE[cls.kind]
        if cls.kind.is_comp:
            sirs[scheme] = comp_sir(float(P[cls.i0]), float(P[cls.i1]), _interference(P, [cls.i0, cls.i1]), c, scheme.is_noma)
        else:
            sirs[scheme] = noncomp_sir(float(P[cls.i0]), _interference(P, [cls.i0]), c, scheme.is_noma)
    return (kinds[True], kinds[False], [sirs[s] for s in Scheme],
            _div(cfg.rho_t * St, It), _div(St, It))
