"""One BS field around the typical user, and the neighbour distances used for association.

A realization is drawn on a disc of radius ``sim_radius`` centred on the
typical AU (and, at ground level, the typical TU, which sees the same BS
positions through its own height offset and its own Rayleigh fading).

Seeding is counter based: realization ``i`` of a run with master seed ``s``
draws from ``SeedSequence([s, i])`` so any subset of realizations can be
rebuilt on any worker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .netmodel import LinkType, NetworkConfig, los_probability


@dataclass(frozen=True)
class Realization:
    """BS points sorted by horizontal distance, AU and TU views side by side."""

    z: np.ndarray            # horizontal distance, m
    r: np.ndarray            # 3D distance to the AU
    los: np.ndarray          # bool LoS mark toward the AU
    fading_au: np.ndarray    # Gamma(m_v, 1/m_v) power for the marked link type
    r_tu: np.ndarray         # 3D distance to the TU
    fading_tu: np.ndarray    # Exp(1) power toward the TU
    rng_stream_id: int = 0

    def __post_init__(self):
        for a in (self.z, self.r, self.los, self.fading_au, self.r_tu, self.fading_tu):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.z)

    def links(self):
        return [LinkType.LOS if b else LinkType.NLOS for b in self.los]


def streams(master_seed: int, index: int):
    """(positions, AU marks/fading, TU fading) generators for realization ``index``."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return [np.random.default_rng(c) for c in ss.spawn(3)]


def sample_fading_power(link: LinkType, cfg: NetworkConfig, rng, size=None):
    m = cfg.m_L if link is LinkType.LOS else cfg.m_N
    return rng.gamma(m, 1.0 / m, size)


def sample_realization(cfg: NetworkConfig, seed: int, index: int = 0) -> Realization:
    rng_pos, rng_au, rng_tu = streams(seed, index)
    R = cfg.sim_radius
    n = rng_pos.poisson(cfg.lambda_b * np.pi * R * R)
    z = np.sort(R * np.sqrt(rng_pos.random(n)))

    u = rng_au.random(n)
    los = u < los_probability(z, cfg)
    # both orders are drawn for every point so marks never shift the fading stream
    gL = sample_fading_power(LinkType.LOS, cfg, rng_au, n)
    gN = sample_fading_power(LinkType.NLOS, cfg, rng_au, n)
    fading = np.where(los, gL, gN)

    return Realization(
        z=z,
        r=np.sqrt(z * z + cfg.dh_u ** 2),
        los=los,
        fading_au=fading,
        r_tu=np.sqrt(z * z + cfg.dh_t ** 2),
        fading_tu=rng_tu.exponential(1.0, n),
        rng_stream_id=int(index),
    )


def realization_from_points(r, los, cfg: NetworkConfig, fading_au=None, fading_tu=None, stream_id=0):
    """Hand-built realization from AU 3D distances (mostly for tests)."""
    r = np.asarray(r, dtype=float)
    z = np.sqrt(np.maximum(r * r - cfg.dh_u ** 2, 0.0))
    o = np.argsort(z, kind="stable")
    n = len(r)
    fa = np.ones(n) if fading_au is None else np.asarray(fading_au, dtype=float)
    ft = np.ones(n) if fading_tu is None else np.asarray(fading_tu, dtype=float)
    return Realization(z[o], r[o], np.asarray(los, dtype=bool)[o], fa[o],
                       np.sqrt(z[o] ** 2 + cfg.dh_t ** 2), ft[o], stream_id)


@dataclass(frozen=True)
class NeighborSummary:
    """Nearest and second-nearest 3D distances per link type; None when absent.

    The ``i_*`` fields index the corresponding point in the realization
    (-1 when absent).
    """

    r_L0: Optional[float] = None
    r_L1: Optional[float] = None
    r_N0: Optional[float] = None
    r_N1: Optional[float] = None
    i_L0: int = -1
    i_L1: int = -1
    i_N0: int = -1
    i_N1: int = -1

    @property
    def empty(self) -> bool:
        return self.r_L0 is None and self.r_N0 is None


def _two_smallest(r, idx):
    if len(idx) == 0:
        return [None, None], [-1, -1]
    k = idx[np.argsort(r[idx], kind="stable")[:2]]
    d = [float(r[i]) for i in k] + [None] * (2 - len(k))
    return d, [int(i) for i in k] + [-1] * (2 - len(k))


def neighbor_summary(real: Realization) -> NeighborSummary:
    (rl0, rl1), (il0, il1) = _two_smallest(real.r, np.flatnonzero(real.los))
    (rn0, rn1), (in0, in1) = _two_smallest(real.r, np.flatnonzero(~real.los))
    return NeighborSummary(rl0, rl1, rn0, rn1, il0, il1, in0, in1)


def _mean_power_density(cfg: NetworkConfig):
    dh2 = cfg.dh_u ** 2

    def f(z):
        pl = los_probability(z, cfg)
        d2 = z * z + dh2
        return z * (pl * cfg.eta_L * d2 ** (-cfg.alpha_L / 2) + (1 - pl) * cfg.eta_N * d2 ** (-cfg.alpha_N / 2))
    return f


def tail_interference_mean(cfg: NetworkConfig, radius: Optional[float] = None) -> float:
    """Mean AU interference power (unit transmit power) from BSs beyond ``radius``.

    This is what the finite window throws away; compare it with
    :func:`window_interference_mean` to judge the truncation.
    """
    R = cfg.sim_radius if radius is None else radius
    f = _mean_power_density(cfg)
    # log-distance variable; the integrand then decays like exp(-(alpha-2) u)
    span = 40.0 / (min(cfg.alpha_L, cfg.alpha_N) - 2.0)
    val, _ = integrate.quad(lambda u: f(np.exp(u)) * np.exp(u), np.log(max(R, 1e-3)), np.log(max(R, 1e-3)) + span, limit=200)
    return 2 * np.pi * cfg.lambda_b * val


def window_interference_mean(cfg: NetworkConfig, radius: Optional[float] = None) -> float:
    """Mean AU interference power from all BSs inside ``radius`` (no exclusion)."""
    R = cfg.sim_radius if radius is None else radius
    val, _ = integrate.quad(_mean_power_density(cfg), 0.0, R, limit=200, points=[cfg.dh_u])
    return 2 * np.pi * cfg.lambda_b * val
