"""Network parameters and deterministic channel/geometry primitives.

All quantities are linear scale; dB values are converted once when a
configuration is built (see :func:`db_to_linear` and ``compnoma.expcli``).
Distances are in metres.  ``z`` always denotes a horizontal distance and
``r`` a 3D distance between the typical aerial user and a base station.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np


class ConfigError(ValueError):
    """Raised when a parameter violates the model's domain."""


class LinkType(enum.Enum):
    LOS = "LoS"
    NLOS = "NLoS"


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class NetworkConfig:
    """Physical and statistical parameters of the CoMP-NOMA network.

    Defaults reproduce the reference operating point: 10 BS/km^2, AU at
    75 m, BS at 19 m, TU at 1.5 m, path-loss constants -35/-40/-28.4 dB,
    Nakagami orders 3/1, power split 0.9/0.1 and a 4 dB cooperation
    threshold.  Antenna gains are folded into the ``eta_*`` constants.
    """

    lambda_b: float = 1e-5
    lambda_t: float = 1e-3
    lambda_u: float = 1e-4
    h_b: float = 19.0
    h_t: float = 1.5
    h_u: float = 75.0
    B_slope: float = 0.16
    C_offset: float = 9.61
    alpha_L: float = 2.6
    alpha_N: float = 3.0
    alpha_t: float = 3.0
    eta_L: float = 10.0 ** -3.5
    eta_N: float = 10.0 ** -4.0
    eta_t: float = 10.0 ** -2.84
    m_L: int = 3
    m_N: int = 1
    p_tx: float = 10.0 ** 2.6
    rho_u: float = 0.9
    rho_t: float = 0.1
    theta: float = 10.0 ** 0.4
    sim_radius: float = 4000.0
    iterations: int = 10_000

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("lambda_b", "lambda_t", "lambda_u"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("alpha_L", "alpha_N", "alpha_t"):
            if not getattr(self, name) > 2:
                raise ConfigError(f"{name} must exceed 2, got {getattr(self, name)!r}")
        for name in ("eta_L", "eta_N", "eta_t", "p_tx", "B_slope", "C_offset"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("m_L", "m_N"):
            m = getattr(self, name)
            if int(m) != m or m < 1:
                raise ConfigError(f"{name} must be a positive integer, got {m!r}")
        if not self.m_L > self.m_N:
            raise ConfigError(f"m_L must exceed m_N, got m_L={self.m_L}, m_N={self.m_N}")
        if abs(self.rho_u + self.rho_t - 1.0) > 1e-12:
            raise ConfigError(f"rho_u + rho_t must equal 1, got {self.rho_u} + {self.rho_t}")
        if not (self.rho_u > self.rho_t > 0):
            raise ConfigError(f"need rho_u > rho_t > 0, got rho_u={self.rho_u}, rho_t={self.rho_t}")
        # theta == 1 is the non-cooperative limit (no AU ever qualifies for CoMP)
        if not self.theta >= 1:
            raise ConfigError(f"theta must be >= 1 (linear), got {self.theta!r}")
        if not self.h_u > self.h_b:
            raise ConfigError(f"h_u must be above h_b, got h_u={self.h_u}, h_b={self.h_b}")
        if not self.sim_radius > 0:
            raise ConfigError(f"sim_radius must be positive, got {self.sim_radius!r}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigError(f"iterations must be a positive integer, got {self.iterations!r}")

    @property
    def dh_u(self) -> float:
        return abs(self.h_u - self.h_b)

    @property
    def dh_t(self) -> float:
        return abs(self.h_t - self.h_b)

    @property
    def noma_ceiling(self) -> float:
        """Largest achievable SIR of a non-CoMP NOMA AU, rho_u / rho_t."""
        return self.rho_u / self.rho_t

    @property
    def comp_ceiling(self) -> float:
        return 2.0 * self.rho_u / self.rho_t

    def with_rho_u(self, rho_u: float) -> "NetworkConfig":
        # rounding keeps e.g. 1 - 0.9 equal to the literal 0.1
        return replace(self, rho_u=rho_u, rho_t=round(1.0 - rho_u, 12))

    def link_params(self, link: LinkType) -> tuple[float, float, int]:
        """(eta, alpha, m) of the given A2G link type."""
        if link is LinkType.LOS:
            return self.eta_L, self.alpha_L, self.m_L
        return self.eta_N, self.alpha_N, self.m_N


def _elevation_deg(z, dh):
    return np.degrees(np.arctan2(dh, z))


def _los_nlos(z, cfg: NetworkConfig):
    z = np.asarray(z, dtype=float)
    e = cfg.C_offset * np.exp(-cfg.B_slope * (_elevation_deg(z, cfg.dh_u) - cfg.C_offset))
    return 1.0 / (1.0 + e), e / (1.0 + e)


def los_probability(z, cfg: NetworkConfig):
    """LoS probability of an A2G link at horizontal distance ``z`` (z >= 0)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("horizontal distance must be non-negative")
    p = _los_nlos(z, cfg)[0]
    return float(p) if p.ndim == 0 else p


def nlos_probability(z, cfg: NetworkConfig):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("horizontal distance must be non-negative")
    p = _los_nlos(z, cfg)[1]
    return float(p) if p.ndim == 0 else p


def horizontal(r, dh: float):
    """Horizontal offset of a 3D distance; values below ``dh`` clamp to zero."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(np.maximum(r * r - dh * dh, 0.0))


def los_probability_3d(r, cfg: NetworkConfig):
    r = np.asarray(r, dtype=float)
    # tolerate rounding right at the vertical link
    if np.any(r < cfg.dh_u * (1 - 1e-12)):
        raise ValueError(f"3D distance below the height difference {cfg.dh_u} m")
    return los_probability(horizontal(r, cfg.dh_u), cfg)


def _check_reference(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        raise ValueError("path-loss model undefined below the 1 m reference distance")
    return r


def link_gain(r, link: LinkType, cfg: NetworkConfig):
    """Average received power gain eta_v * r^-alpha_v of an A2G link."""
    eta, alpha, _ = cfg.link_params(link)
    g = eta * _check_reference(r) ** -alpha
    return float(g) if np.ndim(g) == 0 else g


def ground_gain(r, cfg: NetworkConfig):
    g = cfg.eta_t * _check_reference(r) ** -cfg.alpha_t
    return float(g) if np.ndim(g) == 0 else g


@dataclass(frozen=True)
class BoundaryMaps:
    """Distance maps between LoS and NLoS links of equal average RSS.

    ``d_LN(r)`` is the NLoS distance whose RSS equals that of a LoS BS at
    ``r``; ``d_NL`` is its inverse.  ``l_LN`` is the LoS distance whose RSS
    equals that of an NLoS BS straight below the AU (at ``dh``).
    """

    dh: float
    eta_L: float
    eta_N: float
    alpha_L: float
    alpha_N: float

    @property
    def l_LN(self) -> float:
        return (self.eta_L / self.eta_N) ** (1 / self.alpha_L) * self.dh ** (self.alpha_N / self.alpha_L)

    def _domain(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.dh * (1 - 1e-12)):
            raise ValueError(f"distance below the height difference {self.dh} m")
        return r

    def l_of(self, r):
        return horizontal(self._domain(r), self.dh)

    def d_LN(self, r):
        return (self.eta_N / self.eta_L) ** (1 / self.alpha_N) * self._domain(r) ** (self.alpha_L / self.alpha_N)

    def d_NL(self, r):
        return (self.eta_L / self.eta_N) ** (1 / self.alpha_L) * self._domain(r) ** (self.alpha_N / self.alpha_L)


def boundary_maps(cfg: NetworkConfig) -> BoundaryMaps:
    return BoundaryMaps(cfg.dh_u, cfg.eta_L, cfg.eta_N, cfg.alpha_L, cfg.alpha_N)


def equal_gain_distance(cfg: NetworkConfig) -> float:
    """Distance at which LoS and NLoS links have equal average gain."""
    return (cfg.eta_L / cfg.eta_N) ** (1.0 / (cfg.alpha_L - cfg.alpha_N))
