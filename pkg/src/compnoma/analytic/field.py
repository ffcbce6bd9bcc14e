"""Distance distributions of the LoS/NLoS BS processes seen from the AU.

Everything is parameterised by horizontal distance ``z``; a 3D distance r
maps to z = sqrt(r^2 - dh^2) (clamped at 0).  The mean number of type-v BSs
within horizontal distance z is

    Lam_v(z) = 2 pi lambda_b * int_0^z t p_v(t) dt,

tabulated once per configuration on a log grid (exact cell integrals, cubic
Hermite interpolation with the exact derivative).
"""

from __future__ import annotations

import functools

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..netmodel import LinkType, NetworkConfig, boundary_maps
from .quadrature import gl

L, N = LinkType.LOS, LinkType.NLOS


def _plos_pnlos(z, cfg):
    # same expression as netmodel, but no domain checks on the hot path
    e = cfg.C_offset * np.exp(-cfg.B_slope * (np.degrees(np.arctan2(cfg.dh_u, z)) - cfg.C_offset))
    return 1.0 / (1.0 + e), e / (1.0 + e)


class Field:
    """Per-configuration tables and maps.  Build through :func:`field_for`."""

    Z_MAX = 2.0e5

    def __init__(self, cfg: NetworkConfig, n_grid: int = 1500):
        self.cfg = cfg
        self.dh = cfg.dh_u
        self.lam = cfg.lambda_b
        self.maps = boundary_maps(cfg)
        zg = np.concatenate([[0.0], np.geomspace(1e-3 * self.dh, self.Z_MAX, n_grid)])
        x, w = gl(12)
        a, b = zg[:-1, None], zg[1:, None]
        zc = a + (b - a) / 2 * (x + 1)
        pl, pn = _plos_pnlos(zc, cfg)
        c = 2 * np.pi * self.lam
        cellL = c * ((b - a) / 2 * w * zc * pl).sum(axis=1)
        cellN = c * ((b - a) / 2 * w * zc * pn).sum(axis=1)
        LL = np.concatenate([[0.0], np.cumsum(cellL)])
        LN = np.concatenate([[0.0], np.cumsum(cellN)])
        pgl, pgn = _plos_pnlos(zg, cfg)
        self._lam = {L: CubicHermiteSpline(zg, LL, c * zg * pgl, extrapolate=False),
                     N: CubicHermiteSpline(zg, LN, c * zg * pgn, extrapolate=False)}
        self._end = {L: (LL[-1], pgl[-1]), N: (LN[-1], pgn[-1])}

    # -- geometry --------------------------------------------------------
    def hz(self, r):
        r = np.asarray(r, dtype=float)
        return np.sqrt(np.maximum(r * r - self.dh * self.dh, 0.0))

    def r3(self, z):
        return np.sqrt(np.asarray(z, dtype=float) ** 2 + self.dh ** 2)

    def p(self, link, z):
        pl, pn = _plos_pnlos(z, self.cfg)
        return pl if link is L else pn

    def density(self, link, z):
        """Intensity of type-v BSs per unit horizontal distance, 2 pi lambda z p_v(z)."""
        return 2 * np.pi * self.lam * z * self.p(link, z)

    def Lam(self, link, z):
        z = np.asarray(z, dtype=float)
        out = self._lam[link](np.minimum(z, self.Z_MAX))
        far = z > self.Z_MAX
        if np.any(far):
            # beyond the table p_v is flat to many digits
            L_end, p_end = self._end[link]
            out = np.where(far, L_end + np.pi * self.lam * p_end * (z * z - self.Z_MAX ** 2), out)
        return out

    def Lam_r(self, link, r):
        """Mean count within 3D distance r (zero below the height difference)."""
        return self.Lam(link, self.hz(r))

    # boundary maps on 3D distances, tolerant below dh (they are only used
    # as exclusion radii, where anything under dh means "no exclusion")
    def d_LN(self, r):
        m = self.maps
        return (m.eta_N / m.eta_L) ** (1 / m.alpha_N) * np.asarray(r, dtype=float) ** (m.alpha_L / m.alpha_N)

    def d_NL(self, r):
        m = self.maps
        return (m.eta_L / m.eta_N) ** (1 / m.alpha_L) * np.asarray(r, dtype=float) ** (m.alpha_N / m.alpha_L)

    @property
    def l_LN(self):
        return self.maps.l_LN

    def gain(self, link, r):
        eta, alpha, _ = self.cfg.link_params(link)
        return eta * np.asarray(r, dtype=float) ** -alpha

    def theta_root(self, link):
        return self.cfg.theta ** (1.0 / self.cfg.link_params(link)[1])


@functools.lru_cache(maxsize=32)
def field_for(cfg: NetworkConfig) -> Field:
    return Field(cfg)
