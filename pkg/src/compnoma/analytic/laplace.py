"""Laplace transform of the aggregate interference and its derivatives.

With exclusion radii a_L, a_N (horizontal) the interference Laplace
exponent is

    mu(s) = -sum_v int_{a_v}^inf C_v(s, z) 2 pi lambda z p_v(z) dz,
    C_v   = 1 - (1 + s g_v(z)/m_v)^(-m_v),

and L(s) = exp(mu(s)).  Derivatives are taken under the integral sign in
closed form.  Internally we carry nu_j = (-s)^j mu^(j)(s), which is
positive and well scaled for every order:

    nu_j = int (m)_j x^j (1 + x)^-(m+j) 2 pi lambda z p_v(z) dz,  x = s g/m.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.special import poch

from ..netmodel import LinkType, NetworkConfig
from .field import Field, field_for
from .quadrature import DEFAULT_SPEC, QuadratureSpec, converge, tail_nodes

L, N = LinkType.LOS, LinkType.NLOS
_CHUNK = 1_500_000     # max Laplace node evaluations per numpy pass


@dataclass(frozen=True)
class LaplaceKernel:
    s: float
    exclusion: dict          # LinkType -> lower horizontal limit, m
    mu_derivs: np.ndarray    # mu^(j)(s), j = 0..K-1
    K: int
    scaled: np.ndarray       # (-s)^j mu^(j)(s)
    error: float = 0.0

    @property
    def L(self):
        return float(np.exp(self.mu_derivs[0]))


def _link_terms(fld: Field, link, s, a, K, n, raw=False):
    eta, alpha, m = fld.cfg.link_params(link)
    k = 1.0 / (alpha - 2.0)
    a = np.maximum(a, 0.0)
    with np.errstate(divide="ignore"):
        knee = np.where(s > 0, (s * eta / m) ** (1.0 / alpha), 0.0)
    w = np.maximum(np.maximum(fld.dh, a), knee)
    z, dz = tail_nodes(a, w, k, n)
    zeta = eta * (z * z + fld.dh ** 2) ** (-alpha / 2)
    dens = 2 * np.pi * fld.lam * z * fld.p(link, z) * dz
    ss = np.asarray(s, dtype=float)[..., None]
    x = ss * zeta / m
    lx = np.log1p(x)
    out = np.empty((K,) + np.shape(a))
    out[0] = np.sum(-np.expm1(-m * lx) * dens, axis=-1)
    for j in range(1, K):
        if raw:
            # mu^(j) itself (used at s = 0 and by the derivative checks)
            term = (-1) ** j * poch(m, j) * (zeta / m) ** j * np.exp(-(m + j) * lx)
        else:
            term = poch(m, j) * np.exp(j * np.log(x) - (m + j) * lx)
        out[j] = np.sum(term * dens, axis=-1)
    return out


def scaled_derivs(fld: Field, s, a_L, a_N, K: int, n: int):
    """nu_j = (-s)^j mu^(j)(s) for j < K (nu_0 = -mu), shape (K,) + broadcast shape."""
    s, a_L, a_N = np.broadcast_arrays(np.asarray(s, float), np.asarray(a_L, float), np.asarray(a_N, float))
    shape = s.shape
    s, a_L, a_N = s.ravel(), a_L.ravel(), a_N.ravel()
    out = np.empty((K, s.size))
    step = max(1, _CHUNK // (10 * n))
    for i in range(0, s.size, step):
        sl = slice(i, i + step)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = _link_terms(fld, L, s[sl], a_L[sl], K, n) + _link_terms(fld, N, s[sl], a_N[sl], K, n)
        # s = 0: every nu_j with j >= 1 is exactly zero
        v[1:, s[sl] == 0] = 0.0
        out[:, sl] = v
    return out.reshape((K,) + shape)


def laplace_kernel(s: float, exclusion, K: int, cfg: NetworkConfig,
                   spec: QuadratureSpec = DEFAULT_SPEC, outer: float = None) -> LaplaceKernel:
    """Laplace exponent and derivatives at a single s.

    ``exclusion`` maps LinkType to the horizontal distance below which no
    interferer of that type exists.  ``outer`` optionally truncates the
    field at a horizontal radius (e.g. a finite simulation window); the
    default is the infinite plane.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    if K < 1:
        raise ValueError("K must be >= 1")
    fld = field_for(cfg)
    aL, aN = float(exclusion[L]), float(exclusion[N])
    if outer is not None and not outer > max(aL, aN):
        raise ValueError("outer radius must exceed the exclusion radii")

    def raw(sp, a_L, a_N):
        n = sp.laplace_order
        if s > 0:
            nu = scaled_derivs(fld, s, a_L, a_N, K, n)
            return np.array([-nu[0]] + [nu[j] / (-s) ** j for j in range(1, K)])
        # s = 0: derivatives are the (signed) moments of the interference
        with np.errstate(divide="ignore", invalid="ignore"):
            v = _link_terms(fld, L, 0.0, a_L, K, n, raw=True) + _link_terms(fld, N, 0.0, a_N, K, n, raw=True)
        v[0] = -v[0]
        return v

    def run(sp):
        v = raw(sp, aL, aN)
        if outer is not None:
            # [a, outer) = [a, inf) minus [outer, inf)
            v = v - raw(sp, float(outer), float(outer))
        return v

    mu, err = converge(run, spec, "Laplace exponent")
    nu = np.array([mu[j] * (-s) ** j for j in range(K)])
    nu[0] = -mu[0]
    return LaplaceKernel(float(s), {L: aL, N: aN}, mu, K, nu, err)


def coverage_sum_scaled(nu, K: int):
    """sum_{k<K} (-s)^k/k! L^(k)(s) from nu_j = (-s)^j mu^(j), vectorised over trailing axes.

    u_k = (-s)^k L^(k)/k! obeys u_k = (1/k) sum_{j<k} nu_{k-j}/(k-j-1)! u_j,
    which follows from L' = mu' L; all terms are non-negative.
    """
    u = [np.exp(-nu[0])]
    for k in range(1, K):
        acc = 0.0
        for j in range(k):
            acc = acc + nu[k - j] / factorial(k - j - 1) * u[j]
        u.append(acc / k)
    return np.clip(sum(u), 0.0, 1.0)


def coverage_sum(kernel: LaplaceKernel, s: float = None, K: int = None):
    """Truncated Gamma-tail sum sum_{k<K} (-s)^k/k! d^k/ds^k L(s), clamped to [0, 1]."""
    K = kernel.K if K is None else K
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > kernel.K:
        raise ValueError(f"kernel carries {kernel.K} derivative orders, {K} requested")
    if s is not None and s != kernel.s:
        raise ValueError("kernel was evaluated at a different s")
    if K == 1:
        return float(np.exp(kernel.mu_derivs[0]))
    nu = np.asarray(kernel.scaled, dtype=float).copy()
    nu[0] = -kernel.mu_derivs[0]
    return float(coverage_sum_scaled(nu, K))


@dataclass(frozen=True)
class GammaSurrogate:
    K_exact: float
    Theta_scale: float
    K_shape: int


def gamma_match(zeta0, zeta1, m) -> GammaSurrogate:
    """Two-moment Gamma fit of zeta0*g0 + zeta1*g1 with g_k ~ Gamma(m_k, 1/m_k).

    ``m`` is a single order (same link type) or a pair (m0, m1).  The integer
    shape used downstream is rounded up to its upper bound m0 + m1.
    """
    if not (zeta0 > 0 and zeta1 > 0):
        raise ValueError("gains must be positive")
    m0, m1 = (m, m) if np.ndim(m) == 0 else m
    mean = zeta0 + zeta1
    var = zeta0 ** 2 / m0 + zeta1 ** 2 / m1
    return GammaSurrogate(mean * mean / var, var / mean, int(m0 + m1))
