"""Serving-distance densities, association probabilities and conditional densities.

For each AU class the joint event "serving BS(s) at these distances and
the class condition holds" has a density (``case_weight``).  Its integral
is the association probability; dividing by it gives the conditional
density.  Each class also fixes the interference-free zone seen by the
Laplace integral.  All outer variables are horizontal distances.

Class conditions (r = 3D distance, theta_v = theta^(1/alpha_v)):

  NonCompL  no LoS within theta_L r0, no NLoS within theta_N d_LN(r0)
  NonCompN  no NLoS within theta_N r0, no LoS within theta_L d_NL(r0)
  CompLL    r1 in (r0, theta_L r0), no NLoS within d_LN(r1)
  CompNN    r1 in (r0, theta_N r0), no LoS within d_NL(r1)
  CompLN    rn in (d_LN(rl), theta_N d_LN(rl)), no other LoS within d_NL(rn)
  CompNL    rl in (d_NL(rn), theta_L d_NL(rn)), no other NLoS within d_LN(rl)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..assoc import ClassKind
from ..netmodel import LinkType, NetworkConfig
from .field import Field, field_for
from .quadrature import DEFAULT_SPEC, QuadratureSpec, converge, gl, panels

L, N = LinkType.LOS, LinkType.NLOS
K_ = ClassKind


# -- densities of serving distances (3D) ------------------------------------

def nearest_pdf(link: LinkType, r, cfg: NetworkConfig):
    """Density of the 3D distance to the nearest BS of one link type (per m)."""
    fld = field_for(cfg)
    r = np.asarray(r, dtype=float)
    inside = r >= fld.dh
    z = fld.hz(r)
    out = np.where(inside, 2 * np.pi * fld.lam * r * fld.p(link, z) * np.exp(-fld.Lam(link, z)), 0.0)
    return float(out) if out.ndim == 0 else out


def nearest_cdf(link: LinkType, r, cfg: NetworkConfig):
    fld = field_for(cfg)
    return -np.expm1(-fld.Lam_r(link, r))


def _f3(fld, link, r):
    # 3D intensity 2 pi lambda r p_v(l(r))
    return 2 * np.pi * fld.lam * r * fld.p(link, fld.hz(r))


def joint_pdf(case: ClassKind, r0, r1, cfg: NetworkConfig):
    """Joint density of the two candidate serving distances (per m^2).

    CompLL / CompNN: (nearest, second nearest) of one type, r1 > r0.
    CompLN: (r_L0, r_N0) restricted to the LoS BS being the stronger one.
    CompNL: (r_N0, r_L0) restricted to the NLoS BS being the stronger one.
    The two mixed supports partition the quadrant, so their masses add up to
    the probability that both types are present.
    """
    fld = field_for(cfg)
    r0 = np.asarray(r0, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    ok = (r0 >= fld.dh) & (r1 >= fld.dh)
    if case is K_.COMP_LL or case is K_.COMP_NN:
        v = L if case is K_.COMP_LL else N
        ok &= r1 > r0
        val = _f3(fld, v, r0) * _f3(fld, v, r1) * np.exp(-fld.Lam_r(v, r1))
    elif case is K_.COMP_LN:
        ok &= r1 > np.maximum(fld.dh, fld.d_LN(r0))
        val = _f3(fld, L, r0) * _f3(fld, N, r1) * np.exp(-fld.Lam_r(L, r0) - fld.Lam_r(N, r1))
    elif case is K_.COMP_NL:
        ok &= r1 > fld.d_NL(r0)
        val = _f3(fld, N, r0) * _f3(fld, L, r1) * np.exp(-fld.Lam_r(N, r0) - fld.Lam_r(L, r1))
    else:
        raise ValueError(f"joint_pdf is defined for cooperative classes, got {case}")
    out = np.where(ok, val, 0.0)
    return float(out) if out.ndim == 0 else out


# -- per-class weights ------------------------------------------------------

def _outer_link(case):
    return case.links[0]


def case_weight(case: ClassKind, z0, z1, fld: Field):
    """Density in (z0[, z1]) of the class event with serving BSs at those distances.

    Returns (weight, a_L, a_N): the last two are the horizontal radii of the
    interference-free zone for each link type.  Arrays broadcast.
    """
    th = fld.cfg.theta
    tL, tN = th ** (1 / fld.cfg.alpha_L), th ** (1 / fld.cfg.alpha_N)
    r0 = fld.r3(z0)
    v0 = _outer_link(case)
    w = fld.density(v0, z0)
    if case is K_.NON_COMP_L:
        aL, aN = fld.hz(tL * r0), fld.hz(tN * fld.d_LN(r0))
    elif case is K_.NON_COMP_N:
        aN, aL = fld.hz(tN * r0), fld.hz(tL * fld.d_NL(r0))
    else:
        r1 = fld.r3(z1)
        w = w * fld.density(case.links[1], z1)
        if case is K_.COMP_LL:
            aL, aN = np.asarray(z1, float), fld.hz(fld.d_LN(r1))
        elif case is K_.COMP_NN:
            aN, aL = np.asarray(z1, float), fld.hz(fld.d_NL(r1))
        elif case is K_.COMP_LN:
            aN, aL = np.asarray(z1, float), fld.hz(fld.d_NL(r1))
        else:
            aL, aN = np.asarray(z1, float), fld.hz(fld.d_LN(r1))
    w = w * np.exp(-fld.Lam(L, aL) - fld.Lam(N, aN))
    return w, aL, aN


def inner_range(case: ClassKind, z0, fld: Field):
    """Horizontal range of the second serving BS given the first; also an interior breakpoint."""
    th = fld.cfg.theta
    tL, tN = th ** (1 / fld.cfg.alpha_L), th ** (1 / fld.cfg.alpha_N)
    r0 = fld.r3(z0)
    z0 = np.asarray(z0, float)
    if case is K_.COMP_LL:
        lo, hi = z0, fld.hz(tL * r0)
        brk = fld.hz(fld.l_LN)          # NLoS void radius d_LN(r1) leaves dh here
    elif case is K_.COMP_NN:
        lo, hi = z0, fld.hz(tN * r0)
        brk = None
    elif case is K_.COMP_LN:
        dl = fld.d_LN(r0)
        lo, hi = fld.hz(dl), fld.hz(tN * dl)
        brk = None
    elif case is K_.COMP_NL:
        dn = fld.d_NL(r0)
        lo, hi = fld.hz(dn), fld.hz(tL * dn)
        brk = None
    else:
        raise ValueError(case)
    mid = (lo + hi) / 2 if brk is None else np.clip(brk, lo, hi)
    return lo, mid, hi


def outer_breaks(case: ClassKind, fld: Field, spec: QuadratureSpec):
    """Panel breakpoints in z0 covering the class's outer support."""
    th = fld.cfg.theta
    tL = th ** (1 / fld.cfg.alpha_L)
    kinks = [fld.hz(fld.l_LN), fld.hz(fld.l_LN / tL)]
    lo = 0.0
    if case is K_.COMP_LN:
        lo = float(fld.hz(fld.l_LN / tL))      # below this no NLoS BS can be a close runner-up
    hi = outer_cutoff(case, fld, spec)
    b = [lo]
    step = fld.dh / 4
    while b[-1] + step < hi:
        b.append(b[-1] + step)
        step *= 1.6
    b.append(hi)
    b += [k for k in kinks if lo < k < hi]
    return np.unique(np.array(b, dtype=float))


def outer_cutoff(case: ClassKind, fld: Field, spec: QuadratureSpec):
    """Largest z0 where the class density can still matter.

    Upper bound on the log-density: no BS stronger than the first serving BS.
    """
    z = np.geomspace(1.0, fld.Z_MAX, 4000)
    r = fld.r3(z)
    v0 = _outer_link(case)
    if v0 is L:
        lb = np.log(fld.density(L, z)) - fld.Lam(L, z) - fld.Lam(N, fld.hz(fld.d_LN(r)))
    else:
        lb = np.log(fld.density(N, z)) - fld.Lam(N, z) - fld.Lam(L, fld.hz(fld.d_NL(r)))
    keep = z[lb > lb.max() - spec.tail_log]
    return float(keep[-1])


@dataclass
class CaseNodes:
    """Flattened quadrature nodes of one class: weights already include the density."""
    case: ClassKind
    w: np.ndarray
    z0: np.ndarray
    z1: np.ndarray      # nan for non-cooperative classes
    a_L: np.ndarray
    a_N: np.ndarray

    @property
    def mass(self):
        return float(self.w.sum())


def case_nodes(case: ClassKind, fld: Field, spec: QuadratureSpec) -> CaseNodes:
    n = spec.order
    if case.is_comp and fld.cfg.theta == 1.0:
        e = np.zeros(0)
        return CaseNodes(case, e, e, e, e, e)
    z0, w0 = panels(outer_breaks(case, fld, spec), n)
    if not case.is_comp:
        w, aL, aN = case_weight(case, z0, None, fld)
        return CaseNodes(case, w * w0, z0, np.full_like(z0, np.nan), aL, aN)
    lo, mid, hi = inner_range(case, z0, fld)
    x, wx = gl(n)
    # two panels per outer node: [lo, mid] and [mid, hi]
    h1, h2 = (mid - lo)[:, None] / 2, (hi - mid)[:, None] / 2
    z1 = np.concatenate([lo[:, None] + h1 * (x + 1), mid[:, None] + h2 * (x + 1)], axis=1)
    wz1 = np.concatenate([h1 * wx, h2 * wx], axis=1)
    Z0 = np.broadcast_to(z0[:, None], z1.shape)
    w, aL, aN = case_weight(case, Z0, z1, fld)
    W = w * wz1 * w0[:, None]
    keep = W > 0
    return CaseNodes(case, W[keep], Z0[keep], z1[keep], aL[keep], aN[keep])


def assoc_prob(case: ClassKind, cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_SPEC, with_error=False):
    fld = field_for(cfg)
    val, err = converge(lambda sp: case_nodes(case, fld, sp).mass, spec, f"association probability {case.value}")
    return (val, err) if with_error else val


def assoc_probs(cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> dict:
    return {k: assoc_prob(k, cfg, spec) for k in ClassKind}


def conditional_pdf(case: ClassKind, distances, cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_SPEC):
    """Density of the serving 3D distance(s) given the AU is in ``case``.

    ``distances`` is r0 for non-cooperative classes and (r0, r1) otherwise,
    ordered strongest first.  Zero outside the class support.
    """
    fld = field_for(cfg)
    A = assoc_prob(case, cfg, spec)
    if A <= 1e-12:
        raise ValueError(f"class {case.value} has (numerically) zero probability; conditioning undefined")
    th = cfg.theta
    tL, tN = th ** (1 / cfg.alpha_L), th ** (1 / cfg.alpha_N)
    if not case.is_comp:
        r0 = np.asarray(distances, dtype=float)
        z0 = fld.hz(r0)
        w, _, _ = case_weight(case, z0, None, fld)
        # horizontal -> 3D density: dz/dr = r/z
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.where(r0 > fld.dh, w * r0 / np.where(z0 > 0, z0, 1.0), 0.0)
        return dens / A
    r0, r1 = (np.asarray(d, dtype=float) for d in distances)
    z0, z1 = fld.hz(r0), fld.hz(r1)
    lo, _, hi = inner_range(case, z0, fld)
    ok = (r0 > fld.dh) & (r1 > fld.dh) & (z1 > lo) & (z1 < hi)
    if case is K_.COMP_LN:
        ok &= r0 > fld.l_LN / tL
    w, _, _ = case_weight(case, z0, z1, fld)
    with np.errstate(divide="ignore", invalid="ignore"):
        jac = r0 * r1 / (np.where(z0 > 0, z0, 1.0) * np.where(z1 > 0, z1, 1.0))
    return np.where(ok, w * jac, 0.0) / A
