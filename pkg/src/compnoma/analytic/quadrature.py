"""Fixed-order Gauss-Legendre panels with order doubling as the error estimate.

Every analytic quantity is computed as a nested tensor of GL rules.  The
whole nest is evaluated at half the base order and at the base order; the
difference is the reported error of the base-order value.  If it misses the
tolerance the order is doubled, up to ``max_depth`` times, and then
:class:`QuadratureError` is raised with the integral's name.

Semi-infinite Laplace integrals use the power map
``z = a + w (t**-k - 1)``, t in (0, 1], with ``k = 1/(alpha - 2)`` chosen so
the polynomial tail z**(1-alpha) dz becomes bounded in t.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-3
    abs_tol: float = 1e-5
    max_depth: int = 3          # number of allowed order doublings after the first comparison
    order: int = 8              # base GL order per panel, outer levels
    laplace_order: int = 16     # base GL order per panel of the Laplace integral
    tail_log: float = 40.0      # truncate outer ranges where the log-weight fell this far

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 0 or self.order < 2 or self.laplace_order < 2:
            raise ValueError("invalid quadrature orders")

    def scaled(self, level: int) -> "QuadratureSpec":
        # level -1 halves every order; it only serves as the error reference
        if level < 0:
            return QuadratureSpec(self.rel_tol, self.abs_tol, self.max_depth,
                                  max(self.order // 2, 2), max(self.laplace_order // 2, 2), self.tail_log)
        f = 2 ** level
        return QuadratureSpec(self.rel_tol, self.abs_tol, self.max_depth,
                              self.order * f, self.laplace_order * f, self.tail_log)


DEFAULT_SPEC = QuadratureSpec()


@functools.lru_cache(maxsize=64)
def gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panels(breaks, n):
    """GL nodes/weights over consecutive panels given by sorted ``breaks``."""
    b = np.asarray(breaks, dtype=float)
    b = b[np.concatenate([[True], np.diff(b) > 0])]
    x, w = gl(n)
    lo, hi = b[:-1, None], b[1:, None]
    half = (hi - lo) / 2
    return (lo + half * (x + 1)).ravel(), (half * w).ravel()


def mapped(lo, hi, n):
    """GL nodes on per-row intervals [lo, hi]; returns arrays of shape lo.shape + (n,)."""
    x, w = gl(n)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = np.maximum(hi - lo, 0.0) / 2
    return lo + half * (x + 1), half * w


def geometric_breaks(lo, hi, first, ratio=2.0):
    """lo, lo+first, lo+first*ratio, ... up to hi (inclusive)."""
    out = [lo]
    step = first
    while out[-1] + step < hi:
        out.append(out[-1] + step)
        step *= ratio
    out.append(hi)
    return out


# t-panels of the tail map; the far tail (small t) and the bulk near the
# exclusion edge (t -> 1) each get their own panels
TAIL_T_BREAKS = (0.0, 0.02, 0.1, 0.3, 0.6, 1.0)


def tail_nodes(a, w, k, n):
    """Nodes z and weights for the integral over [a, inf) with the power map.

    ``a`` and ``w`` broadcast to any shape S; result shape is S + (n*panels,).
    """
    t, wt = panels(TAIL_T_BREAKS, n)
    a = np.asarray(a, dtype=float)[..., None]
    w = np.asarray(w, dtype=float)[..., None]
    tk = t ** -k
    z = a + w * (tk - 1.0)
    dz = w * k * tk / t * wt
    return z, dz


def converge(fn, spec: QuadratureSpec, name: str):
    """Run ``fn(spec_at_level)`` with doubling orders until two agree.

    The first comparison is between half and base order; the higher-order
    value is returned and the difference reported as its (conservative)
    error.  ``fn`` may return a scalar or an array.
    """
    prev = np.asarray(fn(spec.scaled(-1)), dtype=float)
    err = np.inf
    for lvl in range(0, spec.max_depth + 1):
        cur = np.asarray(fn(spec.scaled(lvl)), dtype=float)
        diff = np.abs(cur - prev)
        err = float(np.nanmax(diff)) if diff.size else 0.0
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(cur))
        if np.all((diff <= tol) | ~np.isfinite(cur)):
            return cur if cur.ndim else float(cur), err
        prev = cur
    raise QuadratureError(f"{name}: no convergence after {spec.max_depth} doublings "
                          f"(last change {err:.3g})")
