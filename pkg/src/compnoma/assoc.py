"""Strongest-average-RSS association and the six AU classes.

The AU ranks every candidate BS by its average RSS eta_v r^-alpha_v (fading
averaged out, transmit power cancels).  If the best beats the runner-up by
at least ``theta`` the AU is served alone, otherwise by both.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .netmodel import LinkType, NetworkConfig
from .pointfield import NeighborSummary

L, N = LinkType.LOS, LinkType.NLOS


class ClassKind(enum.Enum):
    NON_COMP_L = "NonCompL"
    NON_COMP_N = "NonCompN"
    COMP_LL = "CompLL"
    COMP_NN = "CompNN"
    COMP_LN = "CompLN"
    COMP_NL = "CompNL"

    @property
    def is_comp(self) -> bool:
        return self.name.startswith("COMP")

    @property
    def links(self):
        tag = self.value[-2:] if self.is_comp else self.value[-1]
        return tuple(L if c == "L" else N for c in tag)


CLASS_ORDER = list(ClassKind)
_PAIR_KIND = {(L, L): ClassKind.COMP_LL, (N, N): ClassKind.COMP_NN,
              (L, N): ClassKind.COMP_LN, (N, L): ClassKind.COMP_NL}


class DegenerateRealization(ValueError):
    """No BS at all around the AU."""


@dataclass(frozen=True)
class ServingSet:
    """Serving BSs as (3D distance, link), strongest average RSS first."""

    members: tuple

    def __len__(self):
        return len(self.members)

    @property
    def distances(self):
        return tuple(m[0] for m in self.members)


@dataclass(frozen=True)
class AuClass:
    kind: ClassKind
    r0: float
    r1: Optional[float] = None
    i0: int = -1     # realization indices of the serving BSs
    i1: int = -1

    @property
    def serving(self) -> ServingSet:
        links = self.kind.links
        if self.kind.is_comp:
            return ServingSet(((self.r0, links[0]), (self.r1, links[1])))
        return ServingSet(((self.r0, links[0]),))


def _rss(r, link, cfg):
    eta, alpha, _ = cfg.link_params(link)
    return eta * r ** -alpha


def ranked_candidates(nbrs: NeighborSummary, cfg: NetworkConfig):
    cands = []
    for r, link, i in ((nbrs.r_L0, L, nbrs.i_L0), (nbrs.r_L1, L, nbrs.i_L1),
                       (nbrs.r_N0, N, nbrs.i_N0), (nbrs.r_N1, N, nbrs.i_N1)):
        if r is not None:
            cands.append((_rss(r, link, cfg), link, r, i))
    # ties go to LoS, then to the nearer BS
    cands.sort(key=lambda c: (-c[0], c[1] is not L, c[2]))
    return cands


def classify_au(nbrs: NeighborSummary, cfg: NetworkConfig) -> AuClass:
    cands = ranked_candidates(nbrs, cfg)
    if not cands:
        raise DegenerateRealization("no BS in the window; cannot associate the AU")
    z0, l0, r0, i0 = cands[0]
    if len(cands) == 1 or z0 >= cfg.theta * cands[1][0]:
        kind = ClassKind.NON_COMP_L if l0 is L else ClassKind.NON_COMP_N
        return AuClass(kind, r0, None, i0, -1)
    _, l1, r1, i1 = cands[1]
    return AuClass(_PAIR_KIND[(l0, l1)], r0, r1, i0, i1)


def tu_serving_distance(cfg: NetworkConfig, rng, size=None):
    """Nearest-BS 3D distance of the typical TU, sampled by inverting its CDF."""
    e = rng.exponential(1.0, size)
    return np.sqrt(cfg.dh_t ** 2 + e / (np.pi * cfg.lambda_b))


def tu_serving_cdf(r, cfg: NetworkConfig):
    r = np.asarray(r, dtype=float)
    return np.where(r < cfg.dh_t, 0.0, -np.expm1(-np.pi * cfg.lambda_b * (r * r - cfg.dh_t ** 2)))
