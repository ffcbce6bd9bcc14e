"""
Two ways to the same number
===========================

Association shares and coverage of the typical aerial user, computed once
by simulation and once by numerical integration, side by side.
"""

import numpy as np

from compnoma.analytic import assoc_probs, coverage_breakdown, coverage_tu
from compnoma.mcharness import estimate_assoc_freq, estimate_coverage
from compnoma.netmodel import NetworkConfig, db_to_linear
from compnoma.sirlab import Scheme

cfg = NetworkConfig()          # reference operating point
n, seed = 5000, 7

# which kind of serving set does the aerial user end up with?
an = assoc_probs(cfg)
mc = estimate_assoc_freq(cfg, n, seed)
print("class       analytic    MC")
for k in an:
    print(f"{k.value:10s} {an[k]:9.4f} {mc[k]:7.4f}")

# coverage at a few thresholds; the MC window is 4 km, so a small
# positive bias of the MC values is expected for the far-field LoS part
T_dB = np.array([-10.0, -5.0, 0.0, 5.0])
T = db_to_linear(T_dB)
overall, parts, err = coverage_breakdown(T, cfg, Scheme.COMP_NOMA)
sim = estimate_coverage(cfg, Scheme.COMP_NOMA, T, n, seed)
print("\nT [dB]   AU analytic  AU MC    TU analytic  TU MC")
for i, t in enumerate(T_dB):
    print(f"{t:6.1f} {overall[i]:11.4f} {sim.overall[i]:8.4f} "
          f"{coverage_tu(T[i], cfg):11.4f} {sim.tu[i]:8.4f}")
print(f"(quadrature error estimate {err:.1e})")
