"""
How much cooperation pays
=========================

Raising the cooperation threshold turns more aerial users into CoMP users.
Their rate rises, the non-cooperative share shrinks, and the total levels
off once nearly everyone cooperates.
"""

from dataclasses import replace

from compnoma.analytic import rate_totals
from compnoma.mcharness import estimate_rate
from compnoma.netmodel import NetworkConfig, db_to_linear
from compnoma.sirlab import Scheme

base = NetworkConfig()

print("theta[dB]  R_u_NC   R_u_C    R_t      R        R (MC)")
for th in (0, 2, 4, 8, 12, 16):
    cfg = replace(base, theta=db_to_linear(th))
    r = rate_totals(cfg)
    m = estimate_rate(cfg, Scheme.COMP_NOMA, 3000, 1)
    print(f"{th:6d}   {r['R_u_NC']:7.3f}  {r['R_u_C']:7.3f}  {r['R_t']:7.3f}  {r['R']:7.3f}  "
          f"{m.R_total:7.3f} +- {m.ci['R_total']:.3f}")

# the baselines for comparison; OMA splits the resource block in two
for s in Scheme:
    print(f"{s.value:9s} total rate {rate_totals(base, s)['R']:.3f} bit/s/Hz")
