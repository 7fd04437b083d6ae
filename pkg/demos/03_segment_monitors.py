"""A walk reflected on the segment {-3, ..., 0} started from a prepared configuration.

The prepared configuration puts N visits on 0 and -1 and as many on -2 and -3 as
two W-constraints allow.  The monitor U(n) = W(Z(-3)) - W(Z(-1))/2 is then tracked.

    python3 demos/03_segment_monitors.py
"""

from vrrw import (InitialConfig, WeightSpec, beta_envelope, center_dominance, eqW_residual,
                  new_walk, run, u_monitor)
from vrrw.simulator import build_CNEtaBeta

spec = WeightSpec.linear()
cfg = build_CNEtaBeta(spec, N=100, eta=0.5, beta=0.5)
print("initial local times:", cfg.mapping)

rec = run(new_walk(cfg, spec, bounds=(-3, 0), seed=1, track="all"), 10**6,
          [10**k for k in range(1, 6)])
mon = u_monitor(rec)
for n, u, s in zip(mon.ns, mon.values, mon.summary["running_sup"]):
    print(f"  n={n:>8d}  U={u:+.4f}  sup so far {s:+.4f}")
print("largest identity residual at -2 and -1:",
      max(eqW_residual(rec, x).summary["max"] for x in (-2, -1)))

free = run(new_walk(InitialConfig.C0(), spec, seed=1), 10**6, [10**k for k in range(1, 6)])
print("center dominance on Z:", center_dominance(free).values)
print("beta envelope sup W(Z(c)) - 2 W(Z(c-2)):", beta_envelope(free))
