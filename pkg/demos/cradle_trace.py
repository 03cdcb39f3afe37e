"""Print the cat's cradle sequences for a flat triangle as a small table.

    python3 demos/cradle_trace.py [K]
"""

import sys

from lorlab import AnalyticSpace, ModelConfig, cats_cradle, make_triangle

K = float(sys.argv[1]) if len(sys.argv) > 1 else 0.0
cfg = ModelConfig(K)
space = AnalyticSpace.flat(hi=(4.0, 0.0))
tri = make_triangle(space, (0.0, 0.0), (1.0, 0.5), (2.0, 0.0), cfg)
trace = cats_cradle(space, tri, cfg, eps=0.25)

print(f"K={K:+g}  tau(p, r)={trace.tau_pr:.6f}  steps={trace.steps}")
print("n\tl\tmodel_side")
for n, (l, m) in enumerate(zip(trace.l, trace.model_side)):
    print(f"{n}\t{l:.6f}\t{m:.6f}")
print(f"initial excess {trace.initial_excess:+.4f}  LS5 {trace.ls5_ok()}  LS6 {trace.ls6_ok()}")
