"""Check one flat triangle against the three model curvatures.

Flat space satisfies the comparison conditions against K=0 (with zero margin)
and K=+1, and fails them against K=-1.  Every checker agrees on the verdict.

    python3 demos/flat_comparison.py
"""

from lorlab import AnalyticSpace, ModelConfig, make_triangle
from lorlab.comparison import check_triangle_all_modes

space = AnalyticSpace.flat(hi=(4.0, 0.0))
p, q, r = (0.2, 0.0), (1.3, 0.6), (2.5, 0.1)

for K in (-1.0, 0.0, 1.0):
    cfg = ModelConfig(K)
    tri = make_triangle(space, p, q, r, cfg)
    rep = check_triangle_all_modes(space, tri, cfg)
    print(f"K={K:+.0f}  holds={rep.holds}")
    for e in rep.entries:
        print(f"    {e.mode:8s} vertex={e.vertex}  margin={e.margin:+.3e}")
