"""Null distance on a flat sprinkle, compared with the coordinate-time gap.

For causally related points the null distance equals |T(q) - T(p)|; for
spacelike pairs it is larger.

    python3 demos/null_distance_sprinkle.py
"""

import numpy as np

from lorlab import NullDistance, Region, coordinate_time, diamond_diameter, sprinkle

space = sprinkle(Region.flat_diamond(hi=(2.0, 0.0)), 300, seed=4, include_tips=True)
T = coordinate_time(space)
D = NullDistance(space, T).matrix
t = T.values
gap = np.abs(t[:, None] - t[None, :])

causal = space.tau_matrix > 0
spacelike = ~(causal | causal.T) & ~np.eye(space.n, dtype=bool)
print(f"points {space.n}")
print(f"causal pairs: max |D - dT| = {np.max(np.abs(D - gap)[causal]):.2e}")
print(f"spacelike pairs: mean D / dT = {np.mean(D[spacelike] / np.maximum(gap[spacelike], 1e-12)):.2f}")
print(f"diamond diameter between the tips: {diamond_diameter(space, T, 0, space.n - 1):.4f}")
