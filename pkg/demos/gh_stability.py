"""Gromov-Hausdorff distances between growing sprinkles of one diamond.

Search-mode values are upper bounds.  The final verdict uses the discrete
tolerance, which sprinkles this sparse can still miss.

    python3 demos/gh_stability.py
"""

from lorlab import ModelConfig, Region, sprinkle, stability_experiment

region = Region.flat_diamond(hi=(1.0, 0.0))
seq = [sprinkle(region, n, seed=0, include_tips=True) for n in (20, 40, 80)]
rep = stability_experiment(seq, ModelConfig(0.0), triangles=5, restarts=4, min_side=0.15)

print(rep.normalisation)
for i, j, mode, value, upper in rep.gh_rows:
    print(f"gh({rep.sizes[i]:3d}, {rep.sizes[j]:3d}) = {value:.4f}  ({mode}{', upper bound' if upper else ''})")
print(f"final comparison holds: {rep.final_holds}")
