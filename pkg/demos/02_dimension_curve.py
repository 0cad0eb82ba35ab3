"""DIM(alpha) for cylinder and ball targets on the 3x8 carpet."""
import math

import numpy as np

from carpetdim import DimParams, carpet_from_counts, large_alpha_threshold, large_alpha_value, maximize, mcmullen_dimension

spec = carpet_from_counts(3, 8, [5, 2, 8])
A = large_alpha_threshold(spec)
print(f"McMullen dimension {mcmullen_dimension(spec):.6f}; closed form holds beyond alpha = {A:.4f}\n")

print(" alpha   cylinder   ball(H=0.8)  active(ball)")
for alpha in [0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 4.0]:
    cyl = maximize(spec, DimParams.cylinder(alpha))
    ball = maximize(spec, DimParams.ball(alpha, 0.8))
    act = ",".join(map(str, sorted(ball.breakdown.active)))
    print(f"{alpha:6.2f}  {cyl.value:9.6f}  {ball.value:11.6f}   {act}")

# past the threshold both kinds agree with log D / ((1 + alpha) log N)
alpha = 2 * A
print("\nat alpha = 2A:", maximize(spec, DimParams.ball(alpha, 0.8)).value, large_alpha_value(spec, alpha))

# the maximizing vectors, as row marginals
res = maximize(spec, DimParams.ball(0.5, 0.8))
for name, p in zip(["p-", "p1", "p2", "p+"], res.vectors):
    print(name, np.round(p.rows, 4))
