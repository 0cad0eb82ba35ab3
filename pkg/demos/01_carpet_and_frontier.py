"""A carpet, its three reference measures and the entropy frontier."""
import math

import numpy as np

from carpetdim import carpet_from_counts, distinguished_measures, mcmullen_dimension, bernoulli_dimension
from carpetdim.frontier import frontier_samples, phi, psi, reference_row_entropies

# 3 columns out of N=3, with 5, 2 and 8 of the M=8 rows kept
spec = carpet_from_counts(3, 8, [5, 2, 8])
print("D =", spec.D, " R =", spec.R, " tau =", round(spec.tau, 6))

p_D, p_R, p_d = distinguished_measures(spec)
for name, p in [("p_D", p_D), ("p_R", p_R), ("p_d", p_d)]:
    print(f"{name}: h = {p.h:.6f}  h_r = {p.h_r:.6f}  dim = {bernoulli_dimension(spec, p):.6f}")

# p_d attains the McMullen dimension
print("McMullen dimension:", mcmullen_dimension(spec))

# decreasing branch of psi, between h_r(p_D) and log R
hr_D, hr_d, log_R = reference_row_entropies(spec)
print("\n     z        psi(z)    beta")
for fp in frontier_samples(spec, 9):
    print(f"{fp.z:9.6f} {fp.psi:9.6f} {fp.beta:7.4f}")

# phi undoes psi on that branch
z = 0.5 * (hr_D + log_R)
print("\nphi(psi(z)) - z =", phi(spec, psi(spec, z)) - z)

# the Bernoulli dimension along the frontier peaks at h_r(p_d)
zs = np.linspace(hr_D, log_R, 2001)
g = [(psi(spec, x) + (spec.tau - 1) * x) / spec.log_M for x in zs]
print("argmax along frontier:", zs[int(np.argmax(g))], " h_r(p_d):", hr_d)
