"""Local dimensions of the piecewise Bernoulli measure mu_n at its six scales."""
from carpetdim import DimParams, carpet_from_counts, maximize, scale_table
from carpetdim.symdyn import heuristic_schedule, sample_word, target_word

spec = carpet_from_counts(3, 8, [5, 2, 8])
params = DimParams.ball(1.0, 0.8)
quad = maximize(spec, params).vectors

n = 3000
f = int(params.alpha * n)
sched = heuristic_schedule(spec, n, f, target_word(spec, f, params.H), quad, "ball")
print("block boundaries:", sched.boundaries.tolist())
print("block kinds:     ", [b.kind for b in sched.blocks], "+ tail")

word = sample_word(sched, 40, seed=0)
print("first symbols of a sampled word:", word.format())

# predicted d_i against Monte-Carlo means; expect agreement up to O(1/n) effects
print("\n i       m   predicted  simulated")
for row in scale_table(spec, params, quad, n, n_words=40, seed=0):
    print(f"{row.index:2d} {row.m:8d}  {row.predicted:9.5f}  {row.simulated:9.5f}")
