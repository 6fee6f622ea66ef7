"""The iid benchmark: sqrt(n) * W1(F_n, F) against the Brownian bridge.

For iid draws the statistic converges in law to the integral of |B(F(t))|
with B a Brownian bridge; for Uniform(0,1) the limit mean is
sqrt(2 pi) / 8 = 0.313329.  Two independent routes sample the limit: the
bridge recursion and a Gaussian vector drawn from the bridge covariance on a
grid.  Both must agree with each other and with the finite-n Monte Carlo.
"""
import math

import numpy as np

from w1clt import (
    ExperimentConfig,
    IID,
    Uniform,
    brownian_bridge_oracle,
    compare_distributions,
    covariance_iid,
    ks_two_sample,
    quantile_grid,
    run_clt_experiment,
    sample_limit_functional,
)

model = Uniform(0, 1)
target = math.sqrt(2 * math.pi) / 8

print("== finite-n statistics ==")
cfg = ExperimentConfig(
    process=IID(model), n_values=[100, 1000, 10_000], replications=500,
    base_seed=11, reference_model=model,
)
samples = run_clt_experiment(cfg, threads=4)
for n, s in samples.items():
    print(f"  n={n:>6}: mean(T_n) = {np.mean(s.values):.4f}   "
          f"(limit mean {target:.4f})")

print("\n== two limit samplers, R = 20000 ==")
bridge = brownian_bridge_oracle(model, 20_000, mesh=256, seed=1)
cg = covariance_iid(model, quantile_grid(model, 256))
direct = sample_limit_functional(cg, 20_000, seed=2)
print(f"  bridge recursion mean   = {np.mean(bridge.values):.4f}")
print(f"  covariance route mean   = {np.mean(direct.values):.4f}")
print(f"  KS between the two      = {ks_two_sample(bridge.values, direct.values):.4f}")

print("\n== finite n against the limit ==")
rep = compare_distributions(samples[10_000], bridge)
print(f"  {rep.verdict}")
