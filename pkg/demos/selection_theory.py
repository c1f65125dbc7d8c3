"""
How reliable is a single comparison?
====================================

Two candidates are compared by their sampled noise MSE. If the per-carrier
errors are independent Gaussians, the index is a scaled chi-square variable
with 2K degrees of freedom, which gives the probability that the worse
candidate wins and the smallest gap that can be told apart.
"""

# %%
# False-comparison probability
# ----------------------------

from enhanced_lmmse import OfdmConfig, get_model, model_correlation
from enhanced_lmmse.correlation import ParameterSet
from enhanced_lmmse.theory import (average_gain_bound, empirical_false_comparison,
                                   false_comparison_probability, fuzzy_bound)

print("alpha   K=10    K=40    K=160   K=408")
for alpha in (0.0, 0.05, 0.1, 0.2, 0.4):
    row = [false_comparison_probability(alpha, k) for k in (10, 40, 160, 408)]
    print(f"{alpha:4.2f}  " + "  ".join(f"{v:.4f}" for v in row))

# %%
# Fuzzy bound
# -----------
# The gap at which the false-comparison probability falls to 0.25, and the
# resulting lower bound on the average scaled MSE change of selecting.

for k in (40, 165, 408):
    b = fuzzy_bound(0.25, k)
    print(f"K={k:3d}: B_0.25={b:.4f}  average-gain bound {average_gain_bound(b, 0.25):+.4f}")

# %%
# Simulation against theory
# -------------------------
# Office B against Pedestrian B on 160 carriers, Office B channel. The
# measured frequency stays under the theoretical value.

grid = OfdmConfig.standard(160)
omega = ParameterSet([model_correlation(get_model(n), grid) for n in ("office_b", "pedestrian_b")])
for snr in (0.0, 4.0, 8.0):
    res = empirical_false_comparison(omega, "office_b", snr, grid, trials=300)
    print(f"{snr:3.0f} dB: alpha={res.alpha:.3f}  simulated {res.frequency:.3f}  "
          f"theory {res.theoretical:.3f}")
