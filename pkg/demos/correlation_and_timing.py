"""
Frequency correlation of the channel models
===========================================

A tapped-delay channel's frequency correlation is the DFT of its power delay
profile. This walk-through builds the three tap tables on the 512-point grid,
checks that Monte Carlo channels reproduce their correlation, and shows how a
timing offset turns into a phase ramp on the correlation.
"""

# %%
# Model correlations
# ------------------
# Tap delays are rounded to the 100 ns sampling grid before the transform.

import numpy as np

from enhanced_lmmse import OfdmConfig, get_model, model_correlation, robust_correlation
from enhanced_lmmse.channel import build_cir, cir_to_cfr
from enhanced_lmmse.experiments import timing_average, timing_shift
from enhanced_lmmse.correlation import StoDistribution

grid = OfdmConfig.standard(408)
for name in ("office_b", "pedestrian_a", "pedestrian_b"):
    model = get_model(name)
    r = model_correlation(model, grid)
    print(f"{name:13s} delays {model.sample_delays(grid.sample_time).tolist()}  "
          f"|r[1]|={abs(r.r[1]):.3f}  |r[16]|={abs(r.r[16]):.3f}")

robust = robust_correlation(grid.cp_len, grid)
print(f"robust (flat over the CP)  |r[1]|={abs(robust.r[1]):.3f}  |r[16]|={abs(robust.r[16]):.3f}")

# %%
# Monte Carlo check
# -----------------
# Sample correlations of generated responses converge to the model values.

rng = np.random.default_rng(0)
model = get_model("pedestrian_b")
cfrs = np.array([cir_to_cfr(build_cir(model, grid, rng), grid) for _ in range(3000)])
r = model_correlation(model, grid).r
for lag in (1, 4, 16):
    # carriers 52..255 are contiguous, so index differences are lags
    emp = np.mean(cfrs[:, lag:200] * cfrs[:, : 200 - lag].conj())
    print(f"lag {lag:2d}: sample {emp:.3f}   model {r[lag]:.3f}")

# %%
# Timing offsets
# --------------
# An FFT window placed early by theta samples delays the channel and rotates
# the correlation at lag dk by -2*pi*dk*|theta|/512. Averaging over the
# offset distribution keeps the magnitude only where all offsets agree.

base = model_correlation(get_model("office_b"), grid)
shifted = timing_shift(base, -6, grid)
averaged = timing_average(base, StoDistribution.uniform(-10, 0), grid)
for lag in (8, 32, 64):
    print(f"lag {lag:2d}: |r|={abs(base.r[lag]):.3f}  shifted phase "
          f"{np.angle(shifted.r[lag] / base.r[lag]):+.3f} rad  averaged |r|={abs(averaged.r[lag]):.3f}")
