# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # From raw acceleration to window features
#
# A dive is a long, high-frequency curve. Each two-second window (h = 100
# samples at 50 Hz) is reduced to two numbers: its mean, and its
# "wiggliness", the energy in the first ten Fourier frequencies.
#
# Here we build a synthetic curve with known Fourier coefficients, push it
# through the feature pipeline, and check that the features match the
# coefficients we started from.

# +
import numpy as np

from carhhmm.features import FeatureConfig, RawSeries, extract_dives, window_transform
from carhhmm.simulate import DESIGN_SPECTRAL, reconstruct_raw

np.set_printoptions(precision=4, suppress=True)
# -

# Subdive states alternate between a calm state (0) and an active state (1).

states = np.array([0] * 6 + [1] * 6 + [0] * 3)
curve, coeffs = reconstruct_raw(states, seed=7, spectral=DESIGN_SPECTRAL)
print("samples:", curve.size, " windows:", states.size)

# Windowing recovers the DC coefficient (divided by h) and the summed energies.

feats = window_transform(curve, FeatureConfig(window_h=100, max_freq_omega=10))
energy = coeffs.energies[:, :10].sum(axis=1)
print("wiggliness   :", feats.wiggliness)
print("sum of b(k)  :", energy)
print("max rel. err :", np.max(np.abs(feats.wiggliness - energy) / energy))
print("window means :", feats.avg[:, 0])
print("DC / h       :", coeffs.dc / 100)

# The active state has far more high-frequency energy:

for k in (0, 1):
    print(f"state {k}: median wiggliness {np.median(feats.wiggliness[states == k]):9.1f}")

# ## Segmenting a tag record into dives
#
# With a depth channel, samples deeper than 0.5 m form dives; a short
# centred moving average removes sensor noise first. Dives shorter than
# one window keep their duration but have no windows.

# +
rate = 50.0
surface = np.zeros(250)
depth = np.concatenate([surface, np.full(curve.size, 8.0), surface, np.full(600, 3.0), surface])
acc = np.concatenate([surface, curve, surface, np.zeros(600), surface])
record = RawSeries(rate, acc, depth)

for dive in extract_dives(record, FeatureConfig()):
    print(f"dive {dive.dive_id}: {dive.duration_s:6.2f} s, {dive.n_windows} windows")
# -
