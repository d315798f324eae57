# %% [markdown]
# # 1/f^alpha spectrum of requests per second
#
# The counts-per-second series of one simulated year is split into
# 2^20-second segments; the averaged periodogram is log-binned and fitted
# between 1e-6 and 1e-3 Hz. A fractal renewal process with k = 0.3 should
# give alpha near 0.3.

# %%
from arrivalkit.generator import GeneratorConfig, simulate
from arrivalkit.signal import counts_per_second, power_spectrum, powerlaw_noise, spectral_slope

series = counts_per_second(simulate(GeneratorConfig(seed=0)))
spec = power_spectrum(series, segment_length=2**20, bins_per_decade=10)
fit = spectral_slope(spec, (1e-6, 1e-3))
print("%d segments of %d s; alpha = %.3f +/- %.3f (r^2 %.3f)"
      % (spec.n_segments, spec.segment_length, fit.exponent, fit.std_error, fit.r_squared))

# %%
for f, p in list(zip(spec.freqs, spec.power))[::6]:
    print("  f=%9.3g Hz  S(f)=%.4g" % (f, p))

# %% [markdown]
# Sanity check on a series synthesized with a known exponent.

# %%
x = powerlaw_noise(2**22, 0.5, rng=3)
print("synthetic alpha=0.5 recovered as %.3f" % spectral_slope(power_spectrum(x, 2**18), (1e-5, 1e-2)).exponent)
