# %% [markdown]
# # Per-user waiting times and their autocorrelation
#
# Every simulated stream plays the role of one user. Their own gaps follow
# the truncated power law, so the pooled density should fall off as
# t^-(1+k) = t^-1.3 between a minute and a day.

# %%
import numpy as np

from arrivalkit.distributions import busiest_user, log_binned_density, per_user_intervals, user_intervals
from arrivalkit.estimators import density_slope
from arrivalkit.generator import GeneratorConfig, simulate
from arrivalkit.signal import autocorrelation, noise_band, shuffle_intervals

log = simulate(GeneratorConfig(seed=0))
pooled = per_user_intervals(log, min_requests=4)
slope = density_slope(log_binned_density(pooled), (60, 86400))
print("%d users, %d gaps; density exponent %.2f +/- %.2f" % (pooled.label, len(pooled), slope.exponent, slope.std_error))

# %% [markdown]
# A renewal stream has independent gaps, so its autocorrelation should sit
# inside the noise band at every lag, before and after shuffling.

# %%
user = busiest_user(log)
own = user_intervals(log, user)
tau_max = min(50, len(own) - 1)
for label, seq in (("original", own), ("shuffled", shuffle_intervals(own, 0))):
    acf = autocorrelation(seq, tau_max)
    inside = np.mean(np.abs(acf.values[1:]) < noise_band(acf))
    print("user %s %s: n=%d, %.0f%% of lags inside 3a(0)/sqrt(n)" % (user, label, acf.n, 100 * inside))
