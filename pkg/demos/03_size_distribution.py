# %% [markdown]
# # Fitting the modified power law to a size CCDF

# %%
import numpy as np

from arrivalkit.distributions import size_ccdf
from arrivalkit.estimators import fit_q_exponential
from arrivalkit.generator import sample_q_exponential_size

rng = np.random.default_rng(1)
sizes = sample_q_exponential_size(1 - rng.random(100_000), 7.9e5, 0.76)
ccdf = size_ccdf(sizes)
print("distinct sizes:", len(ccdf.sizes), " N(>0) =", ccdf.total)

# %%
fit = fit_q_exponential(ccdf)
print("S*        = %.3g +/- %.2g" % (fit.s_star, fit.std_errors["s_star"]))
print("gamma - 1 = %.3f +/- %.3f" % (fit.gamma_minus_1, fit.std_errors["gamma_minus_1"]))
print("fit used %d points in [%g, %g] bytes" % (fit.n_points, *fit.fit_range))

# %% [markdown]
# Gauss-Newton errors treat the cumulative points as independent and come
# out optimistic. Resampling the sizes gives a more honest spread.

# %%
boot = fit_q_exponential(ccdf, bootstrap=50, seed=2)
print("bootstrap: S* +/- %.2g, gamma-1 +/- %.3f" % (boot.std_errors["s_star"], boot.std_errors["gamma_minus_1"]))
