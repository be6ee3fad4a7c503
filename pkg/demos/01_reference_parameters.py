# %% [markdown]
# # From laboratory numbers to squeezing
#
# A warm-vapour cavity with g = (2 pi) 100 kHz, gamma = kappa = 100 g,
# Omega = 1e4 g, Delta = 1e5 g, delta = 500 g, N = 5e6 atoms and a 0.3 us
# pulse.  What coupling and decay does that buy, and how much squeezing?

# %%
from cavsqueeze import derive_effective, reference_params
from cavsqueeze.gaussian import xi2_oat_noisy, xi2_tat_noisy

p = reference_params()
eff = derive_effective(p)
print(f"alpha = {eff.alpha:.3f}   eta0 = {eff.eta0:.4f}   r0 = {eff.r0:.2f}   d_c = {eff.d_c:.0f}")

# %% [markdown]
# Advisory flags say which approximations are safe.  Note the light shift:
# chi0 is half of delta here, which the mean-field demo comes back to.

# %%
for name, ok in sorted(eff.regime_flags.items()):
    print(f"  {name:<18} {'ok' if ok else 'violated'}")

# %%
for label, res in (("OAT", xi2_oat_noisy(eff.alpha, eff.eta0)),
                   ("TAT", xi2_tat_noisy(eff.alpha, eff.eta0))):
    print(f"{label}: xi2 = {res.xi2:.4f}  ->  {res.db:.2f} dB at theta = {res.theta:.4f} rad")
