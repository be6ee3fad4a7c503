# %% [markdown]
# # Trading coupling against decay
#
# At fixed cavity optical depth the coupling and the pumping loss are tied,
# alpha = r0 d_c eta0 / 2.  Longer pulses twist more but lose more spin
# length, so each protocol has a best eta0.

# %%
import math

import numpy as np

from cavsqueeze.gaussian import oat_budget_limit, optimize_over_eta0, tat_budget_limit

r0 = 0.1
print(" d_c     OAT dB  eta0*   TAT dB  eta0*")
for d_c in [10, 30, 100, 300, 1000, 6000 / math.pi, 3000, 10000]:
    o = optimize_over_eta0(d_c, r0, "OAT")
    t = optimize_over_eta0(d_c, r0, "TAT")
    print(f"{d_c:7.1f}  {o.db:6.2f}  {o.eta0:.4f}  {t.db:6.2f}  {t.eta0:.4f}")

# %% [markdown]
# For large optical depth the optimized variances approach simple power laws:
# 3^(1/3) / (r0 d_c)^(2/3) for OAT and 2 / (r0 d_c) for TAT.

# %%
for r0_dc in (50, 200, 1000, 5000):
    o = optimize_over_eta0(r0_dc / r0, r0, "OAT", objective="variance")
    t = optimize_over_eta0(r0_dc / r0, r0, "TAT")
    print(f"r0 d_c = {r0_dc:5d}:  OAT {o.variance / oat_budget_limit(r0_dc):.3f} x limit,"
          f"  TAT {t.xi2 / tat_budget_limit(r0_dc):.3f} x limit")
