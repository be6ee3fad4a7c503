# %% [markdown]
# # When is the Gaussian picture enough?
#
# The Holstein-Primakoff treatment keeps only the covariance of two
# quadratures.  The exact Dicke-ladder dynamics for N = 1000 atoms shows where
# it holds and where the curvature of the Bloch sphere takes over.

# %%
import numpy as np

from cavsqueeze import dicke
from cavsqueeze.gaussian import xi2_oat_ideal, xi2_tat_noisy

N = 1000
S = N / 2
psi0 = dicke.css_state(N)
oat = dicke.HamiltonianSpec.oat(1.0, linear=False)
tat = dicke.HamiltonianSpec.tat(1.0, S, linear=False)

print(" alpha   OAT exact  Gaussian   TAT exact  Gaussian")
for alpha in (0.5, 1, 2, 4, 8, 16):
    t = alpha / (2 * S)
    eo = dicke.wineland_xi2(dicke.evolve(psi0, oat, t)).xi2
    et = dicke.wineland_xi2(dicke.evolve(psi0, tat, t)).xi2
    print(f"{alpha:6.1f}  {eo:9.5f}  {xi2_oat_ideal(alpha).xi2:8.5f}  "
          f"{et:10.5f}  {xi2_tat_noisy(alpha, 0).xi2:8.5f}")

# %% [markdown]
# The best achievable OAT squeezing shrinks as N^(-2/3).

# %%
Ns = [100, 300, 1000, 3000]
best = [dicke.optimal_squeezing(n, "OAT")[0].xi2 for n in Ns]
slope = np.polyfit(np.log(Ns), np.log(best), 1)[0]
print("optimal xi2:", ", ".join(f"N={n}: {x:.5f}" for n, x in zip(Ns, best)))
print(f"log-log slope {slope:.3f} (expected -2/3)")
