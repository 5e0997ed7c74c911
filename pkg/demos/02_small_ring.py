# %% [markdown]
# # Mode functions on a small ring
#
# On |z| = rho the rescaled mode functions rho^-k phi_k^{1,2} look like
# cos(k theta), sin(k theta).  The pairing matrix T tends to the identity
# like rho^(N+1), so ring data can be expanded in mode functions.

# %%
import numpy as np

from liouville_kernel import ProblemParams, ring_reconstruct, t_matrix

p = ProblemParams(N=1, c=0.3 + 0.4j)
rhos = np.array([1e-1, 3e-2, 1e-2, 3e-3])
devs = np.array([t_matrix(p, r, K=16).dev for r in rhos])
for r, d in zip(rhos, devs):
    print(f"rho={r:.0e}  ||T - I|| = {d:.3e}")
print("fitted exponent", np.polyfit(np.log(rhos), np.log(devs), 1)[0])

# %% [markdown]
# Expanding a smooth function on the ring: the coefficients in the rescaled
# basis drop off faster than any power of k.

# %%
bump = lambda z: np.cos(np.angle(z)) * np.exp(np.sin(np.angle(z)))
rec = ring_reconstruct(p, bump, rho=0.1, K=24)
size = np.hypot(rec.scaled[1::2], rec.scaled[2::2])
for k in (1, 4, 8, 12, 16, 20, 24):
    print(f"k={k:2d}  |coefficient| = {size[k - 1]:.2e}")
print("reconstruction error on the ring", rec.error)
