# %% [markdown]
# # Which radial modes stay bounded (c = 0)
#
# With c = 0 the potential is radial and each Fourier mode k gives an ODE.
# Its regular solution starts like r^k; shooting it out to r = 50 in
# multiprecision shows it grows like r^k unless k = 0 or k = N+1.

# %%
from liouville_kernel import ProblemParams, RadialMode, shoot_mode
from liouville_kernel.shooting import shooting_vs_closed_form

for N in range(4):
    p = ProblemParams(N)
    row = []
    for k in range(8):
        g = shoot_mode(RadialMode(k, p))
        row.append(f"{k}:{g.fitted_exponent:+.2f}")
    print(f"N={N}  " + "  ".join(row))

# %% [markdown]
# The shot solutions coincide with the closed form
# r^k ((k-N-1)/(N+1) + 2/(1+r^(2N+2))) up to normalization.

# %%
p = ProblemParams(2)
for k in (0, 3, 5):
    print(f"k={k}: max relative deviation {shooting_vs_closed_form(RadialMode(k, p)):.2e}")
