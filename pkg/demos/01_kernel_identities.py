# %% [markdown]
# # The three bounded kernel functions
#
# For w = z^(N+1) - c the potential is V = 8 (N+1)^2 |z|^(2N) / (1 + |w|^2)^2,
# and Z0, Z1, Z2 below all solve Lap(phi) + V phi = 0.  The five-point
# Laplacian shows it: the residual falls like h^2.

# %%
import numpy as np

from liouville_kernel import CartesianGrid, ProblemParams, basis_change_matrix, linearized_residual

p = ProblemParams(N=1, c=0.5 + 0.3j)
grid = CartesianGrid(center=0.0, half_width=0.5, n=51)

for tag in ("Z0", "Z1", "Z2"):
    rep = linearized_residual(p, tag, grid)
    ladder = "  ".join(f"h={h:.4f}: {s:.2e}" for h, s, _ in rep.mesh_ladder)
    print(f"{tag}: order {rep.fitted_order:.3f}   {ladder}")

# %% [markdown]
# A function that is not in the kernel, here the constant 1, leaves the
# residual V behind at every mesh size.

# %%
rep = linearized_residual(p, lambda z: np.ones(np.shape(z)), grid)
print("phi = 1:", ", ".join(f"{s:.3f}" for s in rep.sup))

# %% [markdown]
# The mode functions phi_0, phi_{N+1}^1, phi_{N+1}^2 span the same space;
# the change of basis is a 3x3 matrix whose determinant is (1+|c|^2)^2.

# %%
m = basis_change_matrix(p)
print(np.array2string(m.entries, precision=4))
print("det", m.det, "expected", (1 + abs(p.c) ** 2) ** 2)
