# %% [markdown]
# # Eigenvalue clusters of -hbar^2 Laplacian/2 + eps^2 V
#
# The degree-l cluster of the sphere Laplacian splits under a potential.  To
# first order the splitting is given by the eigenvalues of V compressed to the
# cluster, and these are distributed like the great-circle averages of V.

# %%
import numpy as np
from scipy import stats

from zollsim import spectral as sp
from zollsim.potential import Potential

V = Potential.from_expression("x3**2")

# %%
for l in (10, 20, 40):
    vals = sp.band_invariants(sp.HarmonicBasis(l), V, l)
    # (1 - n3^2)/2 with n3 uniform: CDF 1 - sqrt(1 - 2j)
    ks = stats.kstest(vals, lambda j: 1 - np.sqrt(1 - 2 * np.clip(j, 0, 0.5))).statistic
    print(f"l={l:3d}  range [{vals.min():.4f}, {vals.max():.4f}]  KS distance {ks:.4f}")

# %% [markdown]
# Level spacing near energy 1/2 with eps = sqrt(hbar): the ratio
# s0 / (hbar eps^2) stays bounded as l grows.

# %%
for l, hbar, eps, s0, ratio in sp.gap_scan(V, [20, 30, 40]):
    print(f"l={l}  hbar={hbar:.4f}  s0={s0:.3e}  ratio={ratio:.4f}")
