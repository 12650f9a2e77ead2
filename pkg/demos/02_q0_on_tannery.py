# %% [markdown]
# # The subprincipal symbol q0
#
# q0 is computed from the curvature along a closed geodesic and its Jacobi
# fields.  On the round sphere it is the constant 1/4; on a Tannery surface
# it varies between geodesics.

# %%
import numpy as np

from zollsim import zelditch as zd
from zollsim.geometry import RevolutionProfile, ZollSurface

sphere = ZollSurface.canonical()
print("round sphere, tilted geodesic:", zd.q0(sphere, zd.tilted_point(sphere, 0.7)))

# %% [markdown]
# For sigma = a c (1 - c^2) the equator value works out to 1/4 - a^2/4.
# The meridian value differs from 1/4 at second order in a.

# %%
for a in (0.1, 0.2, 0.3):
    s = ZollSurface.tannery(RevolutionProfile.cubic(a))
    eq = zd.q0(s, zd.equator_point(s))
    mer = zd.q0(s, zd.meridian_point(s))
    print(f"a={a:.1f}  equator {eq:.8f} (1/4 - a^2/4 = {0.25 - a * a / 4:.8f})  meridian {mer:.8f}")

# %% [markdown]
# Sweep from the equator (tilt 0) towards the meridians (tilt pi/2).

# %%
s = ZollSurface.tannery(RevolutionProfile.cubic(0.3))
for tilt, q in zd.q0_sweep(s, np.linspace(0, np.pi / 2, 7)):
    print(f"tilt {tilt:.3f}  q0 {q:.6f}")
