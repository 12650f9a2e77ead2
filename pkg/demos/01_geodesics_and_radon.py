# %% [markdown]
# # Closed geodesics and their averages
#
# Every geodesic on a Tannery surface closes up after length 2*pi, just as on
# the round sphere.  We check that, then average a potential along geodesics.

# %%
import numpy as np

from zollsim import geodesic as gd
from zollsim import radon as rd
from zollsim.geometry import RevolutionProfile, ZollSurface
from zollsim.potential import Potential

rng = np.random.default_rng(1)
sphere = ZollSurface.canonical()
tannery = ZollSurface.tannery(RevolutionProfile.cubic(0.3))

# %%
for name, s in [("sphere", sphere), ("tannery a=0.3", tannery)]:
    worst = max(gd.closure_defect(s, gd.random_unit_phase_point(s, rng)) for _ in range(10))
    print(f"{name:14s} worst closure defect over 10 geodesics: {worst:.2e}")

# %% [markdown]
# A sampled orbit: energy stays at 1/2 and p_phi (Clairaut) is constant.

# %%
traj = gd.trajectory(tannery, [1.1, 0.0, 0.4, 0.6], n=64)
rows = traj.rows()
print("method:", traj.method)
print("energy spread:", np.ptp(rows[:, -1]), " p_phi spread:", np.ptp(rows[:, 4]))

# %% [markdown]
# Averages along great circles.  For x3^2 the value depends only on the
# normal n of the circle: (1 - n3^2)/2.  Odd potentials average to zero.

# %%
V = Potential.from_expression("x3**2")
odd = Potential.from_expression("x1 + x1*x2*x3")
for n in ([0, 0, 1], [1, 0, 0], [0.6, 0.0, 0.8]):
    rho = rd.phase_point_from_normal(n)
    print(n, "I(x3^2) =", round(rd.radon(sphere, V, rho), 12),
          " expected", (1 - n[2] ** 2) / 2, " I(odd) =", f"{rd.radon(sphere, odd, rho):.1e}")

# %% [markdown]
# The averaged potential generates a slow flow on the space of geodesics.
# For x3^2 the circle normal precesses around the x3 axis at fixed n3.

# %%
rho0 = rd.phase_point_from_normal([np.sqrt(0.75), 0.0, 0.5])
times = np.linspace(0, 1, 5)
path = rd.effective_flow(sphere, V, rho0, 1.0, t_eval=times)
for t, n in zip(times, rd.geodesic_normal_chart(sphere, path)):
    print(f"t={t:.2f}  normal={np.round(n, 4)}")
