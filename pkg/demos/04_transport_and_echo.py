# %% [markdown]
# # Wave packets on great circles
#
# A degree-l state concentrated on one great circle is evolved under the
# perturbed Hamiltonian.  At times of order eps^-2 the circle moves by the
# averaged-potential flow.  At shorter times hbar/eps^2 only a phase builds up,
# which shows in the overlap with the free evolution.

# %%
import numpy as np

from zollsim import evolve as ev
from zollsim import spectral as sp
from zollsim.potential import Potential

V = Potential.from_expression("x3**2")
n0 = [np.sqrt(0.75), 0.0, 0.5]

# %%
for l in (20, 30):
    plan = ev.EvolutionPlan.for_cluster(l, times=np.linspace(0, 1, 9))
    rep = ev.transport_experiment(plan, V, n0, l)
    print(f"l={l}: max angle to predicted circle {rep.angular_error.max():.4f} rad, "
          f"min mass near it {rep.tube_mass.min():.3f}, "
          f"mean mass near the starting circle {rep.mean_initial_tube_mass:.3f}")

# %% [markdown]
# Echo for a superposition of the polar and a meridian circle.  Their averages
# of x3^2 differ by 1/2, so |F(t)| should follow |cos(t/4)|.

# %%
l = 30
times = np.linspace(0, 2 * np.pi, 9)
plan = ev.EvolutionPlan.for_cluster(l, 0.7, "hbar/eps^2", times)
basis = sp.HarmonicBasis(plan.lmax)
u = ev.superposition(ev.geodesic_state(basis, [0, 0, 1], l), ev.geodesic_state(basis, [1, 0, 0], l))
F = ev.loschmidt(plan, V, u, basis).values
for t, f in zip(times, F):
    print(f"t={t:.3f}  |F|={abs(f):.4f}  |cos(t/4)|={abs(np.cos(t / 4)):.4f}")
