"""Tour: integrating nonholonomic dynamics, with receipts.

The evolution vector field is X = -sharp(dH).  Antisymmetry of the
bracket conserves energy exactly, and the field is tangent to the
constraint distribution, so along an exact trajectory both the energy
and the constraint residual max_a |eps^a(qdot)| are constants of
motion.  A fixed-step RK4 integrator therefore carries two built-in
error meters -- and its step-halving behaviour should show the
classical fourth-order signature (error ratio ~ 2^4 = 16).

Run:  python3 demos/03_rolling_and_drifting.py
"""

import numpy as np

from nhk import PointM, builtin, integrate, trajectory_csv

# --- the rolling disk: energy and constraint meters -------------------
disk = builtin("rolling_disk")
init = PointM([0.0, 0.0, 0.0, 0.4], [1.2, 0.8])
traj = integrate(disk, init, dt=1e-3, steps=4000)
d = traj.diagnostics
print("rolling disk, 4000 RK4 steps at dt = 1e-3:")
print(f"  energy drift (relative):  {d['max_energy_drift']:.2e}")
print(f"  worst rolling residual:   {d['max_residual']:.2e}")
print(f"  final configuration:      {np.round(traj.states[-1].q, 4)}")

# Reversibility: flip the momenta and the disk rolls home.
end = traj.states[-1]
back = integrate(disk, PointM(end.q, -end.ptilde), dt=1e-3, steps=4000)
gap = np.max(np.abs(back.states[-1].q - init.q))
print(f"  return gap after momentum flip: {gap:.2e}")
print()

# --- fourth-order self-convergence on the snakeboard ------------------
sb = builtin("snakeboard")
start = PointM([0.0, 0.0, 0.2, 0.0, 0.7], [0.0, 0.0, 40.0])
finals = []
for dt, steps in ((1e-3, 1000), (5e-4, 2000), (2.5e-4, 4000)):
    t = integrate(sb, start, dt, steps)
    finals.append(t.states_array()[-1])
d1 = np.linalg.norm(finals[0] - finals[1])
d2 = np.linalg.norm(finals[1] - finals[2])
print("snakeboard to t = 1 at dt, dt/2, dt/4:")
print(f"  |u(dt) - u(dt/2)|   = {d1:.3e}")
print(f"  |u(dt/2) - u(dt/4)| = {d2:.3e}")
print(f"  ratio = {d1 / d2:.2f}   (a 4th-order method halves dt -> ~16)")
print()

# --- charts have edges -------------------------------------------------
# Hard steering pushes phi toward the chart boundary at pi/2; the
# integrator truncates at the last valid state instead of stepping
# through the singular frame.
wild = integrate(sb, PointM([0, 0, 0, 0, 1.4], [0.0, 8.0, 0.0]),
                 dt=5e-3, steps=200)
print("hard-steering snakeboard run:")
print(f"  completed: {wild.completed}")
print(f"  reason:    {wild.exit_reason}")
print(f"  recorded {len(wild.times)} of 201 samples, "
      f"last phi = {wild.states[-1].q[4]:.4f} < pi/2 = 1.5708")
print()

# --- CSV export ---------------------------------------------------------
head = trajectory_csv(traj).splitlines()[:3]
print("trajectory_csv emits one row per recorded state:")
for line in head:
    print(f"  {line}")
