"""Fixed-step trajectory integration of the nonholonomic dynamics.

The integrator advances the chart state u = (q, ptilde) with classical
fourth-order Runge-Kutta.  The right-hand side is the nonholonomic vector
field written out componentwise,

    qdot      =  X kappa_D^{-1} ptilde
    ptdot     = -X^T dH_q - S kappa_D^{-1} ptilde,

which is exactly ``-Pi . dH`` with the bivector in block form; a test pins
the fused evaluation against :func:`nhk.bracket.nh_vector_field`.  Each
recorded sample carries the Hamiltonian and the constraint residual
max_a |eps^a(qdot)|; both are conserved/zero in exact arithmetic, so the
recorded values measure integrator and floating-point error only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ._compile import get_compiled
from .errors import DomainError, EvalError, GeometryError, ParameterError
from .manifold import NonholonomicSystem, PointM, base_at

__all__ = ["Trajectory", "integrate", "trajectory_csv"]


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled integral curve of the nonholonomic vector field.

    ``states[i]`` is the point reached at ``times[i] = i * dt``;
    ``energy[i]`` is the Hamiltonian there and ``constraint_residual[i]``
    is max_a |eps^a(qdot)| at that state.  When the flow leaves the
    declared coordinate domain (or an expression guard trips) the
    trajectory is truncated at the last valid state, ``completed`` is
    False and ``exit_reason`` says why.
    """

    system: NonholonomicSystem
    dt: float
    times: np.ndarray
    states: Tuple[PointM, ...]
    energy: np.ndarray
    constraint_residual: np.ndarray
    completed: bool
    exit_reason: Optional[str]

    @property
    def diagnostics(self) -> dict:
        """Summary figures: energy drift (relative to the initial energy
        when it is nonzero) and the worst constraint residual."""
        h0 = float(self.energy[0])
        drift = float(np.max(np.abs(self.energy - h0)))
        if h0 != 0.0:
            drift /= abs(h0)
        return {
            "max_energy_drift": drift,
            "max_residual": float(np.max(self.constraint_residual)),
        }

    def states_array(self) -> np.ndarray:
        """All recorded chart states stacked as a (len(times), dimM) array."""
        return np.array([np.concatenate([p.q, p.ptilde]) for p in self.states])


def _rhs(system: NonholonomicSystem, comp, u: np.ndarray):
    """One fused evaluation at chart state u: returns (du/dt, H, residual)."""
    n = system.n
    q, pt = u[:n], u[n:]
    bd = base_at(system, q, order=1)
    vel = bd.kD_inv.val @ pt
    qdot = bd.X.val @ vel

    uval, ugrad, _ = comp.potential.evaluate(q, 1)
    dHq = 0.5 * np.einsum("a,iab,b->i", pt, bd.kD_inv.d1, pt) + ugrad
    ew = np.einsum("a,jai->ij", pt, bd.mu.d1)
    ss = ew - ew.T
    s_mat = bd.X.val.T @ ss @ bd.X.val
    ptdot = -(bd.X.val.T @ dHq) - s_mat @ vel

    energy = 0.5 * float(pt @ vel) + uval
    residual = float(np.max(np.abs(bd.eps.val @ qdot))) if system.k else 0.0
    return np.concatenate([qdot, ptdot]), energy, residual


def integrate(system: NonholonomicSystem, init: PointM, dt: float,
              steps: int) -> Trajectory:
    """Integrate the nonholonomic dynamics from ``init`` with fixed-step
    classical RK4, recording energy and constraint residual at every
    sample.

    Leaving the declared domain truncates the trajectory (flagged via
    ``completed`` / ``exit_reason``); a frame singularity is fatal and
    raises :class:`GeometryError` with the step index.
    """
    if not (isinstance(dt, (int, float)) and float(dt) > 0.0):
        raise ParameterError(f"dt must be a positive real, got {dt!r}")
    if not (isinstance(steps, (int, np.integer)) and steps >= 1):
        raise ParameterError(f"steps must be a positive integer, got {steps!r}")
    system.check_point(init)

    comp = get_compiled(system)
    dt = float(dt)
    n = system.n
    u = np.concatenate([init.q, init.ptilde])

    try:
        k1, h, r = _rhs(system, comp, u)
    except GeometryError as exc:
        raise GeometryError(f"frame singularity at step 0: {exc}") from exc

    times = [0.0]
    states = [PointM(u[:n], u[n:])]
    energy = [h]
    residual = [r]
    completed = True
    exit_reason = None

    for step in range(1, steps + 1):
        try:
            k2, _, _ = _rhs(system, comp, u + (0.5 * dt) * k1)
            k3, _, _ = _rhs(system, comp, u + (0.5 * dt) * k2)
            k4, _, _ = _rhs(system, comp, u + dt * k3)
            u_new = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            # Evaluating at the accepted state both validates it and
            # supplies the next step's k1 stage.
            k1_new, h, r = _rhs(system, comp, u_new)
        except (DomainError, EvalError) as exc:
            completed = False
            exit_reason = f"left the valid domain at step {step}: {exc}"
            break
        except GeometryError as exc:
            raise GeometryError(
                f"frame singularity at step {step}: {exc}") from exc
        u, k1 = u_new, k1_new
        times.append(step * dt)
        states.append(PointM(u[:n], u[n:]))
        energy.append(h)
        residual.append(r)

    return Trajectory(
        system=system,
        dt=dt,
        times=np.array(times),
        states=tuple(states),
        energy=np.array(energy),
        constraint_residual=np.array(residual),
        completed=completed,
        exit_reason=exit_reason,
    )


def trajectory_csv(trajectory: Trajectory) -> str:
    """Render a trajectory as CSV with header
    ``t,<coords...>,<ptilde...>,energy,residual`` and 17 significant
    digits per value."""
    system = trajectory.system
    header = ["t", *system.coord_names,
              *system.chart_names[system.n:], "energy", "residual"]
    lines = [",".join(header)]
    rows = zip(trajectory.times, trajectory.states,
               trajectory.energy, trajectory.constraint_residual)
    for t, p, h, r in rows:
        vals = [t, *p.q, *p.ptilde, h, r]
        lines.append(",".join("%.17g" % v for v in vals))
    return "\n".join(lines) + "\n"
