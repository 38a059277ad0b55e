"""Integrator: right-hand side against the bracket formulation, energy
and constraint conservation, domain-exit truncation, failure handling,
and the CSV export."""

import numpy as np
import pytest

import nhk.sim
from nhk import (
    PointM,
    hamiltonian_M,
    integrate,
    nh_vector_field,
    sample_points,
    trajectory_csv,
)
from nhk._compile import get_compiled
from nhk.errors import DomainError, GeometryError, ParameterError
from nhk.sim import _rhs

SYSTEMS = ["snakeboard", "particle", "disk", "twist3", "twist5",
           "holonomic", "kernel_path"]


@pytest.fixture(params=SYSTEMS)
def system(request):
    return request.getfixturevalue(request.param)


# ----------------------------------------------------------- right-hand side


def test_rhs_is_the_nonholonomic_vector_field(system):
    comp = get_compiled(system)
    for p in sample_points(system, 10, seed=77):
        du, h, resid = _rhs(system, comp, np.concatenate([p.q, p.ptilde]))
        np.testing.assert_allclose(du, nh_vector_field(system, p),
                                   rtol=1e-12, atol=1e-12)
        assert h == pytest.approx(hamiltonian_M(system, p)[0], rel=1e-12)
        assert resid < 1e-10  # qdot lies in the constraint kernel exactly


# ------------------------------------------------------------- conservation


def test_short_particle_run_conserves_energy(particle):
    traj = integrate(particle, PointM([0.0, 0.0, 0.0], [1.0, 0.5]),
                     dt=1e-3, steps=500)
    assert traj.completed and traj.exit_reason is None
    d = traj.diagnostics
    assert d["max_energy_drift"] < 1e-10
    assert d["max_residual"] < 1e-12


def test_snakeboard_run_conserves_energy(snakeboard):
    traj = integrate(snakeboard,
                     PointM([0.0, 0.0, 0.2, 0.0, 0.7], [0.0, 0.0, 4.0]),
                     dt=1e-3, steps=400)
    assert traj.completed
    assert traj.diagnostics["max_energy_drift"] < 1e-9
    assert traj.diagnostics["max_residual"] < 1e-10


def test_time_reversal(disk):
    # flipping the momenta retraces the base path: integrate out, flip,
    # integrate back, flip again, and compare with the start
    init = PointM([0.1, -0.2, 0.4, 0.9], [0.8, 1.1])
    out = integrate(disk, init, dt=1e-3, steps=300)
    end = out.states[-1]
    back = integrate(disk, PointM(end.q, -end.ptilde), dt=1e-3, steps=300)
    final = back.states[-1]
    np.testing.assert_allclose(final.q, init.q, atol=1e-10)
    np.testing.assert_allclose(-final.ptilde, init.ptilde, atol=1e-10)


def test_trajectory_record_shapes(particle):
    traj = integrate(particle, PointM([0.0, 0.3, 0.0], [1.0, -0.5]),
                     dt=0.01, steps=25)
    n_samples = 26
    assert len(traj.times) == len(traj.states) == n_samples
    assert traj.energy.shape == traj.constraint_residual.shape == (n_samples,)
    np.testing.assert_allclose(traj.times, 0.01 * np.arange(n_samples),
                               rtol=1e-15)
    assert traj.states_array().shape == (n_samples, particle.dimM)
    np.testing.assert_array_equal(traj.states_array()[0],
                                  [0.0, 0.3, 0.0, 1.0, -0.5])
    assert traj.dt == 0.01
    d = traj.diagnostics
    assert set(d) == {"max_energy_drift", "max_residual"}
    h0 = traj.energy[0]
    assert d["max_energy_drift"] == pytest.approx(
        np.max(np.abs(traj.energy - h0)) / abs(h0), rel=1e-12)


# -------------------------------------------------------- domain truncation


def test_domain_exit_truncates(snakeboard):
    # a large steering momentum drives phi across the chart boundary
    traj = integrate(snakeboard,
                     PointM([0.0, 0.0, 0.0, 0.0, 1.5], [0.0, 10.0, 0.0]),
                     dt=0.01, steps=50)
    assert not traj.completed
    assert "left the valid domain at step" in traj.exit_reason
    assert len(traj.times) < 51
    # every recorded state is still inside the chart
    for p in traj.states:
        assert abs(p.q[4]) < np.pi / 2
    assert traj.times[-1] == pytest.approx((len(traj.times) - 1) * 0.01)


def test_initial_point_must_be_valid(snakeboard):
    with pytest.raises(DomainError):
        integrate(snakeboard, PointM([0, 0, 0, 0, 2.0], [0, 0, 0]),
                  dt=1e-3, steps=1)


# ------------------------------------------------------------ fatal failure


def test_frame_singularity_is_fatal(particle, monkeypatch):
    calls = {"n": 0}
    real = nhk.sim.base_at

    def failing(system, q, order=0):
        calls["n"] += 1
        if calls["n"] >= 6:
            raise GeometryError("constraint frame lost rank")
        return real(system, q, order)

    monkeypatch.setattr(nhk.sim, "base_at", failing)
    with pytest.raises(GeometryError, match=r"frame singularity at step \d"):
        integrate(particle, PointM([0, 0, 0], [1.0, 0.5]), dt=1e-3, steps=10)


def test_frame_singularity_at_start(particle, monkeypatch):
    def failing(system, q, order=0):
        raise GeometryError("constraint frame lost rank")

    monkeypatch.setattr(nhk.sim, "base_at", failing)
    with pytest.raises(GeometryError, match="frame singularity at step 0"):
        integrate(particle, PointM([0, 0, 0], [1.0, 0.5]), dt=1e-3, steps=10)


# --------------------------------------------------------------- validation


@pytest.mark.parametrize("dt", [0.0, -1e-3, float("nan"), "0.1"])
def test_bad_dt_rejected(particle, dt):
    with pytest.raises(ParameterError):
        integrate(particle, PointM([0, 0, 0], [1, 0]), dt=dt, steps=10)


@pytest.mark.parametrize("steps", [0, -5, 2.5, "10"])
def test_bad_steps_rejected(particle, steps):
    with pytest.raises(ParameterError):
        integrate(particle, PointM([0, 0, 0], [1, 0]), dt=1e-3, steps=steps)


# ---------------------------------------------------------------- CSV export


def test_trajectory_csv_layout(particle):
    traj = integrate(particle, PointM([0.25, -0.5, 1.0], [1.0, 0.5]),
                     dt=0.01, steps=3)
    text = trajectory_csv(traj)
    lines = text.splitlines()
    assert lines[0] == "t,x,y,z,ptilde_x,ptilde_y,energy,residual"
    assert len(lines) == 5  # header + 4 samples
    assert text.endswith("\n")
    first = [float(v) for v in lines[1].split(",")]
    assert first[:6] == [0.0, 0.25, -0.5, 1.0, 1.0, 0.5]
    # 17 significant digits round-trip every recorded float exactly
    for line, (t, p, h, r) in zip(
            lines[1:], zip(traj.times, traj.states, traj.energy,
                           traj.constraint_residual)):
        vals = [float(v) for v in line.split(",")]
        assert vals == [t, *p.q, *p.ptilde, h, r]


def test_trajectory_csv_snakeboard_header(snakeboard):
    traj = integrate(snakeboard,
                     PointM([0, 0, 0, 0, 0.3], [0.1, 0.0, 0.5]),
                     dt=1e-3, steps=2)
    header = trajectory_csv(traj).splitlines()[0]
    assert header == ("t,x,y,theta,psi,phi,"
                      "ptilde_psi,ptilde_phi,ptilde_S,energy,residual")
