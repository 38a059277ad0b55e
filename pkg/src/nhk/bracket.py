"""Almost-Poisson bracket of the constraint phase space.

The pullback 2-form Omega_M is degenerate along the complement lift W,
but its restriction to the admissible subbundle C is symplectic.  The
induced bivector pi is defined by

    pi#(alpha) = X  with  i_X Omega_M |_C = -alpha |_C,  X in C,

which in the chart basis works out to the closed block form

    Pi = [[ 0,  -X ],          sharp(alpha) = Pi @ alpha,
          [ X^T,  S ]],        S = X^T E X,

with E the momentum-weighted antisymmetrized derivative of the
embedding coefficients mu.  Brackets of chart functions are
{u^I, u^J} = pi(du^I, du^J) = Pi[J, I].

Two independent constructions live here:

* ``nh_bivector`` -- the reference route: restrict Omega_M to the
  C-basis, invert the restricted Gram matrix in jet arithmetic, and
  conjugate back.  Entries come out as Jet2 of the chart variables.
* ``chart_tensors`` -- the fast packed route used by the Jacobiator,
  curvature and simulation internals: the closed block form and its
  chart-direction derivatives assembled with numpy.

The two are pinned against each other in the test suite.

Dynamics: the Hamiltonian is H = (1/2) ptilde . kD^{-1} ptilde + U with
kD the D-frame Gram matrix of the kinetic metric, and the evolution
field is X_nh = -pi#(dH).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._compile import get_compiled
from ._linalg import jm_inv, jm_matmul, jm_values
from .errors import GeometryError
from .jet import Jet2, jet_const
from .manifold import BaseData, NonholonomicSystem, PointM, base_at, omega_M

__all__ = ["BivectorAtPoint", "ChartTensors", "chart_tensors", "nh_bivector",
           "hamiltonian_M", "nh_vector_field"]

ROUTE_TOL = 1e-10


@dataclass(frozen=True)
class BivectorAtPoint:
    """The induced bivector at a point, in the chart basis.

    mat holds the matrix of the sharp map -- components of pi#(alpha)
    are mat @ alpha.  Entries are floats (order 0) or Jet2 of the chart
    variables (order 1)."""
    mat: object
    order: int
    chart_names: tuple

    def values(self) -> np.ndarray:
        if self.order == 0:
            return np.asarray(self.mat, dtype=float)
        return np.array([[e.value for e in row] for row in self.mat])

    def sharp(self, alpha) -> np.ndarray:
        return self.values() @ np.asarray(alpha, dtype=float)

    def pairing(self, alpha, beta) -> float:
        """pi(alpha, beta) = beta(pi#(alpha))."""
        return float(np.asarray(beta, dtype=float) @ self.sharp(alpha))

    def bracket_matrix(self) -> np.ndarray:
        """B[I, J] = {u^I, u^J} of the chart functions."""
        return self.values().T


@dataclass(frozen=True)
class ChartTensors:
    """Packed chart-basis tensors at a point (fast numpy route).

    Derivative arrays carry the chart direction in axis 0; q-directions
    first, then the momenta."""
    system: NonholonomicSystem
    point: PointM
    bd: BaseData
    order: int
    E: np.ndarray
    S: np.ndarray
    Omega: np.ndarray
    Pi: np.ndarray
    dOmega: np.ndarray | None
    dPi: np.ndarray | None


def chart_tensors(system: NonholonomicSystem, p: PointM,
                  order: int = 1) -> ChartTensors:
    """Assemble Omega_M, the sharp matrix Pi, and (order >= 1) their
    chart-direction derivatives from the packed base pipeline."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    system.check_point(p)
    n, k = system.n, system.k
    nk = n - k
    dim = system.dimM
    bd = base_at(system, p.q, order + 1)
    pt = p.ptilde
    Mu, dMu = bd.mu.val, bd.mu.d1
    Xv = bd.X.val

    E = np.einsum("a,jai->ij", pt, dMu)
    E = E - E.T
    S = Xv.T @ E @ Xv

    Omega = np.zeros((dim, dim))
    Omega[:n, :n] = E
    Omega[:n, n:] = Mu.T
    Omega[n:, :n] = -Mu

    Pi = np.zeros((dim, dim))
    Pi[:n, n:] = -Xv
    Pi[n:, :n] = Xv.T
    Pi[n:, n:] = S

    dOmega = dPi = None
    if order >= 1:
        d2Mu = bd.mu.d2
        dX = bd.X.d1
        dE_q = np.einsum("a,ljai->lij", pt, d2Mu)
        dE_q = dE_q - dE_q.transpose(0, 2, 1)
        dE_p = np.einsum("jai->aij", dMu) - np.einsum("iaj->aij", dMu)
        dS_q = (np.einsum("lji,jk,km->lim", dX, E, Xv)
                + np.einsum("ji,ljk,km->lim", Xv, dE_q, Xv)
                + np.einsum("ji,jk,lkm->lim", Xv, E, dX))
        dS_p = np.einsum("ji,ajk,km->aim", Xv, dE_p, Xv)

        dOmega = np.zeros((dim, dim, dim))
        dOmega[:n, :n, :n] = dE_q
        dOmega[:n, :n, n:] = dMu.transpose(0, 2, 1)
        dOmega[:n, n:, :n] = -dMu
        dOmega[n:, :n, :n] = dE_p

        dPi = np.zeros((dim, dim, dim))
        dPi[:n, :n, n:] = -dX
        dPi[:n, n:, :n] = dX.transpose(0, 2, 1)
        dPi[:n, n:, n:] = dS_q
        dPi[n:, n:, n:] = dS_p
    return ChartTensors(system=system, point=p, bd=bd, order=order,
                        E=E, S=S, Omega=Omega, Pi=Pi,
                        dOmega=dOmega, dPi=dPi)


def _chart_const(value, dim, order) -> Jet2:
    return jet_const(float(value), dim, order)


def nh_bivector(system: NonholonomicSystem, p: PointM,
                order: int = 0) -> BivectorAtPoint:
    """Reference construction of the bivector: solve the defining
    relation on the C-basis.

    With G = C^T Omega C the restricted Gram matrix (symplectic, hence
    invertible -- degeneracy raises a geometry error), antisymmetry of G
    turns `i_X Omega|_C = -alpha|_C` into X = C G^{-1} C^T alpha, so the
    sharp matrix is Pi = C G^{-1} C^T.  All steps run in jet arithmetic
    over the chart variables at the requested order."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    system.check_point(p)
    n, k = system.n, system.k
    nk = n - k
    dim = system.dimM
    om = omega_M(system, p, order=order)
    if order == 0:
        Om = [[_chart_const(om.mat[i][j], dim, 0) for j in range(dim)]
              for i in range(dim)]
    else:
        Om = om.mat
    bd = base_at(system, p.q, order)
    Xj = [[None] * nk for _ in range(n)]
    for i in range(n):
        for al in range(nk):
            if order == 0:
                Xj[i][al] = _chart_const(bd.X.val[i, al], dim, 0)
            else:
                g = np.zeros(dim)
                g[:n] = bd.X.d1[:, i, al]
                Xj[i][al] = Jet2(float(bd.X.val[i, al]), g, None)
    zero = _chart_const(0.0, dim, order)
    one = _chart_const(1.0, dim, order)
    C = [[zero] * (2 * nk) for _ in range(dim)]
    for i in range(n):
        for al in range(nk):
            C[i][al] = Xj[i][al]
    for al in range(nk):
        C[n + al][nk + al] = one
    Ct = [list(row) for row in zip(*C)]
    G = jm_matmul(jm_matmul(Ct, Om), C)
    det = abs(float(np.linalg.det(jm_values(G))))
    if det <= 1e-12:
        raise GeometryError(
            f"restricted 2-form degenerate (|det| = {det:.3e}); "
            "no induced bivector at this point")
    Ginv = jm_inv(G)
    Pi = jm_matmul(jm_matmul(C, Ginv), Ct)
    if order == 0:
        mat = jm_values(Pi)
    else:
        mat = Pi
    return BivectorAtPoint(mat=mat, order=order,
                           chart_names=system.chart_names)


def _potential_jet(system: NonholonomicSystem, q, order: int) -> Jet2:
    value, grad, hess = get_compiled(system).potential.evaluate(q, order)
    return Jet2(value, grad, hess)


def hamiltonian_M(system: NonholonomicSystem, p: PointM):
    """Hamiltonian on the constraint phase space and its differential.

    H = (1/2) ptilde . kD^{-1} ptilde + U(q), with kD the D-frame Gram
    matrix of the kinetic metric.  The value is cross-checked against
    the ambient route (1/2) p . kappa^{-1} p with p the embedded
    momenta.  Returns (value, dH) with dH a chart covector."""
    system.check_point(p)
    n, k = system.n, system.k
    bd = base_at(system, p.q, order=1)
    pt = p.ptilde
    Uj = _potential_jet(system, p.q, 1)
    value = 0.5 * float(pt @ bd.kD_inv.val @ pt) + Uj.value

    p_amb = bd.mu.val.T @ pt
    value_amb = 0.5 * float(p_amb @ np.linalg.solve(bd.kappa.val, p_amb)) \
        + Uj.value
    if abs(value - value_amb) > ROUTE_TOL * max(1.0, abs(value)):
        raise GeometryError(
            f"Hamiltonian routes disagree: {value!r} vs {value_amb!r}")

    dH = np.zeros(system.dimM)
    dH[:n] = 0.5 * np.einsum("a,lab,b->l", pt, bd.kD_inv.d1, pt) + Uj.grad
    dH[n:] = bd.kD_inv.val @ pt
    return value, dH


def nh_vector_field(system: NonholonomicSystem, p: PointM) -> np.ndarray:
    """Evolution vector field X_nh = -pi#(dH) in chart components:

        qdot      =  X kD^{-1} ptilde          (the admitted velocity),
        ptildedot = -X^T dH_q - S dH_ptilde.
    """
    system.check_point(p)
    n = system.n
    ct = chart_tensors(system, p, order=0)
    _, dH = hamiltonian_M(system, p)
    return -ct.Pi @ dH
