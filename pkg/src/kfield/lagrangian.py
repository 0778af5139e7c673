"""k-symplectic Lagrangian engine.

Energy, Poincare-Cartan coefficient data, Hessian regularity, the SOPDE
test, and the trace-form Euler-Lagrange residual for regular Lagrangians.
The velocity index pair (i, alpha) is flattened i-major throughout, so the
Hessian row order is v^1_1..v^1_k, v^2_1..., matching LagrangianDerived.vindex.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr, model
from .errors import FormalismError
from .sampling import sample_box

DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES = 100
REGULARITY_TOL = 1e-10


@dataclass(frozen=True)
class LagrangianDerived:
    """Symbolic data derived from a Lagrangian.

    energy    E_L = v^i_alpha dL/dv^i_alpha - L
    theta[alpha][i]         = dL/dv^i_alpha
    hessian[(i,alpha)][(j,beta)] = d2L/dv^i_alpha dv^j_beta  (nk x nk, i-major)
    """

    system: model.SystemDef
    energy: expr.Expr
    theta: tuple
    hessian: tuple

    @property
    def k(self):
        return self.system.k

    @property
    def n(self):
        return self.system.n

    def vindex(self, i, alpha):
        return i * self.k + alpha

    def hessian_at(self, env) -> np.ndarray:
        nk = self.n * self.k
        out = np.empty((nk, nk))
        for r in range(nk):
            for c in range(nk):
                out[r, c] = self.hessian[r][c].eval(env)
        return out


@dataclass(frozen=True)
class RegularityReport:
    det: float
    regular: bool


@dataclass(frozen=True)
class SopdeReport:
    is_sopde: bool
    el_defect: float

    def as_dict(self):
        return {"is_sopde": self.is_sopde, "el_defect": self.el_defect}


def _require_lagrangian(s):
    if s.kind != model.LAGRANGIAN:
        raise FormalismError(f"expected a lagrangian system, got {s.kind}")


def derive_lagrangian(s: model.SystemDef) -> LagrangianDerived:
    _require_lagrangian(s)
    lag = s.expression
    frame = s.frame
    k, n = s.k, s.n
    theta = tuple(
        tuple(expr.diff(lag, frame.v_names[i][a]) for i in range(n)) for a in range(k)
    )
    vflat = frame.flat_v_names()  # i-major
    energy_terms = [
        expr.mul(expr.var(vname), expr.diff(lag, vname)) for vname in vflat
    ]
    energy = expr.simplify(expr.sub(expr.add_all(energy_terms), lag))
    hessian = tuple(
        tuple(expr.diff(expr.diff(lag, vr), vc) for vc in vflat) for vr in vflat
    )
    return LagrangianDerived(system=s, energy=energy, theta=theta, hessian=hessian)


def regularity(derived: LagrangianDerived, at) -> RegularityReport:
    """Numeric Hessian determinant at a point (parameters bound from the system).

    regular iff |det| > 1e-10 * (max |entry|)^(nk).
    """
    env = derived.system.bind(at)
    w = derived.hessian_at(env)
    det = float(np.linalg.det(w))
    scale = float(np.max(np.abs(w)))
    threshold = REGULARITY_TOL * scale ** (derived.n * derived.k)
    return RegularityReport(det=det, regular=abs(det) > threshold)


def check_sopde_el(
    x: model.KVectorField,
    s: model.SystemDef,
    box=None,
    samples=DEFAULT_SAMPLES,
    tol=DEFAULT_TOL,
) -> SopdeReport:
    """SOPDE membership and the regular-case Euler-Lagrange trace residual.

    is_sopde iff (X_alpha)^i coincides with v^i_alpha at every sample.  The
    residual, per config index i, is

      sum_{alpha,j} d2L/dq^j dv^i_alpha v^j_alpha
        + sum_{alpha,j,beta} d2L/dv^i_alpha dv^j_beta (X_alpha)^j_beta
        - dL/dq^i .
    """
    _require_lagrangian(s)
    model.validate_field(x, s)
    derived = derive_lagrangian(s)
    frame = s.frame
    k, n = s.k, s.n
    lag = s.expression
    dq = [expr.diff(lag, qn) for qn in frame.q_names]
    cross = [
        [
            [expr.diff(derived.theta[a][i], frame.q_names[j]) for j in range(n)]
            for i in range(n)
        ]
        for a in range(k)
    ]

    points = sample_box(frame.phase_names(s.kind, s.formalism), samples, box)
    sopde_defect = 0.0
    el_defect = 0.0
    for pt in points:
        env = s.bind(pt)
        for a in range(k):
            for i in range(n):
                d = abs(x.config[a][i].eval(env) - env[frame.v_names[i][a]])
                sopde_defect = max(sopde_defect, d)
        for i in range(n):
            acc = -dq[i].eval(env)
            for a in range(k):
                for j in range(n):
                    acc += cross[a][i][j].eval(env) * env[frame.v_names[j][a]]
                    for b in range(k):
                        w = derived.hessian[derived.vindex(i, a)][derived.vindex(j, b)]
                        acc += w.eval(env) * x.fiber[a][b][j].eval(env)
            el_defect = max(el_defect, abs(acc))
    return SopdeReport(is_sopde=sopde_defect <= tol, el_defect=el_defect)


def sopde_from_accelerations(s: model.SystemDef, accel) -> model.KVectorField:
    """Build the SOPDE field with (X_alpha)^i = v^i_alpha and given accelerations.

    accel[alpha][beta][i] supplies (X_alpha)^i_beta.
    """
    frame = s.frame
    k, n = s.k, s.n
    config = tuple(
        tuple(expr.var(frame.v_names[i][a]) for i in range(n)) for a in range(k)
    )
    fiber = tuple(
        tuple(tuple(accel[a][b][i] for i in range(n)) for b in range(k)) for a in range(k)
    )
    return model.KVectorField(config=config, fiber=fiber)


def poincare_cartan_matrices(derived: LagrangianDerived, at):
    """Materialize the omega^alpha_L two-forms at a point as d x d matrices.

    Coordinate order q^1..q^n then v flattened i-major; returns the matrices
    together with the velocity-direction index list, ready for
    structures.verify_structure.
    """
    s = derived.system
    env = s.bind(at)
    k, n = derived.k, derived.n
    nk = n * k
    d = n + nk
    mats = []
    for a in range(k):
        m = np.zeros((d, d))
        # dq^i ^ dq^j block from d2L/dq^j dv^i_alpha
        c = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                c[i, j] = expr.diff(derived.theta[a][i], s.frame.q_names[j]).eval(env)
        m[:n, :n] = c - c.T
        # dq^i ^ dv^j_beta block from the Hessian
        b = np.empty((n, nk))
        for i in range(n):
            for col in range(nk):
                b[i, col] = derived.hessian[derived.vindex(i, a)][col].eval(env)
        m[:n, n:] = b
        m[n:, :n] = -b.T
        mats.append(m)
    vertical = tuple(range(n, d))
    return mats, vertical
