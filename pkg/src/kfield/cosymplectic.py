"""k-cosymplectic extensions: explicit space-time dependence.

Derives and checks the k-cosymplectic Hamiltonian conditions
  (X_alpha)_beta = delta,  dH/dq^i = -sum (X_beta)^beta_i,  dH/dp^alpha_i = (X_alpha)^i,
their Lagrangian analogue for regular L, and the suspension correspondence
between autonomous k-cosymplectic systems and k-symplectic ones.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr, hamiltonian, lagrangian, model
from .errors import FormalismError
from .sampling import sample_box

DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES = 100


@dataclass(frozen=True)
class CosymHdwSystem:
    """HDW right-hand sides plus Reeb derivatives dH/dx^alpha."""

    velocities: tuple  # k x n
    trace: tuple  # n
    reeb_rhs: tuple  # k


@dataclass(frozen=True)
class CosymLagrangianDerived:
    """Lagrangian data plus the Reeb-energy identity terms.

    reeb_energy[alpha] is the claimed value of (R_L)_alpha(E_L), namely
    -dL/dx^alpha; the pointwise check lives in reeb_energy_defect.
    """

    derived: lagrangian.LagrangianDerived
    reeb_energy: tuple


def _require_cosymplectic(s):
    if s.formalism != model.K_COSYMPLECTIC:
        raise FormalismError(f"expected a k-cosymplectic system, got {s.formalism}")


def derive_cosym(s: model.SystemDef):
    """Symbolic right-hand sides of the k-cosymplectic field equations."""
    _require_cosymplectic(s)
    frame = s.frame
    if s.kind == model.HAMILTONIAN:
        h = s.expression
        return CosymHdwSystem(
            velocities=tuple(tuple(expr.diff(h, p) for p in row) for row in frame.p_names),
            trace=tuple(expr.simplify(expr.neg(expr.diff(h, q))) for q in frame.q_names),
            reeb_rhs=tuple(expr.diff(h, x) for x in frame.x_names),
        )
    lag = s.expression
    return CosymLagrangianDerived(
        derived=lagrangian.derive_lagrangian(s),
        reeb_energy=tuple(
            expr.simplify(expr.neg(expr.diff(lag, x))) for x in frame.x_names
        ),
    )


def gauge_solution(s: model.SystemDef) -> model.KVectorField:
    """Explicit solution: base components delta, -dH/dq loaded on slot 1."""
    _require_cosymplectic(s)
    if s.kind != model.HAMILTONIAN:
        raise FormalismError("gauge solution is defined for hamiltonian systems")
    cs = derive_cosym(s)
    k, n = s.k, s.n
    z, one = expr.ZERO, expr.ONE
    base = tuple(tuple(one if a == b else z for b in range(k)) for a in range(k))
    fiber = [[[z for _ in range(n)] for _ in range(k)] for _ in range(k)]
    fiber[0][0] = list(cs.trace)
    return model.KVectorField(
        config=cs.velocities,
        fiber=tuple(tuple(tuple(r) for r in plane) for plane in fiber),
        base=base,
    )


@dataclass(frozen=True)
class CosymSolutionReport:
    is_solution: bool
    max_defect: float
    kernel_member: bool
    integrability_defect: float

    def as_dict(self):
        return {
            "is_solution": self.is_solution,
            "max_defect": self.max_defect,
            "kernel_member": self.kernel_member,
            "integrability_defect": self.integrability_defect,
        }


def check_cosym_solution(
    x: model.KVectorField,
    s: model.SystemDef,
    box=None,
    samples=DEFAULT_SAMPLES,
    tol=DEFAULT_TOL,
) -> CosymSolutionReport:
    """Like the k-symplectic check plus the (X_alpha)_beta = delta condition.

    Kernel membership follows the cosymplectic kernel: vanishing base and
    config components and a trace-free fiber.
    """
    _require_cosymplectic(s)
    if s.kind != model.HAMILTONIAN:
        raise FormalismError("solution checking applies to hamiltonian systems")
    model.validate_field(x, s)
    cs = derive_cosym(s)
    k, n = s.k, s.n
    points = sample_box(s.frame.phase_names(s.kind, s.formalism), samples, box)

    max_defect = 0.0
    kernel_defect = 0.0
    for pt in points:
        env = s.bind(pt)
        for a in range(k):
            for b in range(k):
                delta = 1.0 if a == b else 0.0
                val = x.base[a][b].eval(env)
                max_defect = max(max_defect, abs(val - delta))
                kernel_defect = max(kernel_defect, abs(val))
            for i in range(n):
                d = abs(x.config[a][i].eval(env) - cs.velocities[a][i].eval(env))
                max_defect = max(max_defect, d)
                kernel_defect = max(kernel_defect, abs(x.config[a][i].eval(env)))
        for i in range(n):
            tr = sum(x.fiber[a][a][i].eval(env) for a in range(k))
            max_defect = max(max_defect, abs(tr - cs.trace[i].eval(env)))
            kernel_defect = max(kernel_defect, abs(tr))

    integ = hamiltonian.commutator_defect(x, s, points)
    return CosymSolutionReport(
        is_solution=max_defect <= tol,
        max_defect=max_defect,
        kernel_member=kernel_defect <= tol,
        integrability_defect=integ,
    )


def is_autonomous(s: model.SystemDef, samples=DEFAULT_SAMPLES, tol=1e-12, box=None) -> bool:
    """True when every dH/dx^alpha (or dL/dx^alpha) vanishes at the samples."""
    _require_cosymplectic(s)
    grads = [expr.diff(s.expression, x) for x in s.frame.x_names]
    if all(g.is_const(0.0) for g in grads):
        return True
    points = sample_box(s.frame.phase_names(s.kind, s.formalism), samples, box)
    for pt in points:
        env = s.bind(pt)
        if any(abs(g.eval(env)) > tol for g in grads):
            return False
    return True


def suspend(s_auto: model.SystemDef, x: model.KVectorField):
    """Lift a k-symplectic system and solution field to k-cosymplectic form.

    The expression is re-tagged (it has no base dependence by construction),
    and the field gains unit base components while config/fiber lift
    unchanged.
    """
    if s_auto.formalism != model.K_SYMPLECTIC:
        raise FormalismError("suspension starts from a k-symplectic system")
    model.validate_field(x, s_auto)
    s_cosym = model.SystemDef(
        name=s_auto.name + "_suspended",
        frame=s_auto.frame,
        kind=s_auto.kind,
        formalism=model.K_COSYMPLECTIC,
        expression=s_auto.expression,
        params=dict(s_auto.params),
    )
    k = s_auto.k
    z, one = expr.ZERO, expr.ONE
    base = tuple(tuple(one if a == b else z for b in range(k)) for a in range(k))
    lifted = model.KVectorField(config=x.config, fiber=x.fiber, base=base)
    return s_cosym, lifted


def drop_base(x: model.KVectorField) -> model.KVectorField:
    """Project a k-cosymplectic field back by dropping base components."""
    if x.base is None:
        raise FormalismError("field carries no base components to drop")
    return model.KVectorField(config=x.config, fiber=x.fiber, base=None)


def desuspend(s_cosym: model.SystemDef) -> model.SystemDef:
    """Inverse of suspend on systems; requires autonomy."""
    _require_cosymplectic(s_cosym)
    if not is_autonomous(s_cosym):
        raise FormalismError("only autonomous systems project to k-symplectic form")
    name = s_cosym.name
    if name.endswith("_suspended"):
        name = name[: -len("_suspended")]
    return model.SystemDef(
        name=name,
        frame=s_cosym.frame,
        kind=s_cosym.kind,
        formalism=model.K_SYMPLECTIC,
        expression=s_cosym.expression,
        params=dict(s_cosym.params),
    )


def reeb_energy_defect(s: model.SystemDef, at) -> float:
    """Pointwise check of (R_L)_alpha(E_L) = -dL/dx^alpha for regular L.

    The Lagrangian Reeb field at the point is reconstructed by solving the
    velocity-Hessian system W B = -d2L/dx^alpha dv (its defining conditions);
    only the resulting scalar identity is reported, the field itself is not
    part of the API.
    """
    _require_cosymplectic(s)
    if s.kind != model.LAGRANGIAN:
        raise FormalismError("the Reeb-energy identity applies to lagrangian systems")
    d = lagrangian.derive_lagrangian(s)
    frame = s.frame
    n, k = s.n, s.k
    nk = n * k
    env = s.bind(at)
    w = d.hessian_at(env)
    vflat = frame.flat_v_names()
    worst = 0.0
    de_dx = [expr.diff(d.energy, x) for x in frame.x_names]
    de_dv = [expr.diff(d.energy, vn) for vn in vflat]
    dl_dx = [expr.diff(s.expression, x) for x in frame.x_names]
    for a in range(k):
        rhs = np.array(
            [-expr.diff(expr.diff(s.expression, vn), frame.x_names[a]).eval(env) for vn in vflat]
        )
        b = np.linalg.solve(w, rhs)
        value = de_dx[a].eval(env) + sum(b[j] * de_dv[j].eval(env) for j in range(nk))
        worst = max(worst, abs(value + dl_dx[a].eval(env)))
    return worst
