"""k-symplectic Hamiltonian engine.

Derives the Hamilton-De Donder-Weyl right-hand sides from H, constructs the
explicit gauge solution of the geometric equation (all of -dH/dq loaded onto
the first momentum slot), and checks candidate k-vector fields: equation
membership, kernel membership, and an integrability defect from pairwise
commutators.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import expr, model
from .errors import FormalismError
from .sampling import sample_box

DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES = 100


@dataclass(frozen=True)
class HdwSystem:
    """Right-hand sides of the HDW equations for a Hamiltonian system.

    velocities[alpha][i] = dH/dp^alpha_i,  trace[i] = -dH/dq^i.
    """

    velocities: tuple
    trace: tuple


@dataclass(frozen=True)
class SolutionReport:
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


def _require(s, kind, formalism):
    if s.kind != kind or s.formalism != formalism:
        raise FormalismError(f"expected a {formalism} {kind} system, got {s.formalism} {s.kind}")


def derive_hdw(s: model.SystemDef) -> HdwSystem:
    _require(s, model.HAMILTONIAN, model.K_SYMPLECTIC)
    h = s.expression
    velocities = tuple(
        tuple(expr.diff(h, p) for p in row) for row in s.frame.p_names
    )
    trace = tuple(expr.simplify(expr.neg(expr.diff(h, q))) for q in s.frame.q_names)
    return HdwSystem(velocities=velocities, trace=trace)


def gauge_solution(s: model.SystemDef) -> model.KVectorField:
    """The explicit globally-defined solution of the geometric equation.

    (X_alpha)^i = dH/dp^alpha_i for all alpha; the whole trace constraint is
    carried by the first slot, (X_1)^1_i = -dH/dq^i; every other fiber
    component vanishes.
    """
    hdw = derive_hdw(s)
    k, n = s.k, s.n
    z = expr.ZERO
    fiber = [[[z for _ in range(n)] for _ in range(k)] for _ in range(k)]
    fiber[0][0] = list(hdw.trace)
    return model.KVectorField(
        config=hdw.velocities,
        fiber=tuple(tuple(tuple(r) for r in plane) for plane in fiber),
    )


def _phase_env(s, point):
    env = s.bind()
    env.update(point)
    return env


def check_solution(
    x: model.KVectorField,
    s: model.SystemDef,
    box=None,
    samples=DEFAULT_SAMPLES,
    tol=DEFAULT_TOL,
) -> SolutionReport:
    """Sample the HDW membership, kernel and integrability defects of x.

    Points are Halton samples over `box` (name -> (lo, hi), default
    [-1, 1] per phase coordinate), with system parameters bound.
    """
    _require(s, model.HAMILTONIAN, model.K_SYMPLECTIC)
    model.validate_field(x, s)
    hdw = derive_hdw(s)
    k, n = s.k, s.n
    points = sample_box(s.frame.phase_names(s.kind, s.formalism), samples, box)

    max_defect = 0.0
    kernel_defect = 0.0
    for pt in points:
        env = _phase_env(s, pt)
        for a in range(k):
            for i in range(n):
                d = abs(x.config[a][i].eval(env) - hdw.velocities[a][i].eval(env))
                max_defect = max(max_defect, d)
                kernel_defect = max(kernel_defect, abs(x.config[a][i].eval(env)))
        for i in range(n):
            tr = sum(x.fiber[a][a][i].eval(env) for a in range(k))
            max_defect = max(max_defect, abs(tr - hdw.trace[i].eval(env)))
            kernel_defect = max(kernel_defect, abs(tr))

    integrability = commutator_defect(x, s, points)
    return SolutionReport(
        is_solution=max_defect <= tol,
        max_defect=max_defect,
        kernel_member=kernel_defect <= tol,
        integrability_defect=integrability,
    )


def _component_table(x: model.KVectorField, s: model.SystemDef):
    """Map each X_alpha to {coordinate name: component Expr}, zeros omitted."""
    frame = s.frame
    tables = []
    for a in range(x.k):
        comp = {}
        if x.base is not None:
            for b, nm in enumerate(frame.x_names):
                comp[nm] = x.base[a][b]
        for i, nm in enumerate(frame.q_names):
            comp[nm] = x.config[a][i]
        fiber_names = (
            frame.p_names if s.kind == model.HAMILTONIAN else None
        )
        if fiber_names is not None:
            for b in range(x.k):
                for i, nm in enumerate(fiber_names[b]):
                    comp[nm] = x.fiber[a][b][i]
        else:
            # velocity slots: fiber[a][b][i] multiplies d/dv^i_b
            for b in range(x.k):
                for i in range(x.n):
                    comp[frame.v_names[i][b]] = x.fiber[a][b][i]
        tables.append(comp)
    return tables


def commutator_defect(x: model.KVectorField, s: model.SystemDef, points) -> float:
    """Max sampled norm of all pairwise commutators [X_a, X_b].

    Component c of [X_a, X_b] is sum_c' (X_a^c' d_c' X_b^c - X_b^c' d_c' X_a^c)
    over every phase coordinate c'; derivatives are symbolic.
    """
    tables = _component_table(x, s)
    coords = s.frame.phase_names(s.kind, s.formalism)
    k = x.k
    # cache symbolic partials of every component
    partials = [
        {c: {w: expr.diff(e, w) for w in expr.free_vars(e) if w in coords} for c, e in t.items()}
        for t in tables
    ]
    worst = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            for pt in points:
                env = _phase_env(s, pt)
                xa = {c: e.eval(env) for c, e in tables[a].items()}
                xb = {c: e.eval(env) for c, e in tables[b].items()}
                for c in coords:
                    acc = 0.0
                    for w, d in partials[b].get(c, {}).items():
                        acc += xa.get(w, 0.0) * d.eval(env)
                    for w, d in partials[a].get(c, {}).items():
                        acc -= xb.get(w, 0.0) * d.eval(env)
                    worst = max(worst, abs(acc))
    return worst
