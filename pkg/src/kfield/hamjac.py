"""Hamilton-Jacobi machinery for both formalisms.

A closed section gamma = (gamma^alpha_i) of the momentum bundle is tested
for closedness and for the HJ condition (the q-gradient of H composed with
gamma, plus the base-derivative terms in the k-cosymplectic case).  The
projected k-vector field Z^gamma lives on the configuration (x,q)-space;
its integral sections are built by composing per-axis RK4 flows, and the
lifted section gamma(sigma) is validated against the HDW equations by the
grid residual machinery.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr, fields, model
from .errors import FormalismError, ShapeMismatchError, StepFailureError
from .sampling import sample_box

DEFAULT_SAMPLES = 100
W_CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class ClosedSectionSpec:
    """gamma[alpha][i] over q (k-symplectic) or (x, q) (k-cosymplectic),
    optionally generated by potentials W^alpha with gamma^alpha_i = dW^alpha/dq^i."""

    gamma: tuple
    potentials: tuple | None = None

    @property
    def k(self):
        return len(self.gamma)

    @property
    def n(self):
        return len(self.gamma[0])


def closed_section(s: model.SystemDef, gamma, potentials=None, samples=20) -> ClosedSectionSpec:
    """Validate shapes/free variables and (if W given) the gradient relation."""
    k, n = s.k, s.n
    gamma = tuple(tuple(row) for row in gamma)
    if len(gamma) != k or any(len(row) != n for row in gamma):
        raise ShapeMismatchError(f"gamma must be {k} x {n} for this system")
    allowed = set(s.frame.q_names) | set(s.params)
    if s.formalism == model.K_COSYMPLECTIC:
        allowed |= set(s.frame.x_names)
    for row in gamma:
        for g in row:
            stray = expr.free_vars(g) - allowed
            if stray:
                raise ShapeMismatchError(
                    f"gamma component uses names outside the base frame: {sorted(stray)}"
                )
    spec = ClosedSectionSpec(gamma=gamma, potentials=tuple(potentials) if potentials else None)
    if spec.potentials is not None:
        if len(spec.potentials) != k:
            raise ShapeMismatchError("need one potential per base slot")
        pts = _base_points(s, samples, None)
        for a in range(k):
            for i in range(n):
                d = expr.diff(spec.potentials[a], s.frame.q_names[i])
                for pt in pts:
                    env = s.bind(pt)
                    if abs(d.eval(env) - gamma[a][i].eval(env)) > W_CONSISTENCY_TOL:
                        raise ShapeMismatchError(
                            "stored gamma does not match the gradient of the potentials"
                        )
    return spec


def _base_names(s):
    names = list(s.frame.q_names)
    if s.formalism == model.K_COSYMPLECTIC:
        names = list(s.frame.x_names) + names
    return names


def _base_points(s, samples, box):
    return sample_box(_base_names(s), samples, box)


@dataclass(frozen=True)
class HjReport:
    closedness: float
    hj: float

    def as_dict(self):
        return {"closedness": self.closedness, "hj": self.hj}


def compose_with_section(s: model.SystemDef, spec: ClosedSectionSpec) -> expr.Expr:
    """H with every momentum replaced by the matching gamma component."""
    mapping = {}
    for a, row in enumerate(s.frame.p_names):
        for i, nm in enumerate(row):
            mapping[nm] = spec.gamma[a][i]
    return expr.simplify(expr.substitute(s.expression, mapping))


def hj_defect(s: model.SystemDef, spec: ClosedSectionSpec, box=None,
              samples=DEFAULT_SAMPLES) -> HjReport:
    """Closedness of gamma and the Hamilton-Jacobi defect, sampled.

    closedness: max |d gamma^alpha_i/dq^j - d gamma^alpha_j/dq^i|.
    hj (k-symplectic): max |d/dq^i H(q, gamma(q))|.
    hj (k-cosymplectic): the same q-gradient plus sum_alpha d gamma^alpha_i/dx^alpha.
    """
    if s.kind != model.HAMILTONIAN:
        raise FormalismError("Hamilton-Jacobi checks apply to hamiltonian systems")
    if spec.k != s.k or spec.n != s.n:
        raise ShapeMismatchError("section shape does not match the system")
    k, n = s.k, s.n
    qn = s.frame.q_names
    closed_exprs = []
    for a in range(k):
        for i in range(n):
            for j in range(i + 1, n):
                closed_exprs.append(
                    expr.simplify(
                        expr.sub(
                            expr.diff(spec.gamma[a][i], qn[j]),
                            expr.diff(spec.gamma[a][j], qn[i]),
                        )
                    )
                )
    composed = compose_with_section(s, spec)
    hj_exprs = []
    for i in range(n):
        e = expr.diff(composed, qn[i])
        if s.formalism == model.K_COSYMPLECTIC:
            for a in range(k):
                e = expr.add(e, expr.diff(spec.gamma[a][i], s.frame.x_names[a]))
        hj_exprs.append(expr.simplify(e))

    pts = _base_points(s, samples, box)
    closedness = 0.0
    hj = 0.0
    for pt in pts:
        env = s.bind(pt)
        for e in closed_exprs:
            closedness = max(closedness, abs(e.eval(env)))
        for e in hj_exprs:
            hj = max(hj, abs(e.eval(env)))
    return HjReport(closedness=closedness, hj=hj)


@dataclass(frozen=True)
class ProjectedField:
    """Z^gamma: configuration-space components of a solution through gamma.

    components[alpha][i] is the coefficient of d/dq^i in Z^gamma_alpha; in
    the k-cosymplectic case each Z^gamma_alpha additionally carries the unit
    base direction d/dx^alpha.
    """

    system: model.SystemDef
    components: tuple

    @property
    def cosymplectic(self):
        return self.system.formalism == model.K_COSYMPLECTIC


def project_field(s: model.SystemDef, spec: ClosedSectionSpec) -> ProjectedField:
    """Substitute p <- gamma into dH/dp^alpha_i."""
    if s.kind != model.HAMILTONIAN:
        raise FormalismError("field projection applies to hamiltonian systems")
    mapping = {}
    for a, row in enumerate(s.frame.p_names):
        for i, nm in enumerate(row):
            mapping[nm] = spec.gamma[a][i]
    comps = tuple(
        tuple(
            expr.simplify(expr.substitute(expr.diff(s.expression, s.frame.p_names[a][i]), mapping))
            for i in range(s.n)
        )
        for a in range(s.k)
    )
    return ProjectedField(system=s, components=comps)


def _flow_rhs(zg: ProjectedField, axis, x_fixed):
    """ODE right-hand side along one base axis: dq/ds = Z_axis(x(s), q)."""
    s = zg.system
    comps = zg.components[axis]
    x_names = s.frame.x_names
    q_names = s.frame.q_names

    def f(t, q):
        env = s.bind()
        if zg.cosymplectic:
            for b, nm in enumerate(x_names):
                env[nm] = x_fixed[b]
            env[x_names[axis]] = t
        for i, nm in enumerate(q_names):
            env[nm] = q[i]
        return np.array([c.eval(env) for c in comps])

    return f


def _rk4_line(f, t0, q0, h, count):
    """count RK4 steps of size h from (t0, q0); returns the visited states."""
    out = np.empty((count + 1, len(q0)))
    out[0] = q0
    t, q = t0, np.array(q0, dtype=float)
    for m in range(count):
        k1 = f(t, q)
        k2 = f(t + h / 2, q + h / 2 * k1)
        k3 = f(t + h / 2, q + h / 2 * k2)
        k4 = f(t + h, q + h * k3)
        q = q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        if not np.isfinite(q).all():
            raise StepFailureError(f"non-finite state while integrating axis flow at t={t}")
        out[m + 1] = q
    return out


def _fill(zg: ProjectedField, q0, grid: fields.Grid, axis_order):
    k = grid.k
    n = zg.system.n
    shape = grid.shape
    coords = [grid.coords(a) for a in range(k)]
    values = np.full((n, *shape), np.nan)
    origin = tuple(0 for _ in range(k))
    values[(slice(None), *origin)] = q0
    filled_axes = []
    for axis in axis_order:
        h = grid.spacings[axis]
        # start states: every already-filled node with zero index on `axis`
        ranges = [range(shape[a]) if a in filled_axes else range(1) for a in range(k)]
        for idx in np.ndindex(*[len(r) for r in ranges]):
            node = tuple(ranges[a][idx[a]] for a in range(k))
            x_fixed = [coords[a][node[a]] for a in range(k)]
            f = _flow_rhs(zg, axis, x_fixed)
            line = _rk4_line(f, coords[axis][0], values[(slice(None), *node)], h, shape[axis] - 1)
            for j in range(shape[axis]):
                target = list(node)
                target[axis] = j
                values[(slice(None), *tuple(target))] = line[j]
        filled_axes.append(axis)
    return values


def integrate_projected(zg: ProjectedField, q0, grid: fields.Grid):
    """Integral section of Z^gamma on a grid by axis-ordered flow composition.

    Axes are integrated in order 1..k from the grid corner (all minima),
    seeded with configuration value q0 there.  Returns the GridSection and
    the commutativity defect: the max discrepancy against the fill with the
    last two axis flows swapped (near machine precision iff the flows
    commute on the box).
    """
    s = zg.system
    if grid.k != s.k:
        raise ShapeMismatchError(f"grid has {grid.k} axes, system expects {s.k}")
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    if q0.shape != (s.n,):
        raise ShapeMismatchError(f"q0 must have length {s.n}")
    order = list(range(grid.k))
    values = _fill(zg, q0, grid, order)
    defect = 0.0
    if grid.k >= 2:
        swapped = order[:-2] + [order[-1], order[-2]]
        alt = _fill(zg, q0, grid, swapped)
        defect = float(np.max(np.abs(values - alt)))
    return fields.GridSection(grid=grid, values=values), defect


def verify_lift(s: model.SystemDef, spec: ClosedSectionSpec, sec: fields.GridSection):
    """HDW residual norms of the lifted section gamma(sigma) on sec's grid."""
    if s.kind != model.HAMILTONIAN:
        raise FormalismError("lift verification applies to hamiltonian systems")
    grid = sec.grid
    k, n = s.k, s.n
    env = dict(s.bind())
    for a in range(k):
        if a < len(s.frame.x_names):
            env[s.frame.x_names[a]] = grid.meshes()[a]
    for i, nm in enumerate(s.frame.q_names):
        env[nm] = sec.values[i]
    momenta = np.empty((k, n, *grid.shape))
    for a in range(k):
        for i in range(n):
            momenta[a, i] = np.broadcast_to(
                expr.eval_array(spec.gamma[a][i], env), grid.shape
            )
    lifted = fields.GridSection(grid=grid, values=sec.values, momenta=momenta)
    return fields.residual_on_grid(lifted, s)
