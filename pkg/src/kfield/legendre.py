"""Legendre transformation between Lagrangian and Hamiltonian data.

Forward map p^alpha_i = dL/dv^i_alpha, numeric inversion by damped Newton,
the induced Hamiltonian H = E_L after inverting (closed form for Lagrangians
with constant velocity Hessian), and the pullback consistency check of the
canonical forms against the Poincare-Cartan data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr, lagrangian, model, structures
from .errors import FormalismError, NoConvergenceError, SingularHessianError

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
SINGULAR_TOL = 1e-10


@dataclass(frozen=True)
class LegendreMap:
    system: model.SystemDef
    momenta: tuple  # momenta[alpha][i] = dL/dv^i_alpha
    derived: lagrangian.LagrangianDerived


def legendre_forward(s: model.SystemDef) -> LegendreMap:
    if s.kind != model.LAGRANGIAN:
        raise FormalismError("Legendre transformation starts from a lagrangian system")
    derived = lagrangian.derive_lagrangian(s)
    return LegendreMap(system=s, momenta=derived.theta, derived=derived)


def _as_q_env(s, q):
    if isinstance(q, dict):
        return dict(q)
    return {nm: float(v) for nm, v in zip(s.frame.q_names, q)}


def _velocity_env(s, v):
    env = {}
    for i, row in enumerate(s.frame.v_names):
        for a, nm in enumerate(row):
            env[nm] = float(v[i, a])
    return env


def legendre_invert(m: LegendreMap, q, p, guess, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER):
    """Solve p = dL/dv(q, v) for v by damped Newton from `guess`.

    q: dict or length-n sequence; p: (k, n) array [alpha, i]; guess and the
    returned velocities: (n, k) arrays [i, alpha].  Raises SingularHessianError
    when the velocity Hessian degenerates at an iterate, NoConvergenceError
    when 50 iterations do not reach a 1e-10 max-norm residual.
    """
    s = m.system
    derived = m.derived
    n, k = s.n, s.k
    p = np.asarray(p, dtype=float)
    v = np.array(guess, dtype=float).reshape(n, k).copy()
    base_env = s.bind(_as_q_env(s, q))

    def residual(vel):
        env = dict(base_env)
        env.update(_velocity_env(s, vel))
        r = np.empty(n * k)
        for a in range(k):
            for i in range(n):
                r[derived.vindex(i, a)] = p[a, i] - m.momenta[a][i].eval(env)
        return r, env

    r, env = residual(v)
    for _ in range(max_iter):
        w = derived.hessian_at(env)
        scale = float(np.max(np.abs(w)))
        if abs(np.linalg.det(w)) <= SINGULAR_TOL * max(scale, 1.0) ** (n * k):
            raise SingularHessianError("velocity Hessian is singular at the current iterate")
        if np.max(np.abs(r)) <= tol:
            return v
        step = np.linalg.solve(w, r).reshape(n, k)
        # halve the step until the residual actually decreases
        lam = 1.0
        best = np.max(np.abs(r))
        for _ in range(40):
            cand = v + lam * step
            rc, envc = residual(cand)
            if np.max(np.abs(rc)) < best:
                v, r, env = cand, rc, envc
                break
            lam *= 0.5
        else:
            raise NoConvergenceError(max_iter, float(np.max(np.abs(r))))
    if np.max(np.abs(r)) <= tol:
        return v
    raise NoConvergenceError(max_iter, float(np.max(np.abs(r))))


@dataclass(frozen=True)
class InducedHamiltonian:
    """H = E_L composed with the inverse Legendre map.

    `expression` is the closed-form Expr when the velocity Hessian is
    constant (quadratic Lagrangian), else None and only the numeric
    evaluator is available.
    """

    source: model.SystemDef
    legendre_map: LegendreMap
    expression: expr.Expr | None

    def evaluate(self, q, p, guess=None):
        s = self.source
        q_env = _as_q_env(s, q)
        if self.expression is not None:
            env = s.bind(q_env)
            for a, row in enumerate(s.frame.p_names):
                for i, nm in enumerate(row):
                    env[nm] = float(np.asarray(p)[a, i])
            return self.expression.eval(env)
        if guess is None:
            guess = np.zeros((s.n, s.k))
        v = legendre_invert(self.legendre_map, q_env, p, guess)
        env = s.bind(q_env)
        env.update(_velocity_env(s, v))
        return self.legendre_map.derived.energy.eval(env)

    def system(self) -> model.SystemDef:
        """Hamiltonian SystemDef carrying the closed-form expression."""
        if self.expression is None:
            raise FormalismError("closed-form induced Hamiltonian requires a constant Hessian")
        s = self.source
        return model.SystemDef(
            name=s.name + "_induced",
            frame=s.frame,
            kind=model.HAMILTONIAN,
            formalism=s.formalism,
            expression=self.expression,
            params=dict(s.params),
        )


def induced_hamiltonian(s: model.SystemDef) -> InducedHamiltonian:
    m = legendre_forward(s)
    derived = m.derived
    n, k = s.n, s.k
    nk = n * k
    vset = set(s.frame.flat_v_names()) | set(s.frame.q_names) | set(s.frame.x_names)
    constant_hessian = all(
        not (expr.free_vars(derived.hessian[r][c]) & vset)
        for r in range(nk)
        for c in range(nk)
    )
    expression = None
    if constant_hessian:
        params = s.bind()
        w = derived.hessian_at(params)
        scale = max(1.0, float(np.max(np.abs(w))))
        if abs(np.linalg.det(w)) > SINGULAR_TOL * scale**nk:
            expression = _quadratic_hamiltonian(s, derived, w)
    return InducedHamiltonian(source=s, legendre_map=m, expression=expression)


def _quadratic_hamiltonian(s, derived, w):
    """Closed form H = (p-b)^T W^-1 (p-b)/2 - c for L = v^T W v/2 + b(q)^T v + c(q).

    W is evaluated at the system's parameter bindings; b and c keep their
    q-dependence symbolic.
    """
    n, k = s.n, s.k
    nk = n * k
    winv = np.linalg.inv(w)
    zero_v = {nm: expr.ZERO for nm in s.frame.flat_v_names()}
    b = [None] * nk
    pvar = [None] * nk
    for a in range(k):
        for i in range(n):
            idx = derived.vindex(i, a)
            b[idx] = expr.simplify(expr.substitute(derived.theta[a][i], zero_v))
            pvar[idx] = expr.var(s.frame.p_names[a][i])
    c = expr.simplify(expr.substitute(s.expression, zero_v))

    def shifted(idx):
        if b[idx].is_const(0.0):
            return pvar[idx]
        return expr.sub(pvar[idx], b[idx])

    terms = []
    for r in range(nk):
        for cidx in range(nk):
            coef = winv[r, cidx]
            if coef == 0.0:
                continue
            terms.append(
                expr.mul(expr.const(0.5 * coef), expr.mul(shifted(r), shifted(cidx)))
            )
    h = expr.sub(expr.add_all(terms), c)
    return expr.simplify(h)


def pullback_check(s: model.SystemDef, at) -> float:
    """Max entrywise defect of FL^* theta^alpha vs theta^alpha_L and
    FL^* omega^alpha (as J^T A J) vs the Poincare-Cartan matrices, at a
    velocity-space point."""
    derived = lagrangian.derive_lagrangian(s)
    n, k = s.n, s.k
    nk = n * k
    d = n + nk
    env = s.bind(at)

    jac = np.zeros((d, d))
    jac[:n, :n] = np.eye(n)
    for a in range(k):
        for i in range(n):
            row = n + a * n + i  # target momenta flattened alpha-major
            for j in range(n):
                jac[row, j] = expr.diff(derived.theta[a][i], s.frame.q_names[j]).eval(env)
            for col in range(nk):
                jac[row, n + col] = derived.hessian[derived.vindex(i, a)][col].eval(env)

    canon = structures.canonical_forms(k, n)
    pc_mats, _ = lagrangian.poincare_cartan_matrices(derived, at)
    worst = 0.0
    for a in range(k):
        # one-form coefficients: theta^alpha on the target has value
        # p^alpha_i on the dq^i slots at the image point
        tvec = np.zeros(d)
        for i in range(n):
            tvec[i] = derived.theta[a][i].eval(env)
        pulled = jac.T @ tvec
        svec = np.zeros(d)
        for i in range(n):
            svec[i] = derived.theta[a][i].eval(env)
        worst = max(worst, float(np.max(np.abs(pulled - svec))))
        pulled_omega = jac.T @ canon.omegas[a] @ jac
        worst = max(worst, float(np.max(np.abs(pulled_omega - pc_mats[a]))))
    return worst
