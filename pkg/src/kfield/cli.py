"""Command-line front end.

Subcommands: derive, check-structure, check-solution, solve, legendre,
hamjac, gallery.  Output is deterministic (byte-identical across identical
invocations unless --timestamps is given); --json switches every report to
machine-readable JSON.  Exit codes: 0 success/pass, 1 check failure, 2
usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import (
    cosymplectic,
    expr,
    fields,
    gallery,
    hamiltonian,
    hamjac,
    lagrangian,
    legendre,
    model,
)
from .errors import (
    CflViolationError,
    KfieldError,
    NoConvergenceError,
    NonFiniteError,
)

SYMBOLIC_TOL = 1e-10
GRID_TOL = 1e-8


def _fmt(x):
    return f"{x:.12g}"


def parse_params(text):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise KfieldError(f"bad --params item '{item}' (expected name=value)")
        name, value = item.split("=", 1)
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise KfieldError(f"bad --params value '{value}' for '{name}'") from None
    return out


def load_input(path_or_name, params=None, kind=None) -> model.SystemDef:
    """A system JSON file path, or a gallery entry name."""
    if os.path.exists(path_or_name):
        with open(path_or_name) as f:
            s = model.load_system(f.read())
        if params:
            merged = dict(s.params)
            merged.update(params)
            s = model.SystemDef(
                name=s.name, frame=s.frame, kind=s.kind,
                formalism=s.formalism, expression=s.expression, params=merged,
            )
        if kind and kind != s.kind:
            raise KfieldError(f"system file is '{s.kind}', not '{kind}'")
        return s
    return gallery.instantiate(path_or_name, params, kind=kind)


class Report:
    """Collects lines (human mode) or a payload (json mode)."""

    def __init__(self, as_json):
        self.as_json = as_json
        self.lines = []
        self.payload = {}

    def add(self, key, value, text=None):
        self.payload[key] = value
        if text is None:
            text = f"{key}: {value}"
        self.lines.append(text)

    def emit(self, stream=None):
        stream = stream if stream is not None else sys.stdout
        if self.as_json:
            stream.write(json.dumps(self.payload, indent=2) + "\n")
        else:
            stream.write("\n".join(self.lines) + "\n")


def _maybe_timestamp(report, args):
    if getattr(args, "timestamps", False):
        report.add("timestamp", time.strftime("%Y-%m-%dT%H:%M:%S"))


# ---------------------------------------------------------------------------
# derive


def _display_substitution(s):
    """Rename velocity slots v^i_alpha to D<alpha>[psi<i>] for readability."""
    mapping = {}
    for i, row in enumerate(s.frame.v_names):
        for a, nm in enumerate(row):
            mapping[nm] = expr.var(f"D{a + 1}_psi{i + 1}")
    for i, nm in enumerate(s.frame.q_names):
        mapping[nm] = expr.var(f"psi{i + 1}")
    return mapping


def cmd_derive(args):
    s = load_input(args.system, parse_params(args.params), kind=args.kind)
    rep = Report(args.json)
    _maybe_timestamp(rep, args)
    rep.add("system", s.name)
    rep.add("kind", s.kind)
    rep.add("formalism", s.formalism)
    if s.kind == model.HAMILTONIAN:
        if s.formalism == model.K_SYMPLECTIC:
            hdw = hamiltonian.derive_hdw(s)
            reeb = None
        else:
            cs = cosymplectic.derive_cosym(s)
            hdw, reeb = cs, cs.reeb_rhs
        vel = {}
        for a in range(s.k):
            for i in range(s.n):
                key = f"d psi{i + 1} / d x{a + 1}"
                vel[key] = str(hdw.velocities[a][i])
        rep.add("velocity_equations", vel,
                "velocity equations:\n" + "\n".join(f"  {k} = {v}" for k, v in vel.items()))
        tr = {f"sum_a d psi^a_{i + 1} / d x^a": str(expr.simplify(expr.neg(t)))
              for i, t in enumerate(hdw.trace)}
        rep.add("trace_equations",
                {f"psi_{i + 1}": str(t) for i, t in enumerate(hdw.trace)},
                "trace equations (sum over a of d psi^a_i / d x^a equals):\n"
                + "\n".join(f"  psi_{i + 1}: {t}" for i, t in enumerate(hdw.trace)))
        if reeb is not None:
            rep.add("base_derivatives", [str(r) for r in reeb],
                    "dH/dx^a: " + ", ".join(str(r) for r in reeb))
    else:
        derived = lagrangian.derive_lagrangian(s)
        rep.add("energy", str(derived.energy), f"energy E_L = {derived.energy}")
        disp = _display_substitution(s)
        eqs = {}
        for i in range(s.n):
            lhs_terms = []
            for a in range(s.k):
                theta = expr.substitute(derived.theta[a][i], disp)
                lhs_terms.append(f"D{a + 1}[{expr.simplify(theta)}]")
            rhs = expr.simplify(
                expr.substitute(expr.diff(s.expression, s.frame.q_names[i]), disp)
            )
            eqs[f"psi{i + 1}"] = f"{' + '.join(lhs_terms)} = {rhs}"
        rep.add("euler_lagrange", eqs,
                "Euler-Lagrange equations:\n"
                + "\n".join(f"  {v}" for v in eqs.values()))
    rep.emit()
    return 0


# ---------------------------------------------------------------------------
# check-structure


def cmd_check_structure(args):
    from . import structures

    cs = structures.canonical_forms(args.k, args.n, cosymplectic=args.cosymplectic)
    report = structures.verify_structure(cs.omegas, etas=cs.etas, vertical=cs.vertical)
    rep = Report(args.json)
    _maybe_timestamp(rep, args)
    rep.add("k", args.k)
    rep.add("n", args.n)
    rep.add("cosymplectic", args.cosymplectic)
    for key, value in report.as_dict().items():
        if key == "reeb":
            rep.add("reeb", value,
                    "reeb rows:\n" + "\n".join(
                        "  [" + ", ".join(_fmt(v) for v in row) + "]" for row in value))
        else:
            rep.add(key, value)
    rep.emit()
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# check-solution


def _load_field(path, s):
    with open(path) as f:
        doc = json.load(f)
    config = tuple(tuple(expr.parse(c) for c in row) for row in doc["config"])
    fiber = tuple(
        tuple(tuple(expr.parse(c) for c in row) for row in plane)
        for plane in doc["fiber"]
    )
    base = None
    if doc.get("base") is not None:
        base = tuple(tuple(expr.parse(c) for c in row) for row in doc["base"])
    x = model.KVectorField(config=config, fiber=fiber, base=base)
    model.validate_field(x, s)
    return x


def cmd_check_solution(args):
    s = load_input(args.system, parse_params(args.params), kind="hamiltonian")
    if args.field:
        x = _load_field(args.field, s)
        source = args.field
    else:
        if s.formalism == model.K_SYMPLECTIC:
            x = hamiltonian.gauge_solution(s)
        else:
            x = cosymplectic.gauge_solution(s)
        source = "gauge solution"
    tol = args.tol if args.tol is not None else SYMBOLIC_TOL
    if s.formalism == model.K_SYMPLECTIC:
        result = hamiltonian.check_solution(x, s, tol=tol)
    else:
        result = cosymplectic.check_cosym_solution(x, s, tol=tol)
    rep = Report(args.json)
    _maybe_timestamp(rep, args)
    rep.add("system", s.name)
    rep.add("field", source)
    rep.add("tol", tol)
    for key, value in result.as_dict().items():
        rep.add(key, value if not isinstance(value, float) else float(_fmt(value)),
                f"{key}: {_fmt(value) if isinstance(value, float) else value}")
    rep.emit()
    return 0 if result.is_solution else 1


# ---------------------------------------------------------------------------
# solve


def _hyperbolic_initial_data(s, entry):
    params = s.bind()
    name = s.name
    if name == "wave":
        c = params["c"]
        return (lambda x: np.sin(x)), (lambda x: -c * np.cos(x)), "periodic"
    if name == "sine_gordon":
        v = gallery.get("sine_gordon").defaults["v"]
        gam = 1.0 / math.sqrt(1.0 - v * v)
        psi0 = lambda x: 4.0 * np.arctan(np.exp(gam * x))
        dpsi0 = lambda x: -2.0 * v * gam / np.cosh(gam * x)
        return psi0, dpsi0, "dirichlet"
    if name == "ginzburg_landau":
        lam = params["lam"]
        kf = math.sqrt(2.0 * lam)
        return (lambda x: np.zeros_like(x)), (lambda x: np.full_like(x, kf)), "periodic"
    if name in ("klein_gordon", "scalar_field"):
        m = params["m"]
        kappa = gallery.get(name).defaults["kappa"]
        osq = kappa * kappa + (m * m if name == "klein_gordon" else -m * m)
        omega = math.sqrt(osq)
        psi0 = lambda *xs: np.sin(-kappa * xs[0])
        dpsi0 = lambda *xs: omega * np.cos(-kappa * xs[0])
        return psi0, dpsi0, "periodic"
    raise KfieldError(f"no default initial data for '{name}'")


def cmd_solve(args):
    params = parse_params(args.params)
    entry = gallery.get(args.system) if not os.path.exists(args.system) else None
    s = load_input(args.system, params)
    if entry is None:
        raise KfieldError("solve needs a gallery entry (recipes are per-entry)")
    recipe = entry.recipe
    if args.grid is None:
        raise KfieldError("solve needs --grid")
    grid = fields.Grid.from_spec(args.grid)
    rep = Report(args.json)
    _maybe_timestamp(rep, args)
    rep.add("system", s.name)
    rep.add("recipe", recipe.get("type"))

    if recipe.get("type") == "hyperbolic":
        ham = gallery.instantiate(args.system, params, kind="hamiltonian") \
            if "hamiltonian" in entry.kinds else None
        rhs, speed = gallery.hyperbolic_rhs(ham if ham is not None else s)
        time_axis = recipe.get("time_axis")
        if time_axis == "last":
            time_axis = grid.k - 1
        psi0, dpsi0, bmode = _hyperbolic_initial_data(s, entry)
        sec = fields.evolve_hyperbolic(
            rhs, psi0, dpsi0, grid, time_axis,
            steps=args.steps, boundary=bmode, wave_speed=speed,
        )
        check_sys = gallery.instantiate(args.system, params, kind="lagrangian")
    elif recipe.get("type") == "elliptic":
        op = gallery.elliptic_operator(s, grid)
        sol = gallery.analytic_solution(args.system, recipe["boundary_from"], params)
        boundary = gallery.boundary_from_solution(sol)
        tol = args.tol if args.tol is not None else GRID_TOL
        sec = fields.relax_elliptic(op, boundary, grid, tol=tol)
        check_sys = gallery.instantiate(args.system, params, kind="lagrangian")
    else:
        raise KfieldError(f"entry '{s.name}' has no grid solver recipe")

    res = fields.residual_on_grid(sec, check_sys)
    for family, norms in res.items():
        rep.add(f"residual_{family}", norms.as_dict(),
                f"residual[{family}]: max={_fmt(norms.max)} l2={_fmt(norms.l2)}")
    if recipe.get("type") != "hyperbolic":
        # relaxed solutions must actually satisfy the discrete equations;
        # hyperbolic residuals carry O(h^2) discretization error by design
        tol = args.tol if args.tol is not None else GRID_TOL
        rep.add("pass", max(n.max for n in res.values()) <= 10 * tol)
    if args.out:
        fields.write_csv(sec, args.out)
        rep.add("out", args.out, f"section written to {args.out}")
    rep.emit()
    if rep.payload.get("pass") is False:
        return 1
    return 0


# ---------------------------------------------------------------------------
# legendre


def cmd_legendre(args):
    s = load_input(args.system, parse_params(args.params), kind="lagrangian")
    ind = legendre.induced_hamiltonian(s)
    derived = ind.legendre_map.derived
    at = {nm: 0.0 for nm in s.frame.phase_names(s.kind, s.formalism)}
    at.update(parse_params(args.at) if args.at else {})
    reg = lagrangian.regularity(derived, at)
    rep = Report(args.json)
    _maybe_timestamp(rep, args)
    rep.add("system", s.name)
    momenta = {
        s.frame.p_names[a][i]: str(ind.legendre_map.momenta[a][i])
        for a in range(s.k)
        for i in range(s.n)
    }
    rep.add("momenta", momenta,
            "momenta:\n" + "\n".join(f"  {k} = {v}" for k, v in momenta.items()))
    rep.add("regularity_det", float(_fmt(reg.det)), f"hessian det at point: {_fmt(reg.det)}")
    rep.add("regular", reg.regular)
    if ind.expression is not None:
        rep.add("induced_hamiltonian", str(ind.expression),
                f"induced H = {ind.expression}")
    else:
        rep.add("induced_hamiltonian", None,
                "induced H: numeric evaluator only (non-constant Hessian)")
    from .sampling import sample_box

    pts = sample_box(s.frame.phase_names(s.kind, s.formalism), 20)
    worst = max(legendre.pullback_check(s, pt) for pt in pts)
    rep.add("pullback_defect", float(_fmt(worst)), f"pullback defect (20 pts): {_fmt(worst)}")
    rep.emit()
    tol = args.tol if args.tol is not None else SYMBOLIC_TOL
    return 0 if worst <= max(tol, 1e-8) else 1


# ---------------------------------------------------------------------------
# hamjac


def _with_extra_params(s, extra):
    """Bind CLI-only constants (e.g. Hamilton-Jacobi section coefficients)."""
    missing = {k: v for k, v in extra.items() if k not in s.params}
    if not missing:
        return s
    merged = dict(s.params)
    merged.update(missing)
    return model.SystemDef(
        name=s.name, frame=s.frame, kind=s.kind,
        formalism=s.formalism, expression=s.expression, params=merged,
    )


def cmd_hamjac(args):
    s = load_input(args.system, parse_params(args.params), kind="hamiltonian")
    s = _with_extra_params(s, parse_params(args.params))
    if not args.gamma:
        raise KfieldError("hamjac needs --gamma with k*n comma-separated expressions")
    parts = [p.strip() for p in args.gamma.split(",")]
    if len(parts) != s.k * s.n:
        raise KfieldError(f"--gamma needs {s.k * s.n} expressions for this system")
    gamma = [
        [expr.parse(parts[a * s.n + i]) for i in range(s.n)] for a in range(s.k)
    ]
    spec = hamjac.closed_section(s, gamma)
    defects = hamjac.hj_defect(s, spec)
    tol = args.tol if args.tol is not None else SYMBOLIC_TOL
    rep = Report(args.json)
    _maybe_timestamp(rep, args)
    rep.add("system", s.name)
    rep.add("closedness", float(_fmt(defects.closedness)),
            f"closedness defect: {_fmt(defects.closedness)}")
    rep.add("hj_defect", float(_fmt(defects.hj)), f"hamilton-jacobi defect: {_fmt(defects.hj)}")
    ok = defects.closedness <= tol and defects.hj <= tol

    if args.grid:
        grid = fields.Grid.from_spec(args.grid)
        zg = hamjac.project_field(s, spec)
        q0 = [args.q0] * s.n
        sec, comm = hamjac.integrate_projected(zg, q0, grid)
        res = hamjac.verify_lift(s, spec, sec)
        rep.add("commutativity_defect", float(_fmt(comm)),
                f"commutativity defect: {_fmt(comm)}")
        for family, norms in res.items():
            rep.add(f"residual_{family}", norms.as_dict(),
                    f"lift residual[{family}]: max={_fmt(norms.max)} l2={_fmt(norms.l2)}")
        if args.out:
            fields.write_csv(sec, args.out)
            rep.add("out", args.out, f"section written to {args.out}")
    rep.emit()
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# gallery


def cmd_gallery(args):
    rep = Report(args.json)
    if args.action == "list":
        meta = [e.metadata() for e in gallery.entries()]
        if args.json:
            rep.payload = {"entries": meta}
        else:
            for m in meta:
                rep.lines.append(f"{m['name']}: {m['summary']}")
        rep.emit()
        return 0
    entry = gallery.get(args.name)
    meta = entry.metadata()
    if args.json:
        rep.payload = meta
    else:
        for key in ("name", "summary", "kinds", "defaults", "solutions", "recipe", "note", "links"):
            rep.lines.append(f"{key}: {meta[key]}")
    rep.emit()
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kfield",
        description="derive, verify and integrate first-order classical field theories",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance override (1e-10 point checks, 1e-8 grid checks)")
        p.add_argument("--params", default="", help="parameter overrides name=value[,...]")
        p.add_argument("--timestamps", action="store_true",
                       help="include a timestamp line (off by default; output stays deterministic)")

    p = sub.add_parser("derive", help="print the derived field equations")
    p.add_argument("system", help="system JSON file or gallery entry name")
    p.add_argument("--kind", choices=["hamiltonian", "lagrangian"], default=None)
    common(p)
    p.set_defaults(fn=cmd_derive)

    p = sub.add_parser("check-structure", help="verify the canonical structure axioms")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cosymplectic", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_check_structure)

    p = sub.add_parser("check-solution", help="check a k-vector field against the field equations")
    p.add_argument("system")
    p.add_argument("--field", default=None, help="JSON file with component expressions")
    common(p)
    p.set_defaults(fn=cmd_check_solution)

    p = sub.add_parser("solve", help="run the entry's default grid solver")
    p.add_argument("system")
    p.add_argument("--grid", default=None, help="min:max:count[,min:max:count...]")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--out", default=None, help="write the section as CSV")
    common(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("legendre", help="Legendre transform report")
    p.add_argument("system")
    p.add_argument("--at", default=None, help="evaluation point name=value[,...]")
    common(p)
    p.set_defaults(fn=cmd_legendre)

    p = sub.add_parser("hamjac", help="Hamilton-Jacobi checks and projected integration")
    p.add_argument("system")
    p.add_argument("--gamma", default=None, help="k*n comma-separated expressions (alpha-major)")
    p.add_argument("--grid", default=None)
    p.add_argument("--q0", type=float, default=1.0, help="corner value of the integral section")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(fn=cmd_hamjac)

    p = sub.add_parser("gallery", help="list or show the example registry")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_gallery)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (NoConvergenceError, CflViolationError, NonFiniteError) as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return 1
    except KfieldError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
