"""Registry of the worked example systems.

Each entry builds a validated SystemDef (Hamiltonian and/or Lagrangian
form), carries analytic solutions usable as residual oracles, and names a
default solver recipe.  Boundary and initial data are this package's own
choices (the equations themselves do not prescribe any) and are documented
in each entry's note.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fields, model
from .errors import BadParamError, UnknownEntryError, UnknownSolutionError


@dataclass(frozen=True)
class Solution:
    """Analytic section: field evaluator plus optional momentum evaluator.

    values(meshes) returns (n, *shape); momenta(meshes) (k, n, *shape) when
    the momentum fields are known in closed form.  domain is the suggested
    validity box, one (lo, hi) per base axis.
    """

    name: str
    note: str
    n: int
    values: object
    momenta: object = None
    domain: tuple = ()

    def section(self, grid: fields.Grid) -> fields.GridSection:
        meshes = grid.meshes()
        values = np.asarray(self.values(*meshes), dtype=float)
        if values.ndim == len(grid.shape):
            values = values[np.newaxis]
        momenta = None
        if self.momenta is not None:
            momenta = np.asarray(self.momenta(*meshes), dtype=float)
        return fields.GridSection(grid=grid, values=values, momenta=momenta)


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    summary: str
    kinds: tuple
    defaults: dict
    build: object
    solutions: dict = field(default_factory=dict)
    recipe: dict = field(default_factory=dict)
    note: str = ""
    links: tuple = ()

    def metadata(self):
        return {
            "name": self.name,
            "summary": self.summary,
            "kinds": list(self.kinds),
            "defaults": dict(self.defaults),
            "solutions": sorted(self.solutions),
            "recipe": {k: v for k, v in self.recipe.items() if not callable(v)},
            "note": self.note,
            "links": list(self.links),
        }


_REGISTRY: dict = {}


def register(entry: GalleryEntry):
    _REGISTRY[entry.name] = entry


def entries():
    return [_REGISTRY[name] for name in sorted(_REGISTRY)]


def get(name) -> GalleryEntry:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownEntryError(f"no gallery entry named '{name}'") from None


def instantiate(name, params=None, kind=None) -> model.SystemDef:
    entry = get(name)
    merged = dict(entry.defaults)
    for key, value in (params or {}).items():
        if key not in merged:
            raise BadParamError(f"{name} has no parameter '{key}'")
        merged[key] = value
    if kind is None:
        kind = entry.kinds[0]
    if kind not in entry.kinds:
        raise BadParamError(f"{name} is not available as '{kind}'")
    doc = entry.build(merged, kind)
    return model.load_system(json.dumps(doc))


def analytic_solution(name, which, params=None) -> Solution:
    entry = get(name)
    merged = dict(entry.defaults)
    merged.update(params or {})
    try:
        factory = entry.solutions[which]
    except KeyError:
        raise UnknownSolutionError(f"{name} has no solution '{which}'") from None
    return factory(merged)


def list_metadata_json() -> str:
    return json.dumps([e.metadata() for e in entries()], indent=2)


def _int(params, key):
    value = params[key]
    if value != int(value):
        raise BadParamError(f"parameter '{key}' must be an integer")
    return int(value)


def _scalar_names(k):
    return {"q": ["q"], "p": [[f"p{a}"] for a in range(1, k + 1)],
            "v": [[f"v{a}" for a in range(1, k + 1)]]}


# ---------------------------------------------------------------------------
# electrostatics


def _electrostatic_build(params, kind):
    r = params["r"]
    if kind == "hamiltonian":
        expression = "4*pi*r*q + 0.5*(p1^2 + p2^2 + p3^2)"
    else:
        expression = "0.5*(v1^2 + v2^2 + v3^2) - 4*pi*r*q"
    return {
        "name": "electrostatic", "kind": kind, "formalism": "k-symplectic",
        "k": 3, "n": 1, "expression": expression,
        "params": {"pi": math.pi, "r": r}, "names": _scalar_names(3),
    }


def _poisson_quadratic(params):
    r = params["r"]
    c = 4 * math.pi * r / 3.0

    def values(x1, x2, x3):
        return -(c / 2.0) * (x1**2 + x2**2 + x3**2)

    def momenta(x1, x2, x3):
        return np.stack([(-c * x)[np.newaxis] for x in (x1, x2, x3)])

    return Solution(
        name="poisson_quadratic",
        note="radially symmetric quadratic potential of a uniform charge r",
        n=1, values=values, momenta=momenta,
        domain=((-1.0, 1.0),) * 3,
    )


register(GalleryEntry(
    name="electrostatic",
    summary="electric potential of a constant charge density (3-symplectic)",
    kinds=("hamiltonian", "lagrangian"),
    defaults={"r": 1.0},
    build=_electrostatic_build,
    solutions={"poisson_quadratic": _poisson_quadratic},
    recipe={"type": "elliptic", "boundary_from": "poisson_quadratic"},
    note="constant charge density r and euclidean metric; the x-dependent "
         "variant lives in electrostatic_cosymplectic",
    links=("laplace",),
))


def _electrostatic_cosym_build(params, kind):
    r0, r1 = params["r0"], params["r1"]
    return {
        "name": "electrostatic_cosymplectic", "kind": "hamiltonian",
        "formalism": "k-cosymplectic", "k": 3, "n": 1,
        "expression": "4*pi*(r0 + r1*x1^2)*q + 0.5*(p1^2 + p2^2 + p3^2)",
        "params": {"pi": math.pi, "r0": r0, "r1": r1},
        "names": _scalar_names(3),
    }


register(GalleryEntry(
    name="electrostatic_cosymplectic",
    summary="electrostatics with space-dependent charge density r(x) = r0 + r1*x1^2",
    kinds=("hamiltonian",),
    defaults={"r0": 1.0, "r1": 0.0},
    build=_electrostatic_cosym_build,
    recipe={"type": "none"},
    note="r1 = 0 is the autonomous case used by the suspension checks",
    links=("electrostatic",),
))


# ---------------------------------------------------------------------------
# wave equation


def _wave_build(params, kind):
    n = _int(params, "n")
    k = n + 1
    if kind == "hamiltonian":
        spatial = " + ".join(f"p{a}^2" for a in range(1, n + 1))
        expression = f"0.5*(p{k}^2 - ({spatial})/c^2)"
    else:
        spatial = " + ".join(f"v{a}^2" for a in range(1, n + 1))
        expression = f"0.5*(v{k}^2 - c^2*({spatial}))"
    return {
        "name": "wave", "kind": kind, "formalism": "k-symplectic",
        "k": k, "n": 1, "expression": expression,
        "params": {"c": params["c"]}, "names": _scalar_names(k),
    }


def _wave_dalembert(params):
    if _int(params, "n") != 1:
        raise BadParamError("the dalembert solution is registered for n = 1")
    c = params["c"]

    def values(x1, x2):
        return np.sin(x1 - c * x2)

    def momenta(x1, x2):
        u = np.cos(x1 - c * x2)
        return np.stack([(-c * c * u)[np.newaxis], (-c * u)[np.newaxis]])

    return Solution(
        name="dalembert",
        note="travelling wave sin(x - c t); base axes are (x, t)",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 2 * math.pi), (0.0, 1.0)),
    )


register(GalleryEntry(
    name="wave",
    summary="n-dimensional wave equation as an (n+1)-symplectic system",
    kinds=("hamiltonian", "lagrangian"),
    defaults={"n": 1, "c": 1.0},
    build=_wave_build,
    solutions={"dalembert": _wave_dalembert},
    recipe={"type": "hyperbolic", "time_axis": "last"},
    note="leapfrog defaults: periodic travelling-wave data sin(x), -c cos(x)",
))


# ---------------------------------------------------------------------------
# Laplace


def _laplace_build(params, kind):
    k = _int(params, "n")
    if kind == "hamiltonian":
        expression = "0.5*(" + " + ".join(f"p{a}^2" for a in range(1, k + 1)) + ")"
    else:
        expression = "0.5*(" + " + ".join(f"v{a}^2" for a in range(1, k + 1)) + ")"
    return {
        "name": "laplace", "kind": kind, "formalism": "k-symplectic",
        "k": k, "n": 1, "expression": expression,
        "params": {}, "names": _scalar_names(k),
    }


def _laplace_quadratic(params):
    k = _int(params, "n")
    if k < 2:
        raise BadParamError("the harmonic quadratic needs n >= 2")

    def values(*xs):
        return xs[0] ** 2 - xs[1] ** 2

    def momenta(*xs):
        rows = [2 * xs[0], -2 * xs[1]] + [np.zeros_like(xs[0]) for _ in range(k - 2)]
        return np.stack([row[np.newaxis] for row in rows])

    return Solution(
        name="quadratic",
        note="harmonic polynomial x1^2 - x2^2",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 1.0),) * k,
    )


register(GalleryEntry(
    name="laplace",
    summary="Laplace equation on R^n as an n-symplectic system",
    kinds=("hamiltonian", "lagrangian"),
    defaults={"n": 2},
    build=_laplace_build,
    solutions={"quadratic": _laplace_quadratic},
    recipe={"type": "elliptic", "boundary_from": "quadratic"},
    note="relaxation defaults: Dirichlet data sampled from the harmonic quadratic",
    links=("electrostatic",),
))


# ---------------------------------------------------------------------------
# Sine-Gordon


def _sine_gordon_build(params, kind):
    if kind == "hamiltonian":
        expression = "0.5*(p1^2 - p2^2/a^2) - Omega^2*cos(q)"
    else:
        expression = "0.5*(v1^2 - a^2*v2^2) - Omega^2*(1 - cos(q))"
    return {
        "name": "sine_gordon", "kind": kind, "formalism": "k-symplectic",
        "k": 2, "n": 1, "expression": expression,
        "params": {"a": params["a"], "Omega": params["Omega"]},
        "names": _scalar_names(2),
    }


def _sine_gordon_kink(params):
    if params["a"] != 1.0 or params["Omega"] != 1.0:
        raise BadParamError("the kink is registered for a = Omega = 1")
    v = params["v"]
    if not -1.0 < v < 1.0:
        raise BadParamError("kink speed must satisfy |v| < 1")
    gam = 1.0 / math.sqrt(1.0 - v * v)

    def values(x1, x2):
        return 4.0 * np.arctan(np.exp(gam * (x2 - v * x1)))

    def momenta(x1, x2):
        sech = 1.0 / np.cosh(gam * (x2 - v * x1))
        dpsi_dt = -2.0 * v * gam * sech
        dpsi_dx = 2.0 * gam * sech
        return np.stack([dpsi_dt[np.newaxis], (-dpsi_dx)[np.newaxis]])

    return Solution(
        name="kink",
        note=f"kink travelling at speed v={v}; base axes are (t, x)",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 1.0), (-6.0, 6.0)),
    )


register(GalleryEntry(
    name="sine_gordon",
    summary="Sine-Gordon equation psi_tt - a^2 psi_xx + Omega^2 sin(psi) = 0",
    kinds=("lagrangian", "hamiltonian"),
    defaults={"a": 1.0, "Omega": 1.0, "v": 0.5},
    build=_sine_gordon_build,
    solutions={"kink": _sine_gordon_kink},
    recipe={"type": "hyperbolic", "time_axis": 0},
    note="leapfrog defaults: kink initial data, Dirichlet ends on a wide box",
))


# ---------------------------------------------------------------------------
# Ginzburg-Landau


def _ginzburg_landau_build(params, kind):
    if kind == "hamiltonian":
        expression = "0.5*(p1^2 - p2^2/a^2) - lam*(q^2 - 1)^2"
    else:
        expression = "0.5*(v1^2 - a^2*v2^2) + lam*(q^2 - 1)^2"
    return {
        "name": "ginzburg_landau", "kind": kind, "formalism": "k-symplectic",
        "k": 2, "n": 1, "expression": expression,
        "params": {"a": params["a"], "lam": params["lam"]},
        "names": _scalar_names(2),
    }


def _gl_uniform(params):
    def values(x1, x2):
        return np.ones_like(x1)

    def momenta(x1, x2):
        z = np.zeros_like(x1)
        return np.stack([z[np.newaxis], z[np.newaxis]])

    return Solution(
        name="uniform",
        note="one of the constant vacuum states psi = 1",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 1.0), (0.0, 1.0)),
    )


def _gl_tanh_front(params):
    lam = params["lam"]
    if lam <= 0:
        raise BadParamError("the tanh front needs lam > 0")
    kf = math.sqrt(2.0 * lam)

    def values(x1, x2):
        return np.tanh(kf * x1)

    def momenta(x1, x2):
        dpsi_dt = kf * (1.0 - np.tanh(kf * x1) ** 2)
        return np.stack([dpsi_dt[np.newaxis], np.zeros_like(x1)[np.newaxis]])

    return Solution(
        name="tanh_front",
        note="time-like front tanh(sqrt(2 lambda) x1), spatially uniform",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 1.0), (0.0, 1.0)),
    )


register(GalleryEntry(
    name="ginzburg_landau",
    summary="Ginzburg-Landau equation psi_tt - a^2 psi_xx - 4 lambda psi (psi^2-1) = 0",
    kinds=("lagrangian", "hamiltonian"),
    defaults={"a": 1.0, "lam": 1.0},
    build=_ginzburg_landau_build,
    solutions={"uniform": _gl_uniform, "tanh_front": _gl_tanh_front},
    recipe={"type": "hyperbolic", "time_axis": 0},
    note="leapfrog defaults: tanh-front initial data, Dirichlet ends",
))


# ---------------------------------------------------------------------------
# quadratic systems


def _quadratic_build(params, kind):
    k = _int(params, "k")
    try:
        cs = [params[f"c{a}"] for a in range(1, k + 1)]
    except KeyError as exc:
        raise BadParamError(f"missing metric coefficient {exc}") from None
    if any(c == 0 for c in cs):
        raise BadParamError("metric coefficients must be nonzero")
    if kind == "hamiltonian":
        terms = " + ".join(f"c{a}*p{a}^2" for a in range(1, k + 1))
        expression = f"0.5*({terms}) + 0.5*v0*q^2"
    else:
        terms = " + ".join(f"v{a}^2/c{a}" for a in range(1, k + 1))
        expression = f"0.5*({terms}) - 0.5*v0*q^2"
    p = {f"c{a}": cs[a - 1] for a in range(1, k + 1)}
    p["v0"] = params["v0"]
    return {
        "name": "quadratic", "kind": kind, "formalism": "k-symplectic",
        "k": k, "n": 1, "expression": expression,
        "params": p, "names": _scalar_names(k),
    }


def _quadratic_product_sine(params):
    k = _int(params, "k")
    if k != 2:
        raise BadParamError("the product-sine solution is registered for k = 2")
    c1, c2, v0 = params["c1"], params["c2"], params["v0"]
    # separable mode: the trace equation needs w1^2/c1 + w2^2/c2 = v0
    w1 = math.sqrt(v0 * c1 / 2.0)
    w2 = math.sqrt(v0 * c2 / 2.0)

    def values(x1, x2):
        return np.sin(w1 * x1) * np.sin(w2 * x2)

    def momenta(x1, x2):
        p1 = w1 * np.cos(w1 * x1) * np.sin(w2 * x2) / c1
        p2 = w2 * np.sin(w1 * x1) * np.cos(w2 * x2) / c2
        return np.stack([p1[np.newaxis], p2[np.newaxis]])

    return Solution(
        name="product_sine",
        note="separable standing mode of the quadratic system",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 1.0), (0.0, 1.0)),
    )


register(GalleryEntry(
    name="quadratic",
    summary="quadratic-type Hamiltonian H = sum c_a (p^a)^2 / 2 + v0 q^2 / 2",
    kinds=("hamiltonian", "lagrangian"),
    defaults={"k": 2, "c1": 1.0, "c2": 2.0, "v0": 1.5},
    build=_quadratic_build,
    solutions={"product_sine": _quadratic_product_sine},
    recipe={"type": "none"},
    note="constant diagonal metrics g^ij_a = c_a delta^ij and potential v0 q^2 / 2",
))


# ---------------------------------------------------------------------------
# Navier


def _navier_build(params, kind):
    if kind != "lagrangian":
        raise BadParamError("navier is registered as a lagrangian system")
    return {
        "name": "navier", "kind": "lagrangian", "formalism": "k-symplectic",
        "k": 2, "n": 2,
        "expression": "(0.5*lam + mu)*(v11^2 + v22^2) + 0.5*mu*(v12^2 + v21^2)"
                      " + (lam + mu)*v11*v22",
        "params": {"lam": params["lam"], "mu": params["mu"]},
    }


def _navier_linear(params):
    def values(x1, x2):
        return np.stack([x1, -x2])

    return Solution(
        name="linear",
        note="divergence-free linear displacement (x1, -x2)",
        n=2, values=values,
        domain=((0.0, 1.0), (0.0, 1.0)),
    )


register(GalleryEntry(
    name="navier",
    summary="Navier's elastostatic equations for a planar displacement field",
    kinds=("lagrangian",),
    defaults={"lam": 1.0, "mu": 1.0},
    build=_navier_build,
    solutions={"linear": _navier_linear},
    recipe={"type": "elliptic", "boundary_from": "linear"},
    note="regular iff mu != 0 and lam != -1.5 mu; relaxation defaults: "
         "Dirichlet data from the linear field",
))


# ---------------------------------------------------------------------------
# minimal surfaces


def _minimal_surface_build(params, kind):
    if kind != "lagrangian":
        raise BadParamError("minimal_surface is registered as a lagrangian system")
    return {
        "name": "minimal_surface", "kind": "lagrangian", "formalism": "k-symplectic",
        "k": 2, "n": 1, "expression": "sqrt(1 + v1^2 + v2^2)",
        "params": {}, "names": _scalar_names(2),
    }


def _minimal_plane(params):
    a1, a2 = params["a1"], params["a2"]

    def values(x1, x2):
        return a1 * x1 + a2 * x2

    return Solution(
        name="plane",
        note=f"plane {a1}*x1 + {a2}*x2 (exact for the discrete operator)",
        n=1, values=values,
        domain=((0.0, 1.0), (0.0, 1.0)),
    )


def _minimal_catenoid_slice(params):
    def values(x1, x2):
        r = np.sqrt(x1**2 + x2**2)
        return np.log(r + np.sqrt(r**2 - 1.0))

    return Solution(
        name="catenoid_slice",
        note="upper catenoid graph arccosh(sqrt(x1^2+x2^2)), valid for r > 1",
        n=1, values=values,
        domain=((1.2, 2.0), (1.2, 2.0)),
    )


register(GalleryEntry(
    name="minimal_surface",
    summary="minimal surface equation for graphs over the plane",
    kinds=("lagrangian",),
    defaults={"a1": 0.3, "a2": 0.7},
    build=_minimal_surface_build,
    solutions={"plane": _minimal_plane, "catenoid_slice": _minimal_catenoid_slice},
    recipe={"type": "elliptic", "boundary_from": "plane"},
    note="relaxation defaults: Dirichlet data from the plane solution",
))


# ---------------------------------------------------------------------------
# massive scalar field / Klein-Gordon (k-symplectic and k-cosymplectic)


def _scalar_field_expr(kind, potential_sign):
    # minkowski metric diag(-1, 1, 1, 1); x^1 is the timelike axis
    if kind == "hamiltonian":
        base = "0.5*(-p1^2 + p2^2 + p3^2 + p4^2)"
    else:
        base = "0.5*(-v1^2 + v2^2 + v3^2 + v4^2)"
        potential_sign = -potential_sign
    sign = "+" if potential_sign > 0 else "-"
    return f"{base} {sign} 0.5*m^2*q^2"


def _scalar_field_build(params, kind):
    return {
        "name": "scalar_field", "kind": kind, "formalism": "k-symplectic",
        "k": 4, "n": 1, "expression": _scalar_field_expr(kind, +1),
        "params": {"m": params["m"]}, "names": _scalar_names(4),
    }


def _klein_gordon_build(params, kind):
    return {
        "name": "klein_gordon", "kind": kind, "formalism": "k-symplectic",
        "k": 4, "n": 1, "expression": _scalar_field_expr(kind, -1),
        "params": {"m": params["m"]}, "names": _scalar_names(4),
    }


def _scalar_field_cosym_build(params, kind):
    doc = _scalar_field_build(params, kind)
    doc["name"] = "scalar_field_cosymplectic"
    doc["formalism"] = "k-cosymplectic"
    return doc


def _plane_wave(omega_sq_of_kappa, note):
    def factory(params):
        m = params["m"]
        kappa = params["kappa"]
        osq = omega_sq_of_kappa(kappa, m)
        if osq <= 0:
            raise BadParamError("kappa too small for a propagating mode")
        omega = math.sqrt(osq)

        def values(x1, x2, x3, x4):
            return np.sin(omega * x1 - kappa * x2)

        def momenta(x1, x2, x3, x4):
            u = np.cos(omega * x1 - kappa * x2)
            z = np.zeros_like(x1)
            return np.stack([
                (-omega * u)[np.newaxis],
                (-kappa * u)[np.newaxis],
                z[np.newaxis],
                z[np.newaxis],
            ])

        return Solution(
            name="plane_wave",
            note=note,
            n=1, values=values, momenta=momenta,
            domain=((0.0, 1.0),) * 4,
        )

    return factory


register(GalleryEntry(
    name="scalar_field",
    summary="massive scalar field with F = 0 on minkowski space (4-symplectic)",
    kinds=("hamiltonian", "lagrangian"),
    defaults={"m": 1.0, "kappa": 1.5},
    build=_scalar_field_build,
    solutions={
        "plane_wave": _plane_wave(
            lambda kappa, m: kappa * kappa - m * m,
            "mode sin(omega x1 - kappa x2) with omega^2 = kappa^2 - m^2",
        )
    },
    recipe={"type": "hyperbolic", "time_axis": 0},
    links=("klein_gordon", "scalar_field_cosymplectic"),
))


register(GalleryEntry(
    name="klein_gordon",
    summary="Klein-Gordon field (scalar field with F = m^2 q^2)",
    kinds=("hamiltonian", "lagrangian"),
    defaults={"m": 1.0, "kappa": 1.0},
    build=_klein_gordon_build,
    solutions={
        "plane_wave": _plane_wave(
            lambda kappa, m: kappa * kappa + m * m,
            "mode sin(omega x1 - kappa x2) with omega^2 = kappa^2 + m^2",
        )
    },
    recipe={"type": "hyperbolic", "time_axis": 0},
    links=("scalar_field",),
))


register(GalleryEntry(
    name="scalar_field_cosymplectic",
    summary="massive scalar field in k-cosymplectic form (autonomous)",
    kinds=("hamiltonian", "lagrangian"),
    defaults={"m": 1.0, "kappa": 1.5},
    build=_scalar_field_cosym_build,
    solutions={
        "plane_wave": _plane_wave(
            lambda kappa, m: kappa * kappa - m * m,
            "mode sin(omega x1 - kappa x2) with omega^2 = kappa^2 - m^2",
        )
    },
    recipe={"type": "none"},
    links=("scalar_field",),
))


# ---------------------------------------------------------------------------
# vibrating string (Hamilton-Jacobi showcase)


def _vibrating_string_build(params, kind):
    if kind != "hamiltonian":
        raise BadParamError("vibrating_string is registered as a hamiltonian system")
    return {
        "name": "vibrating_string", "kind": "hamiltonian", "formalism": "k-symplectic",
        "k": 2, "n": 1, "expression": "0.5*(p1^2/sigma - p2^2/tau)",
        "params": {"sigma": params["sigma"], "tau": params["tau"]},
        "names": _scalar_names(2),
    }


def _string_exponential(params):
    sigma, tau = params["sigma"], params["tau"]
    a, b, c0 = params["a"], params["b"], params["C"]

    def values(x1, x2):
        return c0 * np.exp((a / sigma) * x1 - (b / tau) * x2)

    def momenta(x1, x2):
        psi = values(x1, x2)
        return np.stack([(a * psi)[np.newaxis], (b * psi)[np.newaxis]])

    return Solution(
        name="exp",
        note="C exp((a/sigma) x1 - (b/tau) x2); solves HDW when tau a^2 = sigma b^2",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 1.0), (0.0, 1.0)),
    )


register(GalleryEntry(
    name="vibrating_string",
    summary="vibrating string in Hamilton-Jacobi form (2-symplectic)",
    kinds=("hamiltonian",),
    defaults={"sigma": 1.0, "tau": 1.0, "a": 1.0, "b": 1.0, "C": 1.0},
    build=_vibrating_string_build,
    solutions={"exp": _string_exponential},
    recipe={"type": "hamjac", "gamma": ["a*q", "b*q"]},
    note="gamma = (a q dq, b q dq) satisfies d(H o gamma) = 0 iff tau a^2 = sigma b^2",
))


# ---------------------------------------------------------------------------
# scalar-field Hamilton-Jacobi example (k-cosymplectic)


def _scalar_field_hj_build(params, kind):
    k = _int(params, "k")
    if k not in (2, 4):
        raise BadParamError("scalar_field_hj supports k = 2 (reduction) or k = 4")
    terms = ["-p1^2"] + [f"p{a}^2" for a in range(2, k + 1)]
    return {
        "name": "scalar_field_hj", "kind": "hamiltonian", "formalism": "k-cosymplectic",
        "k": k, "n": 1, "expression": "0.5*(" + " + ".join(terms) + ")",
        "params": {}, "names": _scalar_names(k),
    }


def _scalar_field_hj_rational(params):
    k = _int(params, "k")
    cs = [params[f"c{a}"] for a in range(1, k + 1)]
    c0 = params["C0"]
    if abs(cs[0] ** 2 - sum(c * c for c in cs[1:])) > 1e-12:
        raise BadParamError("rational solution needs c1^2 = c2^2 + ... + ck^2")

    def values(*xs):
        den = c0 + cs[0] * xs[0]
        for a in range(1, k):
            den = den - cs[a] * xs[a]
        return 2.0 / den

    def momenta(*xs):
        psi2 = values(*xs) ** 2
        return np.stack([(0.5 * c * psi2)[np.newaxis] for c in cs])

    return Solution(
        name="rational",
        note="2/(c1 x1 - c2 x2 - ... + C0); momenta are c_a psi^2 / 2",
        n=1, values=values, momenta=momenta,
        domain=((0.0, 1.0),) * k,
    )


register(GalleryEntry(
    name="scalar_field_hj",
    summary="scalar-field Hamilton-Jacobi example, F = m^2 q^2 / 2 (4-cosymplectic)",
    kinds=("hamiltonian",),
    defaults={"k": 4, "c1": 1.0, "c2": 1.0, "c3": 0.0, "c4": 0.0, "C0": 4.0},
    build=_scalar_field_hj_build,
    solutions={"rational": _scalar_field_hj_rational},
    recipe={"type": "hamjac", "gamma": "0.5*c{a}*q^2"},
    note="k = 2 instantiates the two-effective-axis reduction (c3 = c4 = 0)",
    links=("scalar_field_cosymplectic",),
))


# ---------------------------------------------------------------------------
# harmonic maps into a flat target


def _harmonic_map_build(params, kind):
    if kind != "lagrangian":
        raise BadParamError("harmonic_map_flat is registered as a lagrangian system")
    k, n = _int(params, "k"), _int(params, "n")
    frame = model.CoordFrame.default(k, n)
    terms = []
    for i in range(n):
        for a in range(k):
            terms.append(f"{frame.v_names[i][a]}^2")
    return {
        "name": "harmonic_map_flat", "kind": "lagrangian", "formalism": "k-cosymplectic",
        "k": k, "n": n, "expression": "0.5*(" + " + ".join(terms) + ")",
        "params": {},
    }


def _harmonic_linear(params):
    k, n = _int(params, "k"), _int(params, "n")

    def values(*xs):
        rows = []
        for i in range(n):
            acc = np.zeros_like(xs[0])
            for a in range(k):
                acc = acc + ((i + 1) * 0.25 + 0.5 * a) * xs[a]
            rows.append(acc)
        return np.stack(rows)

    return Solution(
        name="linear",
        note="linear maps are harmonic for flat base and target metrics",
        n=n, values=values,
        domain=((0.0, 1.0),) * k,
    )


def _harmonic_quadratic(params):
    k, n = _int(params, "k"), _int(params, "n")
    if k < 2 or n != 1:
        raise BadParamError("the quadratic harmonic solution needs k >= 2, n = 1")

    def values(*xs):
        return xs[0] ** 2 - xs[1] ** 2

    return Solution(
        name="quadratic_harmonic",
        note="harmonic polynomial component map",
        n=1, values=values,
        domain=((0.0, 1.0),) * k,
    )


register(GalleryEntry(
    name="harmonic_map_flat",
    summary="harmonic maps R^k -> R^n with flat base and target metrics",
    kinds=("lagrangian",),
    defaults={"k": 2, "n": 2},
    build=_harmonic_map_build,
    solutions={"linear": _harmonic_linear, "quadratic_harmonic": _harmonic_quadratic},
    recipe={"type": "elliptic", "boundary_from": "linear"},
    note="flat target only (curved targets with Christoffel terms are out of scope)",
))


# ---------------------------------------------------------------------------
# Maxwell in vacuum


def _maxwell_build(params, kind):
    if kind != "lagrangian":
        raise BadParamError("maxwell_vacuum is registered as a lagrangian system")
    expression = (
        "0.5*((v21 - v12)^2 + (v31 - v13)^2 + (v32 - v23)^2"
        " - (v41 - v14)^2 - (v42 - v24)^2 - (v43 - v34)^2)"
    )
    return {
        "name": "maxwell_vacuum", "kind": "lagrangian", "formalism": "k-symplectic",
        "k": 4, "n": 4, "expression": expression, "params": {},
    }


def _maxwell_plane_wave(params):
    def values(x1, x2, x3, x4):
        z = np.zeros_like(x1)
        return np.stack([z, np.sin(x1 - x4), z, z])

    return Solution(
        name="plane_wave",
        note="vector potential A = (0, f(x1 - x4), 0, 0) with f = sin",
        n=4, values=values,
        domain=((0.0, 1.0),) * 4,
    )


register(GalleryEntry(
    name="maxwell_vacuum",
    summary="source-free Maxwell equations via the quadratic curl Lagrangian",
    kinds=("lagrangian",),
    defaults={},
    build=_maxwell_build,
    solutions={"plane_wave": _maxwell_plane_wave},
    recipe={"type": "none"},
    note="residual checks only; no gauge fixing machinery",
))


# ---------------------------------------------------------------------------
# solver recipes


def hyperbolic_rhs(s: model.SystemDef):
    """Second-order-form right-hand side and wave speed for a gallery system.

    Only gallery names are classified; arbitrary systems must hand
    evolve_hyperbolic an explicit callable.
    """
    params = s.bind()
    name = s.name
    if name == "wave":
        c = params["c"]

        def rhs(psi, sp):
            acc = np.zeros_like(psi)
            for pos in range(len(sp.spatial_axes)):
                acc = acc + sp.d2(psi, pos)
            return c * c * acc

        return rhs, c
    if name == "sine_gordon":
        a, omega = params["a"], params["Omega"]

        def rhs(psi, sp):
            return a * a * sp.d2(psi, 0) - omega * omega * np.sin(psi)

        return rhs, a
    if name == "ginzburg_landau":
        a, lam = params["a"], params["lam"]

        def rhs(psi, sp):
            return a * a * sp.d2(psi, 0) + 4.0 * lam * psi * (psi * psi - 1.0)

        return rhs, a
    if name in ("klein_gordon", "scalar_field"):
        m = params["m"]
        sign = -1.0 if name == "klein_gordon" else 1.0

        def rhs(psi, sp):
            acc = np.zeros_like(psi)
            for pos in range(len(sp.spatial_axes)):
                acc = acc + sp.d2(psi, pos)
            return acc + sign * m * m * psi

        return rhs, 1.0
    raise UnknownEntryError(f"no hyperbolic recipe for system '{name}'")


def _laplacian_operator(grid, n, source=0.0):
    """sum of second differences over every axis (plus a constant source)."""
    spacings = grid.spacings
    k = grid.k

    def residual(values, idx):
        out = []
        for f in range(n):
            u = values[f]
            acc = source
            for a in range(k):
                h2 = spacings[a] * spacings[a]
                up = idx[:a] + (idx[a] + 1,) + idx[a + 1 :]
                dn = idx[:a] + (idx[a] - 1,) + idx[a + 1 :]
                acc += (u[up] - 2.0 * u[idx] + u[dn]) / h2
            out.append(acc)
        return out

    diag_value = sum(-2.0 / (h * h) for h in spacings)

    def diag(values, idx, f):
        return diag_value

    return fields.EllipticOperator(n, residual, diag)


def elliptic_operator(s: model.SystemDef, grid: fields.Grid) -> fields.EllipticOperator:
    """Pointwise residual operator of a gallery elliptic system."""
    name = s.name
    if name in ("laplace", "harmonic_map_flat"):
        return _laplacian_operator(grid, s.n)
    if name == "electrostatic":
        # Poisson form: laplacian(psi) + 4 pi r = 0
        return _laplacian_operator(grid, 1, source=4.0 * math.pi * s.bind()["r"])
    if grid.k != 2:
        raise BadParamError(f"the '{name}' recipe is registered for 2D grids")
    hx, hy = grid.spacings
    if name == "navier":
        params = s.bind()
        lam, mu = params["lam"], params["mu"]
        c11 = lam + 2.0 * mu
        c12 = lam + mu

        def residual(values, idx):
            i, j = idx
            u, w = values
            uxx = (u[i + 1, j] - 2.0 * u[i, j] + u[i - 1, j]) / (hx * hx)
            uyy = (u[i, j + 1] - 2.0 * u[i, j] + u[i, j - 1]) / (hy * hy)
            wxx = (w[i + 1, j] - 2.0 * w[i, j] + w[i - 1, j]) / (hx * hx)
            wyy = (w[i, j + 1] - 2.0 * w[i, j] + w[i, j - 1]) / (hy * hy)
            uxy = (
                u[i + 1, j + 1] - u[i + 1, j - 1] - u[i - 1, j + 1] + u[i - 1, j - 1]
            ) / (4.0 * hx * hy)
            wxy = (
                w[i + 1, j + 1] - w[i + 1, j - 1] - w[i - 1, j + 1] + w[i - 1, j - 1]
            ) / (4.0 * hx * hy)
            r1 = c11 * uxx + c12 * wxy + mu * uyy
            r2 = mu * wxx + c12 * uxy + c11 * wyy
            return (r1, r2)

        def diag(values, idx, f):
            if f == 0:
                return -2.0 * c11 / (hx * hx) - 2.0 * mu / (hy * hy)
            return -2.0 * mu / (hx * hx) - 2.0 * c11 / (hy * hy)

        return fields.EllipticOperator(2, residual, diag)

    if name == "minimal_surface":
        def residual(values, idx):
            i, j = idx
            u = values[0]
            ux = (u[i + 1, j] - u[i - 1, j]) / (2.0 * hx)
            uy = (u[i, j + 1] - u[i, j - 1]) / (2.0 * hy)
            uxx = (u[i + 1, j] - 2.0 * u[i, j] + u[i - 1, j]) / (hx * hx)
            uyy = (u[i, j + 1] - 2.0 * u[i, j] + u[i, j - 1]) / (hy * hy)
            uxy = (
                u[i + 1, j + 1] - u[i + 1, j - 1] - u[i - 1, j + 1] + u[i - 1, j - 1]
            ) / (4.0 * hx * hy)
            return ((1.0 + uy * uy) * uxx - 2.0 * ux * uy * uxy + (1.0 + ux * ux) * uyy,)

        def diag(values, idx, f):
            i, j = idx
            u = values[0]
            ux = (u[i + 1, j] - u[i - 1, j]) / (2.0 * hx)
            uy = (u[i, j + 1] - u[i, j - 1]) / (2.0 * hy)
            return -2.0 * (1.0 + uy * uy) / (hx * hx) - 2.0 * (1.0 + ux * ux) / (hy * hy)

        return fields.EllipticOperator(1, residual, diag)

    raise UnknownEntryError(f"no elliptic recipe for system '{name}'")


def boundary_from_solution(sol: Solution):
    """Dirichlet boundary callable that samples an analytic solution."""

    def boundary(point):
        meshes = [np.asarray(c) for c in point]
        vals = np.asarray(sol.values(*meshes), dtype=float)
        if vals.ndim == 0:
            return (float(vals),)
        return tuple(float(v) for v in vals)

    return boundary
