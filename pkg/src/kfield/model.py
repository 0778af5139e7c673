"""Coordinate frames, field-theory system definitions and k-vector fields.

A SystemDef bundles a coordinate frame with a Hamiltonian or Lagrangian
expression and a formalism tag.  Systems load from / print to the JSON
schema documented in the README; expressions stay symbolic with parameter
values kept as default bindings.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import expr
from .errors import (
    FormalismError,
    FreeVariableError,
    SchemaError,
    ShapeMismatchError,
)

HAMILTONIAN = "hamiltonian"
LAGRANGIAN = "lagrangian"
K_SYMPLECTIC = "k-symplectic"
K_COSYMPLECTIC = "k-cosymplectic"


@dataclass(frozen=True)
class CoordFrame:
    """Adapted coordinate names for a (k, n) field theory.

    p_names[alpha][i] names the momentum conjugate to q^i in the alpha-th
    slot; v_names[i][alpha] names the corresponding velocity coordinate.
    """

    k: int
    n: int
    x_names: tuple
    q_names: tuple
    p_names: tuple  # k rows of n names
    v_names: tuple  # n rows of k names

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise SchemaError("k and n must both be >= 1")
        if len(self.x_names) != self.k or len(self.q_names) != self.n:
            raise SchemaError("coordinate name lists do not match (k, n)")
        if len(self.p_names) != self.k or any(len(r) != self.n for r in self.p_names):
            raise SchemaError("momentum names must form a k x n grid")
        if len(self.v_names) != self.n or any(len(r) != self.k for r in self.v_names):
            raise SchemaError("velocity names must form an n x k grid")
        names = list(self.all_names())
        if len(set(names)) != len(names):
            raise SchemaError("coordinate names must be pairwise distinct")

    @classmethod
    def default(cls, k, n, names=None):
        """Build a frame from (k, n) and an optional partial name override."""
        names = names or {}
        compact = k <= 9 and n <= 9
        x = names.get("x") or [f"x{a}" for a in range(1, k + 1)]
        q = names.get("q") or [f"q{i}" for i in range(1, n + 1)]
        if "p" in names and names["p"] is not None:
            p = names["p"]
        elif compact:
            p = [[f"p{a}{i}" for i in range(1, n + 1)] for a in range(1, k + 1)]
        else:
            p = [[f"p_{a}_{i}" for i in range(1, n + 1)] for a in range(1, k + 1)]
        if "v" in names and names["v"] is not None:
            v = names["v"]
        elif compact:
            v = [[f"v{i}{a}" for a in range(1, k + 1)] for i in range(1, n + 1)]
        else:
            v = [[f"v_{i}_{a}" for a in range(1, k + 1)] for i in range(1, n + 1)]
        return cls(
            k=k,
            n=n,
            x_names=tuple(x),
            q_names=tuple(q),
            p_names=tuple(tuple(r) for r in p),
            v_names=tuple(tuple(r) for r in v),
        )

    def all_names(self):
        out = list(self.x_names) + list(self.q_names)
        for row in self.p_names:
            out.extend(row)
        for row in self.v_names:
            out.extend(row)
        return out

    def flat_p_names(self):
        """Momentum names flattened alpha-major: p^1_1..p^1_n, ..., p^k_n."""
        return [nm for row in self.p_names for nm in row]

    def flat_v_names(self):
        """Velocity names flattened i-major: v^1_1..v^1_k, ..., v^n_k."""
        return [nm for row in self.v_names for nm in row]

    def phase_names(self, kind, formalism):
        """Coordinate names of the phase manifold, in canonical order."""
        fiber = self.flat_p_names() if kind == HAMILTONIAN else self.flat_v_names()
        base = list(self.x_names) if formalism == K_COSYMPLECTIC else []
        return base + list(self.q_names) + fiber


@dataclass(frozen=True)
class SystemDef:
    name: str
    frame: CoordFrame
    kind: str
    formalism: str
    expression: expr.Expr
    params: dict = field(default_factory=dict)

    @property
    def k(self):
        return self.frame.k

    @property
    def n(self):
        return self.frame.n

    def allowed_names(self):
        fiber = self.frame.flat_p_names() if self.kind == HAMILTONIAN else self.frame.flat_v_names()
        allowed = set(self.frame.q_names) | set(fiber) | set(self.params)
        if self.formalism == K_COSYMPLECTIC:
            allowed |= set(self.frame.x_names)
        return allowed

    def bind(self, overrides=None):
        """Parameter bindings merged with optional overrides."""
        env = dict(self.params)
        if overrides:
            env.update(overrides)
        return env


@dataclass(frozen=True)
class KVectorField:
    """Component expressions of a k-vector field in adapted coordinates.

    base[alpha][beta]  = (X_alpha)_beta        (k x k, k-cosymplectic only)
    config[alpha][i]   = (X_alpha)^i           (k x n)
    fiber[alpha][beta][i] = (X_alpha)^beta_i   (momentum slots, Hamiltonian)
                         or (X_alpha)^i_beta   (velocity slots, Lagrangian)
    """

    config: tuple
    fiber: tuple
    base: tuple | None = None

    @property
    def k(self):
        return len(self.config)

    @property
    def n(self):
        return len(self.config[0])


def zero_field(frame: CoordFrame, cosymplectic=False) -> KVectorField:
    k, n = frame.k, frame.n
    z = expr.ZERO
    base = tuple(tuple(z for _ in range(k)) for _ in range(k)) if cosymplectic else None
    return KVectorField(
        config=tuple(tuple(z for _ in range(n)) for _ in range(k)),
        fiber=tuple(tuple(tuple(z for _ in range(n)) for _ in range(k)) for _ in range(k)),
        base=base,
    )


def add_fields(x: KVectorField, y: KVectorField) -> KVectorField:
    """Componentwise sum (used to apply kernel offsets to a solution)."""
    if x.k != y.k or x.n != y.n or (x.base is None) != (y.base is None):
        raise ShapeMismatchError("cannot add k-vector fields of different shapes")
    s = expr.add
    config = tuple(
        tuple(expr.simplify(s(a, b)) for a, b in zip(ra, rb))
        for ra, rb in zip(x.config, y.config)
    )
    fiber = tuple(
        tuple(
            tuple(expr.simplify(s(a, b)) for a, b in zip(ra, rb))
            for ra, rb in zip(pa, pb)
        )
        for pa, pb in zip(x.fiber, y.fiber)
    )
    base = None
    if x.base is not None:
        base = tuple(
            tuple(expr.simplify(s(a, b)) for a, b in zip(ra, rb))
            for ra, rb in zip(x.base, y.base)
        )
    return KVectorField(config=config, fiber=fiber, base=base)


_REQUIRED_KEYS = ("name", "kind", "formalism", "k", "n", "expression")
_ALLOWED_KEYS = set(_REQUIRED_KEYS) | {"params", "names"}


def load_system(json_text: str) -> SystemDef:
    """Parse and fully validate a system definition from JSON text.

    Raises SchemaError for structural problems, FreeVariableError when the
    expression mentions a name outside the frame and parameters, and
    FormalismError when a k-symplectic expression depends on base variables.
    """
    try:
        raw = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise SchemaError("top-level JSON value must be an object")
    missing = [key for key in _REQUIRED_KEYS if key not in raw]
    if missing:
        raise SchemaError(f"missing field(s): {', '.join(missing)}")
    extra = sorted(set(raw) - _ALLOWED_KEYS)
    if extra:
        raise SchemaError(f"unknown field(s): {', '.join(extra)}")
    kind = raw["kind"]
    if kind not in (HAMILTONIAN, LAGRANGIAN):
        raise SchemaError(f"kind must be '{HAMILTONIAN}' or '{LAGRANGIAN}'")
    formalism = raw["formalism"]
    if formalism not in (K_SYMPLECTIC, K_COSYMPLECTIC):
        raise SchemaError(f"formalism must be '{K_SYMPLECTIC}' or '{K_COSYMPLECTIC}'")
    k, n = raw["k"], raw["n"]
    if not isinstance(k, int) or not isinstance(n, int) or k < 1 or n < 1:
        raise SchemaError("k and n must be integers >= 1")
    params = raw.get("params") or {}
    if not isinstance(params, dict) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
        for v in params.values()
    ):
        raise SchemaError("params must map names to finite numbers")
    names = raw.get("names")
    if names is not None and not isinstance(names, dict):
        raise SchemaError("names must be an object")
    frame = CoordFrame.default(k, n, names)
    expression = expr.parse(raw["expression"])

    system = SystemDef(
        name=raw["name"],
        frame=frame,
        kind=kind,
        formalism=formalism,
        expression=expr.simplify(expression),
        params={name: float(v) for name, v in params.items()},
    )
    _check_expression_names(system)
    return system


def _check_expression_names(s: SystemDef):
    free = expr.free_vars(s.expression)
    if s.formalism == K_SYMPLECTIC:
        base_used = free & set(s.frame.x_names)
        if base_used:
            raise FormalismError(
                f"k-symplectic expression depends on base variable(s) "
                f"{', '.join(sorted(base_used))}"
            )
    stray = free - s.allowed_names()
    if stray:
        raise FreeVariableError(stray, context=f"{s.kind} expression")


def print_system(s: SystemDef) -> str:
    """Serialize back to schema JSON (load_system round-trips it)."""
    doc = {
        "name": s.name,
        "kind": s.kind,
        "formalism": s.formalism,
        "k": s.k,
        "n": s.n,
        "expression": str(s.expression),
        "params": dict(s.params),
        "names": {
            "x": list(s.frame.x_names),
            "q": list(s.frame.q_names),
            "p": [list(r) for r in s.frame.p_names],
            "v": [list(r) for r in s.frame.v_names],
        },
    }
    return json.dumps(doc, indent=2)


def validate_field(x: KVectorField, s: SystemDef):
    """Check a k-vector field against a system's frame; raise on violation."""
    k, n = s.k, s.n
    if len(x.config) != k or any(len(r) != n for r in x.config):
        raise ShapeMismatchError(f"config components must be {k} x {n}")
    if len(x.fiber) != k or any(
        len(p) != k or any(len(r) != n for r in p) for p in x.fiber
    ):
        raise ShapeMismatchError(f"fiber components must be {k} x {k} x {n}")
    cosymplectic = s.formalism == K_COSYMPLECTIC
    if cosymplectic:
        if x.base is None:
            raise FormalismError("k-cosymplectic field needs base components")
        if len(x.base) != k or any(len(r) != k for r in x.base):
            raise ShapeMismatchError(f"base components must be {k} x {k}")
    elif x.base is not None:
        raise FormalismError("k-symplectic field must not carry base components")

    allowed = s.allowed_names() | set(s.frame.x_names if cosymplectic else ())
    components = [c for row in x.config for c in row]
    components += [c for plane in x.fiber for row in plane for c in row]
    if x.base is not None:
        components += [c for row in x.base for c in row]
    stray = set()
    for comp in components:
        stray |= expr.free_vars(comp) - allowed
    if stray:
        raise FreeVariableError(stray, context="k-vector field component")
