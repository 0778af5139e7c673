"""Toolkit for first-order classical field theories.

Hamiltonian and Lagrangian systems in k-symplectic (base-independent) and
k-cosymplectic (explicit space-time) form: derived field equations,
explicit solution fields and their verification, structure axiom checks,
Legendre transforms, Hamilton-Jacobi machinery, and finite-difference
validation of field sections.
"""

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
    structures,
)
from .errors import KfieldError
from .expr import Expr, diff, evaluate, parse, simplify
from .fields import Grid, GridSection, residual_on_grid
from .model import CoordFrame, KVectorField, SystemDef, load_system, print_system

__version__ = "0.1.0"

__all__ = [
    "CoordFrame",
    "Expr",
    "Grid",
    "GridSection",
    "KVectorField",
    "KfieldError",
    "SystemDef",
    "cosymplectic",
    "diff",
    "evaluate",
    "expr",
    "fields",
    "gallery",
    "hamiltonian",
    "hamjac",
    "lagrangian",
    "legendre",
    "load_system",
    "model",
    "parse",
    "print_system",
    "residual_on_grid",
    "simplify",
    "structures",
]
