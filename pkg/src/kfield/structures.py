"""Pointwise verification of k-symplectic and k-cosymplectic structures.

Structures are represented at a point: each two-form is a d x d
antisymmetric matrix acting as w(u, v) = u^T A v, each one-form a length-d
vector, and the distribution V a list of coordinate indices whose unit
vectors span it.  The Darboux theorems justify checking the canonical
constant-coefficient model only; Frobenius integrability of V is not
certified numerically (no procedure available), see README.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NoUniqueReebError

ANTISYM_TOL = 1e-12
RANK_TOL = 1e-10  # relative to the largest absolute entry
VANISH_TOL = 1e-12
REEB_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class CanonicalStructure:
    """Canonical constant-coefficient structure in adapted coordinates.

    Coordinate order: x^1..x^k (cosymplectic only), q^1..q^n, then momenta
    p^alpha_i flattened alpha-major.  etas is a k x d array or None.
    """

    etas: np.ndarray | None
    omegas: tuple
    vertical: tuple
    dim: int


@dataclass(frozen=True)
class StructureReport:
    vanishes_on_v: bool
    kernel_intersection_dim: int
    passed: bool
    eta_wedge_nonzero: bool | None = None
    ker_omega_dim: int | None = None
    reeb: np.ndarray | None = None

    def as_dict(self):
        out = {
            "vanishes_on_V": self.vanishes_on_v,
            "kernel_intersection_dim": self.kernel_intersection_dim,
            "pass": self.passed,
        }
        if self.eta_wedge_nonzero is not None:
            out["eta_wedge_nonzero"] = self.eta_wedge_nonzero
            out["ker_omega_dim"] = self.ker_omega_dim
        if self.reeb is not None:
            out["reeb"] = [[float(v) for v in row] for row in self.reeb]
        return out


def canonical_forms(k: int, n: int, cosymplectic: bool = False) -> CanonicalStructure:
    """Canonical forms of the (k,n) model in adapted coordinates.

    omega^alpha carries +1 at (q^i, p^alpha_i) and -1 transposed; V spans all
    momentum directions; eta^alpha = dx^alpha in the cosymplectic case.
    """
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    off = k if cosymplectic else 0
    d = off + n * (k + 1)
    omegas = []
    for a in range(k):
        m = np.zeros((d, d))
        for i in range(n):
            qi = off + i
            pai = off + n + a * n + i
            m[qi, pai] = 1.0
            m[pai, qi] = -1.0
        omegas.append(m)
    vertical = tuple(range(off + n, d))
    etas = None
    if cosymplectic:
        etas = np.zeros((k, d))
        for a in range(k):
            etas[a, a] = 1.0
    return CanonicalStructure(etas=etas, omegas=tuple(omegas), vertical=vertical, dim=d)


def rank_by_elimination(matrix, tol_factor=RANK_TOL):
    """Matrix rank via Gaussian elimination with per-column partial pivoting.

    The pivot threshold is tol_factor times the largest absolute entry of
    the input (zero matrix has rank 0).
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.size == 0:
        return 0
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return 0
    tol = tol_factor * scale
    rows, cols = a.shape
    rank = 0
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        pivot = row + int(np.argmax(np.abs(a[row:, col])))
        if abs(a[pivot, col]) <= tol:
            continue
        if pivot != row:
            a[[row, pivot]] = a[[pivot, row]]
        a[row + 1 :, :] -= np.outer(a[row + 1 :, col] / a[row, col], a[row, :])
        rank += 1
        row += 1
    return rank


def _check_two_forms(omegas):
    if not omegas:
        raise DimensionMismatchError("need at least one two-form")
    d = omegas[0].shape[0]
    for m in omegas:
        if m.shape != (d, d):
            raise DimensionMismatchError("two-form matrices must be square and same size")
        scale = max(1.0, np.max(np.abs(m)))
        if np.max(np.abs(m + m.T)) > ANTISYM_TOL * scale:
            raise ValueError("two-form matrix is not antisymmetric")
    return d


def verify_structure(omegas, etas=None, vertical=()) -> StructureReport:
    """Check the defining axioms at a point and report dimensions.

    With etas=None this is the k-symplectic test: omega^alpha|_{VxV} = 0 and
    the intersection of the omega kernels is trivial.  With etas given, the
    k-cosymplectic axioms are checked instead, including the requirement
    that the omega-only kernel has dimension exactly k, and the Reeb rows
    are attached to a passing report.
    """
    omegas = [np.asarray(m, dtype=float) for m in omegas]
    d = _check_two_forms(omegas)
    vertical = tuple(vertical)
    if any(idx < 0 or idx >= d for idx in vertical) or len(set(vertical)) != len(vertical):
        raise DimensionMismatchError("vertical indices out of range or repeated")

    vidx = np.array(vertical, dtype=int)
    vanishes = bool(
        all(
            np.max(np.abs(m[np.ix_(vidx, vidx)])) <= VANISH_TOL * max(1.0, np.max(np.abs(m)))
            for m in omegas
        )
    ) if len(vidx) else True

    omega_stack = np.vstack(omegas)

    if etas is None:
        kernel_dim = d - rank_by_elimination(omega_stack)
        passed = vanishes and kernel_dim == 0
        return StructureReport(
            vanishes_on_v=vanishes,
            kernel_intersection_dim=kernel_dim,
            passed=passed,
        )

    etas = np.asarray(etas, dtype=float)
    if etas.ndim != 2 or etas.shape[1] != d:
        raise DimensionMismatchError("eta rows must have length d")
    k = etas.shape[0]
    if len(vidx):
        eta_on_v = np.max(np.abs(etas[:, vidx]))
        vanishes = bool(vanishes and eta_on_v <= VANISH_TOL * max(1.0, np.max(np.abs(etas))))
    eta_independent = rank_by_elimination(etas) == k
    ker_omega_dim = d - rank_by_elimination(omega_stack)
    kernel_dim = d - rank_by_elimination(np.vstack([etas, omega_stack]))
    passed = eta_independent and vanishes and kernel_dim == 0 and ker_omega_dim == k
    reeb = None
    if passed:
        reeb = reeb_fields(etas, omegas)
    return StructureReport(
        vanishes_on_v=vanishes,
        kernel_intersection_dim=kernel_dim,
        eta_wedge_nonzero=eta_independent,
        ker_omega_dim=ker_omega_dim,
        passed=passed,
        reeb=reeb,
    )


def reeb_fields(etas, omegas) -> np.ndarray:
    """Reeb vectors R_alpha with eta^beta(R_alpha) = delta and R_alpha in ker omega^beta.

    Solved as one stacked least-squares system per alpha; residual must stay
    below 1e-10 and the solution must be unique, otherwise NoUniqueReebError.
    """
    etas = np.asarray(etas, dtype=float)
    omegas = [np.asarray(m, dtype=float) for m in omegas]
    d = _check_two_forms(omegas)
    k = etas.shape[0]
    a = np.vstack([etas] + omegas)
    if rank_by_elimination(a) < d:
        raise NoUniqueReebError("Reeb system is rank deficient; solution not unique")
    out = np.zeros((k, d))
    for alpha in range(k):
        b = np.zeros(a.shape[0])
        b[alpha] = 1.0
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        residual = np.max(np.abs(a @ sol - b))
        if residual > REEB_RESIDUAL_TOL:
            raise NoUniqueReebError(f"Reeb conditions unsatisfiable (residual {residual:.3e})")
        out[alpha] = sol
    return out
