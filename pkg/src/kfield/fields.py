"""Grid sections, finite-difference residuals, and PDE solvers.

Field sections live on rectangular k-dimensional grids.  Residuals of the
HDW / Euler-Lagrange equations are evaluated with 2nd-order central
stencils (boundary layers excluded as NaN).  A leapfrog integrator handles
the hyperbolic gallery systems, a lexicographic Gauss-Seidel relaxation
with local Newton updates the elliptic ones; both are bitwise
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr, model
from .errors import (
    CflViolationError,
    GridTooSmallError,
    MissingFieldError,
    NoConvergenceError,
    NonFiniteError,
    ShapeMismatchError,
    StepFailureError,
)


@dataclass(frozen=True)
class Grid:
    """Rectangular grid: one (min, max, count) triple per axis, count >= 3."""

    axes: tuple

    def __post_init__(self):
        for lo, hi, count in self.axes:
            if count < 3:
                raise GridTooSmallError("each axis needs at least 3 points")
            if not hi > lo:
                raise GridTooSmallError("axis bounds must satisfy max > min")

    @classmethod
    def from_spec(cls, spec: str):
        """Parse 'min:max:count[,min:max:count...]'."""
        axes = []
        for part in spec.split(","):
            try:
                lo, hi, count = part.split(":")
                axes.append((float(lo), float(hi), int(count)))
            except ValueError:
                raise GridTooSmallError(
                    f"bad grid axis '{part}' (expected min:max:count)"
                ) from None
        return cls(axes=tuple(axes))

    @property
    def k(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(count for _, _, count in self.axes)

    @property
    def spacings(self):
        return tuple((hi - lo) / (count - 1) for lo, hi, count in self.axes)

    def coords(self, axis):
        lo, hi, count = self.axes[axis]
        return np.linspace(lo, hi, count)

    def meshes(self):
        return np.meshgrid(*(self.coords(a) for a in range(self.k)), indexing="ij")


@dataclass(frozen=True)
class GridSection:
    """Sampled field values psi^i, optionally with momenta or velocities.

    values:     (n, *grid.shape)
    momenta:    (k, n, *grid.shape)   [psi^alpha_i]
    velocities: (n, k, *grid.shape)   [psi^i_alpha]
    """

    grid: Grid
    values: np.ndarray
    momenta: np.ndarray | None = None
    velocities: np.ndarray | None = None

    def __post_init__(self):
        shape = self.grid.shape
        if self.values.ndim != 1 + len(shape) or self.values.shape[1:] != shape:
            raise ShapeMismatchError("values must have shape (n, *grid.shape)")
        if not np.isfinite(self.values).all():
            raise NonFiniteError("section values must be finite")
        n = self.values.shape[0]
        if self.momenta is not None:
            if self.momenta.shape[1:] != (n, *shape):
                raise ShapeMismatchError("momenta must have shape (k, n, *grid.shape)")
            if not np.isfinite(self.momenta).all():
                raise NonFiniteError("momenta must be finite")
        if self.velocities is not None:
            if self.velocities.shape[0] != n or self.velocities.shape[2:] != shape:
                raise ShapeMismatchError("velocities must have shape (n, k, *grid.shape)")
            if not np.isfinite(self.velocities).all():
                raise NonFiniteError("velocities must be finite")

    @property
    def n(self):
        return self.values.shape[0]


def fd_partial(grid, arr, axis, order=1):
    """2nd-order central difference along an axis; boundary layer is NaN.

    order=1 gives the first derivative, order=2 the second; mixed second
    derivatives are taken by nesting order-1 calls.  The first argument may
    be a GridSection, in which case `arr` selects a stored field: an int i
    for psi^i, ('p', alpha, i) for a momentum, ('v', i, alpha) for a
    velocity (all indices 0-based).
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if isinstance(grid, GridSection):
        sec, grid = grid, grid.grid
        if isinstance(arr, int):
            arr = sec.values[arr]
        elif isinstance(arr, tuple) and arr and arr[0] == "p":
            if sec.momenta is None:
                raise MissingFieldError("section carries no momentum fields")
            arr = sec.momenta[arr[1], arr[2]]
        elif isinstance(arr, tuple) and arr and arr[0] == "v":
            if sec.velocities is None:
                raise MissingFieldError("section carries no velocity fields")
            arr = sec.velocities[arr[1], arr[2]]
        else:
            raise ValueError(f"unknown field selector {arr!r}")
    arr = np.asarray(arr, dtype=float)
    count = grid.shape[axis]
    if count < 3:
        raise GridTooSmallError("need at least 3 points for central differences")
    h = grid.spacings[axis]
    out = np.full_like(arr, np.nan)
    # slices relative to the trailing grid axes of arr
    offset = arr.ndim - grid.k
    ax = offset + axis
    mid = [slice(None)] * arr.ndim
    plus = [slice(None)] * arr.ndim
    minus = [slice(None)] * arr.ndim
    mid[ax] = slice(1, -1)
    plus[ax] = slice(2, None)
    minus[ax] = slice(None, -2)
    mid, plus, minus = tuple(mid), tuple(plus), tuple(minus)
    if order == 1:
        out[mid] = (arr[plus] - arr[minus]) / (2 * h)
    else:
        out[mid] = (arr[plus] - 2 * arr[mid] + arr[minus]) / (h * h)
    return out


@dataclass(frozen=True)
class ResidualNorms:
    max: float
    l2: float

    def as_dict(self):
        return {"max": self.max, "l2": self.l2}


def _norms(residual_arrays):
    stacked = np.concatenate([np.ravel(r) for r in residual_arrays])
    valid = stacked[np.isfinite(stacked)]
    if valid.size == 0:
        raise GridTooSmallError("no interior point survives the stencil margins")
    return ResidualNorms(
        max=float(np.max(np.abs(valid))),
        l2=float(np.sqrt(np.mean(valid**2))),
    )


def section_env(sec: GridSection, s: model.SystemDef, with_fd_velocities=False):
    """Evaluation environment mapping frame names to grid arrays."""
    frame = s.frame
    env = dict(s.bind())
    for a, mesh in enumerate(sec.grid.meshes()):
        if a < len(frame.x_names):
            env[frame.x_names[a]] = mesh
    for i, nm in enumerate(frame.q_names):
        env[nm] = sec.values[i]
    if sec.momenta is not None:
        for a, row in enumerate(frame.p_names):
            for i, nm in enumerate(row):
                env[nm] = sec.momenta[a, i]
    if sec.velocities is not None:
        for i, row in enumerate(frame.v_names):
            for a, nm in enumerate(row):
                env[nm] = sec.velocities[i, a]
    elif with_fd_velocities:
        for i, row in enumerate(frame.v_names):
            for a, nm in enumerate(row):
                env[nm] = fd_partial(sec.grid, sec.values[i], a, 1)
    return env


def residual_on_grid(sec: GridSection, s: model.SystemDef):
    """Finite-difference residual norms of the field equations on a section.

    Hamiltonian systems (momenta required): the 'velocity' family is
    d psi^i/dx^alpha - dH/dp^alpha_i, the 'trace' family is
    sum_alpha d psi^alpha_i/dx^alpha + dH/dq^i.  Lagrangian systems need
    only psi (velocities synthesized by central differences) and report the
    'euler_lagrange' family, plus 'prolongation' when stored velocities are
    present.  Returns {family: ResidualNorms}.
    """
    grid = sec.grid
    k, n = s.k, s.n
    if grid.k != k:
        raise ShapeMismatchError(f"grid has {grid.k} axes, system expects {k}")
    if sec.n != n:
        raise ShapeMismatchError(f"section has {sec.n} fields, system expects {n}")
    h = s.expression
    out = {}
    if s.kind == model.HAMILTONIAN:
        if sec.momenta is None:
            raise MissingFieldError("hamiltonian residuals need momentum fields")
        env = section_env(sec, s)
        vel = []
        for a in range(k):
            for i in range(n):
                rhs = expr.eval_array(expr.diff(h, s.frame.p_names[a][i]), env)
                vel.append(fd_partial(grid, sec.values[i], a, 1) - rhs)
        trace = []
        for i in range(n):
            acc = expr.eval_array(expr.diff(h, s.frame.q_names[i]), env)
            acc = np.broadcast_to(acc, grid.shape).astype(float).copy()
            for a in range(k):
                acc = acc + fd_partial(grid, sec.momenta[a, i], a, 1)
            trace.append(acc)
        out["velocity"] = _norms(vel)
        out["trace"] = _norms(trace)
        return out

    env = section_env(sec, s, with_fd_velocities=sec.velocities is None)
    el = []
    for i in range(n):
        acc = -np.broadcast_to(
            expr.eval_array(expr.diff(h, s.frame.q_names[i]), env), grid.shape
        ).astype(float)
        for a in range(k):
            theta = expr.eval_array(expr.diff(h, s.frame.v_names[i][a]), env)
            theta = np.broadcast_to(theta, grid.shape).astype(float)
            acc = acc + fd_partial(grid, theta, a, 1)
        el.append(acc)
    out["euler_lagrange"] = _norms(el)
    if sec.velocities is not None:
        prol = []
        for i in range(n):
            for a in range(k):
                prol.append(sec.velocities[i, a] - fd_partial(grid, sec.values[i], a, 1))
        out["prolongation"] = _norms(prol)
    return out


# ---------------------------------------------------------------------------
# hyperbolic integrator


class SpatialOps:
    """Finite-difference helpers over the spatial axes of a space-time grid.

    Neighbor indexing is periodic (grid endpoints identified) or clamped
    (dirichlet; edge entries are never used for updates there).
    """

    def __init__(self, grid, spatial_axes, periodic):
        self.grid = grid
        self.spatial_axes = tuple(spatial_axes)
        self.periodic = periodic
        self._plus = {}
        self._minus = {}
        for pos, ax in enumerate(self.spatial_axes):
            count = grid.shape[ax]
            idx = np.arange(count)
            if periodic:
                plus = np.where(idx + 1 <= count - 1, idx + 1, 1)
                minus = np.where(idx - 1 >= 0, idx - 1, count - 2)
            else:
                plus = np.minimum(idx + 1, count - 1)
                minus = np.maximum(idx - 1, 0)
            self._plus[pos] = plus
            self._minus[pos] = minus

    def _take(self, arr, pos, table):
        return np.take(arr, table, axis=pos)

    def d1(self, arr, pos):
        h = self.grid.spacings[self.spatial_axes[pos]]
        return (self._take(arr, pos, self._plus[pos]) - self._take(arr, pos, self._minus[pos])) / (2 * h)

    def d2(self, arr, pos):
        h = self.grid.spacings[self.spatial_axes[pos]]
        return (
            self._take(arr, pos, self._plus[pos])
            - 2 * arr
            + self._take(arr, pos, self._minus[pos])
        ) / (h * h)

    def meshes(self):
        axes = self.spatial_axes
        return np.meshgrid(*(self.grid.coords(a) for a in axes), indexing="ij")


def evolve_hyperbolic(
    rhs,
    psi0,
    dpsi0,
    grid: Grid,
    time_axis: int,
    steps=None,
    boundary="periodic",
    wave_speed=1.0,
) -> GridSection:
    """Leapfrog integration of psi_tt = F(psi, spatial partials).

    rhs is either a callable F(psi, sp: SpatialOps) -> array over the
    spatial grid, or a SystemDef of a gallery entry with a hyperbolic
    recipe.  psi0 / dpsi0 are arrays over the spatial grid or callables of
    the spatial meshes.  The grid includes the time axis; steps, when
    given, must equal its count - 1.  CFL wave_speed*dt/h <= 0.9 is
    enforced up front.
    """
    if isinstance(rhs, model.SystemDef):
        from . import gallery

        rhs, wave_speed = gallery.hyperbolic_rhs(rhs)
    if boundary not in ("periodic", "dirichlet"):
        raise ValueError("boundary must be 'periodic' or 'dirichlet'")
    k = grid.k
    if not 0 <= time_axis < k:
        raise ValueError("time_axis out of range")
    spatial_axes = [a for a in range(k) if a != time_axis]
    dt = grid.spacings[time_axis]
    h_min = min(grid.spacings[a] for a in spatial_axes) if spatial_axes else dt
    if wave_speed * dt / h_min > 0.9 + 1e-12:
        raise CflViolationError(
            f"CFL number {wave_speed * dt / h_min:.3f} exceeds 0.9"
        )
    steps_needed = grid.shape[time_axis] - 1
    if steps is not None and steps != steps_needed:
        raise ValueError(f"steps={steps} but the time axis has {steps_needed} intervals")

    sp = SpatialOps(grid, spatial_axes, periodic=boundary == "periodic")
    meshes = sp.meshes()
    u0 = np.asarray(psi0(*meshes) if callable(psi0) else psi0, dtype=float)
    v0 = np.asarray(dpsi0(*meshes) if callable(dpsi0) else dpsi0, dtype=float)
    spatial_shape = tuple(grid.shape[a] for a in spatial_axes)
    if u0.shape != spatial_shape or v0.shape != spatial_shape:
        raise ShapeMismatchError("initial data must match the spatial grid shape")

    boundary_mask = None
    if boundary == "dirichlet" and spatial_axes:
        boundary_mask = np.zeros(spatial_shape, dtype=bool)
        for pos in range(len(spatial_axes)):
            sl = [slice(None)] * len(spatial_shape)
            sl[pos] = 0
            boundary_mask[tuple(sl)] = True
            sl[pos] = -1
            boundary_mask[tuple(sl)] = True

    frames = np.empty((steps_needed + 1, *spatial_shape))
    frames[0] = u0
    u_prev = u0
    u_cur = u0 + dt * v0 + 0.5 * dt * dt * rhs(u0, sp)
    if boundary_mask is not None:
        u_cur[boundary_mask] = u0[boundary_mask]
    if not np.isfinite(u_cur).all():
        raise NonFiniteError("non-finite state after the first step")
    frames[1] = u_cur
    for m in range(2, steps_needed + 1):
        u_next = 2 * u_cur - u_prev + dt * dt * rhs(u_cur, sp)
        if boundary_mask is not None:
            u_next[boundary_mask] = u0[boundary_mask]
        if not np.isfinite(u_next).all():
            raise NonFiniteError(f"non-finite state at step {m}")
        frames[m] = u_next
        u_prev, u_cur = u_cur, u_next

    values = np.moveaxis(frames, 0, time_axis)[np.newaxis, ...]
    return GridSection(grid=grid, values=values)


# ---------------------------------------------------------------------------
# elliptic relaxation


class EllipticOperator:
    """Pointwise residual of an elliptic system at interior grid nodes.

    residual(values, idx) returns the length-n residual tuple at a node;
    diag(values, idx, field) the derivative of residual[field] with respect
    to the center value of that field (numeric fallback when not given).
    """

    def __init__(self, n_fields, residual, diag=None):
        self.n_fields = n_fields
        self._residual = residual
        self._diag = diag

    def residual(self, values, idx):
        return self._residual(values, idx)

    def diag(self, values, idx, field):
        if self._diag is not None:
            return self._diag(values, idx, field)
        base = self._residual(values, idx)[field]
        center = values[field][idx]
        delta = 1e-7 * max(1.0, abs(center))
        values[field][idx] = center + delta
        bumped = self._residual(values, idx)[field]
        values[field][idx] = center
        return (bumped - base) / delta


def relax_elliptic(op: EllipticOperator, boundary, grid: Grid, tol=1e-10, max_iters=20000) -> GridSection:
    """Nonlinear Gauss-Seidel with one local Newton update per node visit.

    Nodes are swept in lexicographic order (fixed; results are bitwise
    deterministic).  `boundary` maps a coordinate tuple to the n Dirichlet
    values; interior starts at zero.  Stops when the max interior residual
    is <= tol, else raises NoConvergenceError(max_iters).
    """
    n = op.n_fields
    shape = grid.shape
    coords = [grid.coords(a) for a in range(grid.k)]
    values = [np.zeros(shape) for _ in range(n)]

    interior = []
    for idx in np.ndindex(*shape):
        if any(j == 0 or j == shape[a] - 1 for a, j in enumerate(idx)):
            point = tuple(coords[a][j] for a, j in enumerate(idx))
            bvals = boundary(point)
            for f in range(n):
                values[f][idx] = bvals[f]
        else:
            interior.append(idx)

    for sweep in range(max_iters):
        for idx in interior:
            for f in range(n):
                r = op.residual(values, idx)[f]
                d = op.diag(values, idx, f)
                if d == 0.0:
                    raise NoConvergenceError(sweep, float(abs(r)))
                values[f][idx] -= r / d
        worst = 0.0
        for idx in interior:
            res = op.residual(values, idx)
            for f in range(n):
                mag = abs(res[f])
                if mag > worst:
                    worst = mag
        if worst <= tol:
            return GridSection(grid=grid, values=np.stack(values))
    raise NoConvergenceError(max_iters, worst)


# ---------------------------------------------------------------------------
# CSV serialization (IEEE round-trip: 17 significant digits)


def _headers(sec: GridSection, k):
    n = sec.n
    head = [f"x{a}" for a in range(1, k + 1)]
    head += [f"psi_{i}" for i in range(1, n + 1)]
    if sec.momenta is not None:
        kk = sec.momenta.shape[0]
        head += [f"p_{a}_{i}" for a in range(1, kk + 1) for i in range(1, n + 1)]
    if sec.velocities is not None:
        kk = sec.velocities.shape[1]
        head += [f"v_{i}_{a}" for i in range(1, n + 1) for a in range(1, kk + 1)]
    return head


def write_csv(sec: GridSection, f):
    """Row-major CSV dump of a section (see README for the column schema)."""
    if isinstance(f, (str, bytes)):
        with open(f, "w") as handle:
            return write_csv(sec, handle)
    grid = sec.grid
    k = grid.k
    coords = [grid.coords(a) for a in range(k)]
    f.write(",".join(_headers(sec, k)) + "\n")
    n = sec.n
    for idx in np.ndindex(*grid.shape):
        row = [coords[a][idx[a]] for a in range(k)]
        row += [sec.values[i][idx] for i in range(n)]
        if sec.momenta is not None:
            row += [sec.momenta[a, i][idx] for a in range(sec.momenta.shape[0]) for i in range(n)]
        if sec.velocities is not None:
            row += [
                sec.velocities[i, a][idx]
                for i in range(n)
                for a in range(sec.velocities.shape[1])
            ]
        f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_csv(f) -> GridSection:
    """Rebuild a GridSection from write_csv output."""
    if isinstance(f, (str, bytes)):
        with open(f) as handle:
            return read_csv(handle)
    header = f.readline().strip().split(",")
    k = sum(1 for h in header if h.startswith("x"))
    n = sum(1 for h in header if h.startswith("psi_"))
    p_cols = [h for h in header if h.startswith("p_")]
    v_cols = [h for h in header if h.startswith("v_")]
    data = np.loadtxt(f, delimiter=",", ndmin=2)
    axes = []
    counts = []
    for a in range(k):
        col = data[:, a]
        uniq = col[np.sort(np.unique(col, return_index=True)[1])]
        axes.append((float(uniq[0]), float(uniq[-1]), len(uniq)))
        counts.append(len(uniq))
    if int(np.prod(counts)) != data.shape[0]:
        raise ShapeMismatchError("row count does not match a full rectangular grid")
    grid = Grid(axes=tuple(axes))
    shape = grid.shape

    def grab(col):
        return data[:, col].reshape(shape)

    values = np.stack([grab(k + i) for i in range(n)])
    momenta = None
    velocities = None
    col = k + n
    if p_cols:
        kk = len(p_cols) // n
        momenta = np.stack(
            [
                np.stack([grab(col + a * n + i) for i in range(n)])
                for a in range(kk)
            ]
        )
        col += len(p_cols)
    if v_cols:
        kk = len(v_cols) // n
        velocities = np.stack(
            [
                np.stack([grab(col + i * kk + a) for a in range(kk)])
                for i in range(n)
            ]
        )
    return GridSection(grid=grid, values=values, momenta=momenta, velocities=velocities)
