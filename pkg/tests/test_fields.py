import io
import json
import math

import numpy as np
import pytest

from kfield import fields, model
from kfield.errors import (
    CflViolationError,
    GridTooSmallError,
    MissingFieldError,
    NoConvergenceError,
    ShapeMismatchError,
)


def make_system(name, k, n, expression, params=None, names=None, kind="hamiltonian",
                formalism="k-symplectic"):
    doc = {
        "name": name, "kind": kind, "formalism": formalism,
        "k": k, "n": n, "expression": expression, "params": params or {},
    }
    if names:
        doc["names"] = names
    return model.load_system(json.dumps(doc))


def grid2(nx=21, ny=21, lo=0.0, hi=1.0):
    return fields.Grid(axes=((lo, hi, nx), (lo, hi, ny)))


def test_grid_validation():
    with pytest.raises(GridTooSmallError):
        fields.Grid(axes=((0, 1, 2),))
    with pytest.raises(GridTooSmallError):
        fields.Grid(axes=((1, 0, 5),))
    g = fields.Grid.from_spec("0:1:5,-1:1:9")
    assert g.shape == (5, 9)
    assert g.spacings[0] == pytest.approx(0.25)


def test_fd_partial_exact_on_quadratic():
    g = grid2(9, 9)
    x, y = g.meshes()
    psi = x**2
    d2 = fields.fd_partial(g, psi, 0, 2)
    interior = d2[1:-1, 1:-1]
    np.testing.assert_allclose(interior, 2.0, atol=1e-12)
    assert np.isnan(d2[0]).all() and np.isnan(d2[-1]).all()


def test_fd_partial_sin_error_bound():
    g = fields.Grid(axes=((0.0, 1.0, 101),))
    x = g.meshes()[0]
    d1 = fields.fd_partial(g, np.sin(x), 0, 1)
    err = np.abs(d1[1:-1] - np.cos(x[1:-1]))
    assert np.max(err) <= 2e-5  # h^2/6 bound at h=0.01


def test_fd_partial_constant():
    g = grid2(5, 5)
    z = np.ones(g.shape)
    for axis in (0, 1):
        d = fields.fd_partial(g, z, axis, 1)
        assert np.nanmax(np.abs(d)) == 0.0


def laplace_hamiltonian(k=2):
    ps = " + ".join(f"p{a}^2" for a in range(1, k + 1))
    return make_system(
        "laplace", k, 1, f"0.5*({ps})",
        names={"q": ["q"], "p": [[f"p{a}"] for a in range(1, k + 1)]},
    )


def test_residual_laplace_exact_quadratic():
    s = laplace_hamiltonian(2)
    g = grid2(17, 17)
    x, y = g.meshes()
    psi = x**2 - y**2
    momenta = np.stack([(2 * x)[np.newaxis], (-2 * y)[np.newaxis]])
    sec = fields.GridSection(grid=g, values=psi[np.newaxis], momenta=momenta)
    res = fields.residual_on_grid(sec, s)
    assert res["velocity"].max <= 1e-12
    assert res["trace"].max <= 1e-12


def test_residual_missing_momenta():
    s = laplace_hamiltonian(2)
    g = grid2(5, 5)
    sec = fields.GridSection(grid=g, values=np.zeros((1, *g.shape)))
    with pytest.raises(MissingFieldError):
        fields.residual_on_grid(sec, s)


def test_residual_vibrating_string_refines_at_order_two():
    s = make_system(
        "string", 2, 1, "0.5*(p1^2/sigma - p2^2/tau)",
        params={"sigma": 1.0, "tau": 1.0},
        names={"q": ["q"], "p": [["p1"], ["p2"]]},
    )

    def run(count):
        g = grid2(count, count)
        x, y = g.meshes()
        psi = np.exp(x - y)
        momenta = np.stack([psi[np.newaxis], psi[np.newaxis]])
        sec = fields.GridSection(grid=g, values=psi[np.newaxis], momenta=momenta)
        res = fields.residual_on_grid(sec, s)
        return max(res["velocity"].max, res["trace"].max)

    e1, e2 = run(17), run(33)
    assert e1 / e2 == pytest.approx(4.0, rel=0.3)


def test_residual_minimal_surface_plane():
    s = make_system(
        "minimal", 2, 1, "sqrt(1 + v1^2 + v2^2)",
        kind="lagrangian",
        names={"q": ["q"], "v": [["v1", "v2"]]},
    )
    g = grid2(9, 9)
    x, y = g.meshes()
    sec = fields.GridSection(grid=g, values=(0.3 * x + 0.7 * y)[np.newaxis])
    res = fields.residual_on_grid(sec, s)
    assert res["euler_lagrange"].max <= 1e-10


def test_residual_prolongation_family():
    s = make_system(
        "lag", 2, 1, "0.5*(v1^2 + v2^2)",
        kind="lagrangian",
        names={"q": ["q"], "v": [["v1", "v2"]]},
    )
    g = grid2(9, 9)
    x, y = g.meshes()
    psi = x + 2 * y
    vel = np.stack([np.stack([np.ones(g.shape), 2 * np.ones(g.shape)])])
    sec = fields.GridSection(grid=g, values=psi[np.newaxis], velocities=vel)
    res = fields.residual_on_grid(sec, s)
    assert res["prolongation"].max <= 1e-12
    assert res["euler_lagrange"].max <= 1e-12


# ---------------------------------------------------------------------------
# leapfrog


def wave_rhs(c=1.0):
    def rhs(psi, sp):
        acc = np.zeros_like(psi)
        for pos in range(len(sp.spatial_axes)):
            acc = acc + sp.d2(psi, pos)
        return c * c * acc

    return rhs


def test_leapfrog_wave_converges_to_dalembert():
    c = 1.0

    def run(nx):
        # travelling wave sin(x - t) on one period, periodic in x
        nt = 2 * nx - 1
        g = fields.Grid(axes=((0.0, 1.0, nt), (0.0, 2 * math.pi, nx)))
        sec = fields.evolve_hyperbolic(
            wave_rhs(c),
            lambda x: np.sin(x),
            lambda x: -c * np.cos(x),
            g,
            time_axis=0,
            boundary="periodic",
        )
        t, x = g.meshes()
        exact = np.sin(x - c * t)
        return float(np.max(np.abs(sec.values[0] - exact)))

    e1, e2 = run(65), run(129)
    slope = math.log2(e1 / e2)
    assert 1.7 <= slope <= 2.3


def test_leapfrog_energy_drift():
    # discrete leapfrog energy for the linear wave is conserved to rounding
    c = 1.0
    nx = 65
    Lx = 2 * math.pi
    dx = Lx / (nx - 1)
    dt = 0.5 * dx  # CFL 0.5
    nt = 1001  # 1000 steps
    g = fields.Grid(axes=((0.0, dt * (nt - 1), nt), (0.0, Lx, nx)))
    sec = fields.evolve_hyperbolic(
        wave_rhs(c), lambda x: np.sin(x), lambda x: -np.cos(x), g, 0, boundary="periodic"
    )
    u = sec.values[0]

    def energy(m):
        du = (u[m + 1] - u[m]) / dt
        fwd = lambda arr: (np.roll(arr[:-1], -1) - arr[:-1]) / dx
        grad_prod = fwd(u[m + 1]) * fwd(u[m])
        return 0.5 * np.sum(du[:-1] ** 2) * dx + 0.5 * c * c * np.sum(grad_prod) * dx

    e0 = energy(0)
    drift = max(abs(energy(m) - e0) for m in range(0, nt - 1, 100))
    assert drift <= 1e-6 * abs(e0)


def test_leapfrog_constant_state():
    g = fields.Grid(axes=((0.0, 0.5, 11), (0.0, 1.0, 11)))
    sec = fields.evolve_hyperbolic(
        lambda psi, sp: np.zeros_like(psi),
        lambda x: np.full_like(x, 3.5),
        lambda x: np.zeros_like(x),
        g,
        0,
    )
    assert np.max(np.abs(sec.values[0] - 3.5)) == 0.0


def test_leapfrog_cfl_violation():
    g = fields.Grid(axes=((0.0, 1.0, 5), (0.0, 1.0, 201)))
    with pytest.raises(CflViolationError):
        fields.evolve_hyperbolic(
            wave_rhs(1.0), lambda x: 0 * x, lambda x: 0 * x, g, 0
        )


def test_leapfrog_determinism():
    g = fields.Grid(axes=((0.0, 0.5, 33), (0.0, 2 * math.pi, 33)))
    runs = [
        fields.evolve_hyperbolic(
            wave_rhs(1.0), lambda x: np.sin(x), lambda x: -np.cos(x), g, 0
        ).values
        for _ in range(2)
    ]
    assert np.array_equal(runs[0], runs[1])


# ---------------------------------------------------------------------------
# elliptic relaxation


def laplace_operator(grid):
    hx, hy = grid.spacings

    def residual(values, idx):
        u = values[0]
        i, j = idx
        rxx = (u[i + 1, j] - 2 * u[i, j] + u[i - 1, j]) / (hx * hx)
        ryy = (u[i, j + 1] - 2 * u[i, j] + u[i, j - 1]) / (hy * hy)
        return (rxx + ryy,)

    def diag(values, idx, field):
        return -2.0 / (hx * hx) - 2.0 / (hy * hy)

    return fields.EllipticOperator(1, residual, diag)


def test_relax_laplace_recovers_harmonic_quadratic():
    g = grid2(33, 33)

    def boundary(pt):
        x, y = pt
        return (x * x - y * y,)

    sec = fields.relax_elliptic(laplace_operator(g), boundary, g, tol=1e-10)
    x, y = g.meshes()
    assert np.max(np.abs(sec.values[0] - (x * x - y * y))) <= 1e-8


def test_relax_elliptic_residual_bound_and_determinism():
    g = grid2(17, 17)

    def boundary(pt):
        x, y = pt
        return (x * x - y * y,)

    op = laplace_operator(g)
    sec1 = fields.relax_elliptic(op, boundary, g, tol=1e-9)
    sec2 = fields.relax_elliptic(op, boundary, g, tol=1e-9)
    assert np.array_equal(sec1.values, sec2.values)
    worst = 0.0
    for i in range(1, 16):
        for j in range(1, 16):
            worst = max(worst, abs(op.residual([sec1.values[0]], (i, j))[0]))
    assert worst <= 10 * 1e-9


def test_relax_no_convergence():
    g = grid2(9, 9)
    with pytest.raises(NoConvergenceError):
        fields.relax_elliptic(
            laplace_operator(g), lambda pt: (pt[0] ** 2 - pt[1] ** 2,), g,
            tol=1e-14, max_iters=3,
        )


def test_nonlinear_local_newton_fallback_derivative():
    # pointwise nonlinear equation u^3 + u = b(x, y) decouples per node and
    # has a strictly positive derivative, so the numeric-diag path converges
    g = grid2(5, 5, lo=1.0, hi=2.0)
    x, y = g.meshes()
    target = x + y

    def residual(values, idx):
        u = values[0][idx]
        t = target[idx]
        return (u**3 + u - (t**3 + t),)

    op = fields.EllipticOperator(1, residual)  # numeric diag
    sec = fields.relax_elliptic(
        op, lambda pt: (pt[0] + pt[1],), g, tol=1e-12, max_iters=200
    )
    assert np.max(np.abs(sec.values[0] - target)) <= 1e-6


# ---------------------------------------------------------------------------
# CSV round trip


def test_csv_roundtrip_with_momenta():
    g = fields.Grid(axes=((0.0, 1.0, 3), (0.0, 2.0, 4)))
    rng = np.random.default_rng(3)
    values = rng.normal(size=(2, 3, 4))
    momenta = rng.normal(size=(2, 2, 3, 4))
    sec = fields.GridSection(grid=g, values=values, momenta=momenta)
    buf = io.StringIO()
    fields.write_csv(sec, buf)
    buf.seek(0)
    head = buf.readline().strip()
    assert head.startswith("x1,x2,psi_1,psi_2,p_1_1")
    buf.seek(0)
    back = fields.read_csv(buf)
    assert np.array_equal(back.values, values)
    assert np.array_equal(back.momenta, momenta)
    assert back.grid == g


def test_csv_roundtrip_velocities():
    g = fields.Grid(axes=((0.0, 1.0, 3),))
    rng = np.random.default_rng(5)
    values = rng.normal(size=(1, 3))
    velocities = rng.normal(size=(1, 2, 3))
    sec = fields.GridSection(grid=g, values=values, velocities=velocities)
    buf = io.StringIO()
    fields.write_csv(sec, buf)
    buf.seek(0)
    back = fields.read_csv(buf)
    assert np.array_equal(back.velocities, velocities)


def test_fd_partial_section_selectors():
    g = grid2(7, 7)
    x, y = g.meshes()
    sec = fields.GridSection(
        grid=g,
        values=(x * y)[np.newaxis],
        momenta=np.stack([(x**2)[np.newaxis], (y**2)[np.newaxis]]),
    )
    d_psi = fields.fd_partial(sec, 0, 0, 1)
    assert np.nanmax(np.abs(d_psi - y)) <= 1e-12
    d_p = fields.fd_partial(sec, ("p", 0, 0), 0, 1)
    assert np.nanmax(np.abs(d_p - 2 * x)) <= 1e-12
    with pytest.raises(MissingFieldError):
        fields.fd_partial(sec, ("v", 0, 0), 0, 1)


def test_evolve_accepts_gallery_system():
    from kfield import gallery

    s = gallery.instantiate("wave", {"c": 1.0}, kind="hamiltonian")
    g = fields.Grid(axes=((0.0, 2 * math.pi, 33), (0.0, 0.5, 17)))
    sec = fields.evolve_hyperbolic(
        s, lambda x: np.sin(x), lambda x: -np.cos(x), g,
        time_axis=1, boundary="periodic",
    )
    x, t = g.meshes()
    assert float(np.max(np.abs(sec.values[0] - np.sin(x - t)))) <= 5e-3


def test_leapfrog_nonfinite_detected():
    from kfield.errors import NonFiniteError

    g = fields.Grid(axes=((0.0, 0.1, 5), (0.0, 1.0, 9)))
    with pytest.raises(NonFiniteError):
        fields.evolve_hyperbolic(
            lambda psi, sp: np.full_like(psi, np.inf),
            lambda x: np.zeros_like(x),
            lambda x: np.zeros_like(x),
            g, 0, wave_speed=0.1,
        )


def test_relaxed_section_passes_equation_residual():
    # the relaxed solution must satisfy the continuum equations' own
    # finite-difference residual to within ten times the solver tolerance
    from kfield import gallery

    g = grid2(17, 17)
    s = gallery.instantiate("laplace", kind="hamiltonian")
    sol = gallery.analytic_solution("laplace", "quadratic")
    tol = 1e-9
    sec = fields.relax_elliptic(
        gallery.elliptic_operator(s, g), gallery.boundary_from_solution(sol), g, tol=tol
    )
    check = gallery.instantiate("laplace", kind="lagrangian")
    res = fields.residual_on_grid(sec, check)
    assert res["euler_lagrange"].max <= 10 * tol
