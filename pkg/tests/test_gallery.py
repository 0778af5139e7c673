import json
import math

import numpy as np
import pytest

from kfield import expr, fields, gallery, hamiltonian, legendre
from kfield.errors import BadParamError, UnknownEntryError, UnknownSolutionError


def test_instantiate_sine_gordon():
    s = gallery.instantiate("sine_gordon", {"a": 1.0, "Omega": 1.0})
    assert s.kind == "lagrangian"
    assert (s.k, s.n) == (2, 1)


def test_instantiate_wave_hamiltonian_expression():
    s = gallery.instantiate("wave", {"n": 1, "c": 2.0}, kind="hamiltonian")
    assert s.k == 2
    env = s.bind({"q": 0.0, "p1": 2.0, "p2": 3.0})
    assert s.expression.eval(env) == pytest.approx(0.5 * (9.0 - 4.0 / 4.0))


def test_instantiate_laplace_general_n():
    # this entry's base dimension is conventionally named n
    s = gallery.instantiate("laplace", {"n": 5})
    assert s.k == 5 and s.kind == "hamiltonian"


def test_unknown_entry_and_params():
    with pytest.raises(UnknownEntryError):
        gallery.instantiate("nope")
    with pytest.raises(BadParamError):
        gallery.instantiate("sine_gordon", {"bogus": 1})
    with pytest.raises(BadParamError):
        gallery.instantiate("navier", kind="hamiltonian")
    with pytest.raises(UnknownSolutionError):
        gallery.analytic_solution("laplace", "nope")


def test_vibrating_string_value():
    sol = gallery.analytic_solution("vibrating_string", "exp")
    got = sol.values(np.array(0.5), np.array(0.25))
    assert float(got) == pytest.approx(math.exp(0.25))
    assert float(got) == pytest.approx(1.2840254166877414)


def test_laplace_quadratic_value():
    sol = gallery.analytic_solution("laplace", "quadratic")
    assert float(sol.values(np.array(1.0), np.array(2.0))) == pytest.approx(-3.0)


def test_scalar_field_hj_rational_value():
    sol = gallery.analytic_solution("scalar_field_hj", "rational")
    x = [np.array(0.0)] * 4
    assert float(sol.values(*x)) == pytest.approx(0.5)


def test_metadata_json_roundtrips():
    meta = json.loads(gallery.list_metadata_json())
    names = [m["name"] for m in meta]
    assert "sine_gordon" in names and "maxwell_vacuum" in names
    assert all("summary" in m for m in meta)


def _residual_max(s, sol, counts):
    axes = tuple((lo, hi, c) for (lo, hi), c in zip(sol.domain, counts))
    grid = fields.Grid(axes=axes)
    sec = sol.section(grid)
    res = fields.residual_on_grid(sec, s)
    return max(v.max for v in res.values())


# every entry's every analytic solution: residual exact or refining at >= 2nd
# order; counts are given explicitly where the default pair is pre-asymptotic
_CASES = [
    ("electrostatic", "hamiltonian", "poisson_quadratic", {}, None),
    ("wave", "hamiltonian", "dalembert", {}, None),
    ("laplace", "hamiltonian", "quadratic", {}, None),
    ("laplace", "lagrangian", "quadratic", {}, None),
    ("sine_gordon", "hamiltonian", "kink", {}, ((9, 33), (17, 65))),
    ("sine_gordon", "lagrangian", "kink", {}, ((9, 33), (17, 65))),
    ("ginzburg_landau", "hamiltonian", "uniform", {}, None),
    ("ginzburg_landau", "hamiltonian", "tanh_front", {}, None),
    ("quadratic", "hamiltonian", "product_sine", {}, None),
    ("navier", "lagrangian", "linear", {}, None),
    ("minimal_surface", "lagrangian", "plane", {}, None),
    ("minimal_surface", "lagrangian", "catenoid_slice", {},
     ((17, 17), (33, 33))),
    ("scalar_field", "hamiltonian", "plane_wave", {}, None),
    ("klein_gordon", "hamiltonian", "plane_wave", {}, None),
    ("klein_gordon", "lagrangian", "plane_wave", {},
     ((17, 17, 5, 5), (33, 33, 5, 5))),
    ("scalar_field_cosymplectic", "hamiltonian", "plane_wave", {}, None),
    ("vibrating_string", "hamiltonian", "exp", {}, None),
    ("scalar_field_hj", "hamiltonian", "rational", {}, None),
    ("harmonic_map_flat", "lagrangian", "linear", {}, None),
    ("harmonic_map_flat", "lagrangian", "quadratic_harmonic", {"n": 1}, None),
    ("maxwell_vacuum", "lagrangian", "plane_wave", {},
     ((9, 5, 5, 9), (17, 5, 5, 17))),
]


@pytest.mark.parametrize("name,kind,which,params,counts", _CASES)
def test_analytic_solutions_residual_refines(name, kind, which, params, counts):
    s = gallery.instantiate(name, params, kind=kind)
    sol = gallery.analytic_solution(name, which, params)
    k = len(sol.domain)
    if counts is None:
        coarse_counts = (9,) * k if k <= 2 else (9, 9) + (5,) * (k - 2)
        fine_counts = (17,) * k if k <= 2 else (17, 17) + (5,) * (k - 2)
    else:
        coarse_counts, fine_counts = counts
    e1 = _residual_max(s, sol, coarse_counts)
    if e1 <= 1e-9:
        return  # stencil-exact solution
    e2 = _residual_max(s, sol, fine_counts)
    assert e1 / e2 >= 2.0**1.7, (name, which, e1, e2)


def test_gauge_solutions_pass_for_every_gallery_hamiltonian():
    for name in ("electrostatic", "wave", "laplace", "sine_gordon",
                 "ginzburg_landau", "quadratic", "vibrating_string",
                 "scalar_field", "klein_gordon"):
        s = gallery.instantiate(name, kind="hamiltonian")
        rep = hamiltonian.check_solution(hamiltonian.gauge_solution(s), s)
        assert rep.is_solution, name


_LEGENDRE_PAIRS = ("wave", "sine_gordon", "ginzburg_landau", "laplace", "quadratic",
                   "klein_gordon", "scalar_field")


@pytest.mark.parametrize("name", _LEGENDRE_PAIRS)
def test_legendre_duality_derivatives_match_registered_hamiltonian(name):
    slag = gallery.instantiate(name, kind="lagrangian")
    sham = gallery.instantiate(name, kind="hamiltonian")
    ind = legendre.induced_hamiltonian(slag)
    assert ind.expression is not None, name
    names = sham.frame.phase_names("hamiltonian", "k-symplectic")
    from kfield.sampling import sample_box

    for var in names:
        d_ind = expr.diff(ind.expression, var)
        d_pap = expr.diff(sham.expression, var)
        for pt in sample_box(names, 50):
            env = sham.bind(pt)
            a, b = d_ind.eval(env), d_pap.eval(env)
            assert abs(a - b) <= 1e-8, (name, var)


@pytest.mark.parametrize("name", _LEGENDRE_PAIRS)
def test_legendre_pullback_small_on_gallery_pairs(name):
    s = gallery.instantiate(name, kind="lagrangian")
    from kfield.sampling import sample_box

    pts = sample_box(s.frame.phase_names(s.kind, s.formalism), 50)
    worst = max(legendre.pullback_check(s, pt) for pt in pts)
    assert worst <= 1e-8, name


def test_elliptic_poisson_3d_recovery():
    s = gallery.instantiate("electrostatic", {"r": 1.0}, kind="hamiltonian")
    sol = gallery.analytic_solution("electrostatic", "poisson_quadratic")
    grid = fields.Grid(axes=(((-1.0, 1.0, 9),) * 3))
    sec = fields.relax_elliptic(
        gallery.elliptic_operator(s, grid),
        gallery.boundary_from_solution(sol),
        grid,
        tol=1e-10,
    )
    import numpy as np

    err = float(np.max(np.abs(sec.values - sol.section(grid).values)))
    assert err <= 1e-8  # quadratic target is exact for the discrete operator


def test_wave_multidimensional_gauge():
    s = gallery.instantiate("wave", {"n": 2, "c": 2.0}, kind="hamiltonian")
    assert s.k == 3
    rep = hamiltonian.check_solution(hamiltonian.gauge_solution(s), s)
    assert rep.is_solution and rep.max_defect <= 1e-12
