import json
import math

import numpy as np
import pytest

from kfield import expr, fields, hamjac, model
from kfield.errors import ShapeMismatchError


def make_system(name, k, n, expression, params=None, names=None,
                formalism="k-symplectic"):
    doc = {
        "name": name, "kind": "hamiltonian", "formalism": formalism,
        "k": k, "n": n, "expression": expression, "params": params or {},
    }
    if names:
        doc["names"] = names
    return model.load_system(json.dumps(doc))


def vibrating_string(sigma=1.0, tau=1.0):
    return make_system(
        "vibrating_string", 2, 1, "0.5*(p1^2/sigma - p2^2/tau)",
        params={"sigma": sigma, "tau": tau},
        names={"q": ["q"], "p": [["p1"], ["p2"]]},
    )


def string_gamma(s, a=1.0, b=1.0):
    return hamjac.closed_section(
        s, [[expr.parse(f"{a}*q")], [expr.parse(f"{b}*q")]]
    )


def scalar_field_2d():
    # two-effective-axis reduction of the minkowski scalar field (F = m^2 q^2 / 2)
    return make_system(
        "scalar_field_hj", 2, 1, "0.5*(-p1^2 + p2^2)",
        formalism="k-cosymplectic",
        names={"q": ["q"], "p": [["p1"], ["p2"]]},
    )


def test_hj_defect_string_balanced():
    s = vibrating_string()
    rep = hamjac.hj_defect(s, string_gamma(s, 1.0, 1.0))
    assert rep.closedness == 0.0
    assert rep.hj <= 1e-12


def test_hj_defect_string_unbalanced():
    s = vibrating_string()
    rep = hamjac.hj_defect(s, string_gamma(s, 1.0, 2.0))
    # d/dq of H(gamma) = (a^2 - b^2) q = -3q; halton |q| gets close to 1
    assert 2.8 <= rep.hj <= 3.0


def test_hj_defect_trivial():
    s = make_system("pfree", 2, 1, "0.5*(p1 - p1)*0 + 7",
                    names={"q": ["q"], "p": [["p1"], ["p2"]]})
    spec = hamjac.closed_section(s, [[expr.ZERO], [expr.ZERO]])
    rep = hamjac.hj_defect(s, spec)
    assert rep.closedness == 0.0 and rep.hj == 0.0


def test_closed_section_shape_and_names():
    s = vibrating_string()
    with pytest.raises(ShapeMismatchError):
        hamjac.closed_section(s, [[expr.ZERO]])
    with pytest.raises(ShapeMismatchError):
        hamjac.closed_section(s, [[expr.parse("p1")], [expr.ZERO]])


def test_closed_section_with_potentials():
    s = vibrating_string()
    spec = hamjac.closed_section(
        s,
        [[expr.parse("q")], [expr.parse("q")]],
        potentials=[expr.parse("0.5*q^2"), expr.parse("0.5*q^2")],
    )
    assert spec.potentials is not None
    with pytest.raises(ShapeMismatchError):
        hamjac.closed_section(
            s,
            [[expr.parse("q")], [expr.parse("q")]],
            potentials=[expr.parse("q^2"), expr.parse("0.5*q^2")],
        )


def test_project_field_string():
    s = vibrating_string(sigma=2.0, tau=4.0)
    zg = hamjac.project_field(s, string_gamma(s, 1.5, 0.5))
    for q in (0.3, -1.2):
        env = s.bind({"q": q})
        assert zg.components[0][0].eval(env) == pytest.approx(1.5 * q / 2.0)
        assert zg.components[1][0].eval(env) == pytest.approx(-0.5 * q / 4.0)


def test_project_field_momentum_free_hamiltonian():
    s = make_system("nop", 2, 1, "q^2", names={"q": ["q"], "p": [["p1"], ["p2"]]})
    spec = hamjac.closed_section(s, [[expr.parse("q")], [expr.parse("q")]])
    zg = hamjac.project_field(s, spec)
    assert all(c.is_const(0.0) for row in zg.components for c in row)


def test_project_field_second_construction_scalar_field():
    # gamma built from a potential phi(x): Z^gamma_alpha = d/dx^alpha + dphi/dx^alpha d/dq
    s = scalar_field_2d()
    phi = expr.parse("x1^2 - x2^2")
    gamma = [[expr.simplify(expr.neg(expr.diff(phi, "x1")))], [expr.diff(phi, "x2")]]
    zg = hamjac.project_field(s, hamjac.closed_section(s, gamma))
    for x1, x2 in ((0.2, -0.4), (1.0, 0.5)):
        env = {"x1": x1, "x2": x2, "q": 0.0}
        assert zg.components[0][0].eval(env) == pytest.approx(2 * x1)
        assert zg.components[1][0].eval(env) == pytest.approx(-2 * x2)


def test_integrate_vibrating_string_exponential():
    s = vibrating_string()
    zg = hamjac.project_field(s, string_gamma(s))
    grid = fields.Grid(axes=((0.0, 1.0, 65), (0.0, 1.0, 65)))
    c0 = 1.0
    sec, defect = hamjac.integrate_projected(zg, [c0], grid)
    x1, x2 = grid.meshes()
    exact = c0 * np.exp(x1 - x2)
    assert float(np.max(np.abs(sec.values[0] - exact))) <= 1e-6
    assert defect <= 1e-9


def test_integrate_zero_field_constant_section():
    s = make_system("nop", 2, 1, "q^2", names={"q": ["q"], "p": [["p1"], ["p2"]]})
    spec = hamjac.closed_section(s, [[expr.parse("q")], [expr.parse("q")]])
    zg = hamjac.project_field(s, spec)
    grid = fields.Grid(axes=((0.0, 1.0, 9), (0.0, 1.0, 9)))
    sec, defect = hamjac.integrate_projected(zg, [0.7], grid)
    assert np.max(np.abs(sec.values[0] - 0.7)) == 0.0
    assert defect == 0.0


def test_integrate_scalar_field_rational_solution():
    s = scalar_field_2d()
    spec = hamjac.closed_section(
        s, [[expr.parse("0.5*q^2")], [expr.parse("0.5*q^2")]]
    )
    rep = hamjac.hj_defect(s, spec)
    assert rep.hj <= 1e-12 and rep.closedness <= 1e-12
    zg = hamjac.project_field(s, spec)
    grid = fields.Grid(axes=((0.0, 1.0, 65), (0.0, 1.0, 65)))
    c0 = 4.0
    sec, defect = hamjac.integrate_projected(zg, [2.0 / c0], grid)
    x1, x2 = grid.meshes()
    exact = 2.0 / (x1 - x2 + c0)
    assert float(np.max(np.abs(sec.values[0] - exact))) <= 1e-6
    assert defect <= 1e-9


def test_verify_lift_string_second_order():
    s = vibrating_string()
    spec = string_gamma(s)
    zg = hamjac.project_field(s, spec)

    def residual(count):
        grid = fields.Grid(axes=((0.0, 1.0, count), (0.0, 1.0, count)))
        sec, _ = hamjac.integrate_projected(zg, [1.0], grid)
        res = hamjac.verify_lift(s, spec, sec)
        return max(res["velocity"].max, res["trace"].max)

    e = [residual(c) for c in (17, 33, 65)]
    for coarse, fine in zip(e, e[1:]):
        slope = math.log2(coarse / fine)
        assert 1.7 <= slope <= 2.3


def test_verify_lift_exact_for_constant_h():
    s = make_system("const", 2, 1, "3", names={"q": ["q"], "p": [["p1"], ["p2"]]})
    spec = hamjac.closed_section(s, [[expr.ZERO], [expr.ZERO]])
    grid = fields.Grid(axes=((0.0, 1.0, 9), (0.0, 1.0, 9)))
    sec = fields.GridSection(grid=grid, values=np.zeros((1, *grid.shape)))
    res = hamjac.verify_lift(s, spec, sec)
    assert res["velocity"].max == 0.0 and res["trace"].max == 0.0


def test_w_formulation_consistency_cosymplectic():
    # W^alpha = c_alpha * q^2 * x^alpha / 2 gives gamma^alpha = c_alpha q x^alpha
    s = scalar_field_2d()
    gamma = [[expr.parse("0.7*q*x1")], [expr.parse("0.3*q*x2")]]
    spec = hamjac.closed_section(s, gamma)
    rep = hamjac.hj_defect(s, spec)
    # independent route: d/dq [ sum dW^a/dx^a + H(x, q, dW/dq) ]
    w = [expr.parse("0.5*0.7*q^2*x1"), expr.parse("0.5*0.3*q^2*x2")]
    h_of_w = expr.substitute(
        s.expression, {"p1": expr.diff(w[0], "q"), "p2": expr.diff(w[1], "q")}
    )
    total = expr.add_all([expr.diff(w[0], "x1"), expr.diff(w[1], "x2"), h_of_w])
    ddq = expr.diff(total, "q")
    worst = 0.0
    from kfield.sampling import sample_box

    for pt in sample_box(["x1", "x2", "q"], 100):
        worst = max(worst, abs(ddq.eval(pt)))
    assert rep.hj == pytest.approx(worst, abs=1e-10)


def test_gamma_scaling_changes_defect():
    s = vibrating_string()
    r1 = hamjac.hj_defect(s, string_gamma(s, 1.0, 2.0))
    r2 = hamjac.hj_defect(s, string_gamma(s, 2.0, 4.0))
    assert r2.hj != pytest.approx(r1.hj)


def test_integrate_scalar_field_full_4d():
    # full k=4 example: coefficients (1, 1, 0, 0) satisfy the light-cone
    # relation, psi depends only on x1 - x2
    s = make_system(
        "scalar_field_hj", 4, 1,
        "0.5*(-p1^2 + p2^2 + p3^2 + p4^2)",
        formalism="k-cosymplectic",
        names={"q": ["q"], "p": [[f"p{a}"] for a in range(1, 5)]},
    )
    gamma = [
        [expr.parse("0.5*q^2")],
        [expr.parse("0.5*q^2")],
        [expr.ZERO],
        [expr.ZERO],
    ]
    section = hamjac.closed_section(s, gamma)
    rep = hamjac.hj_defect(s, section)
    assert rep.hj <= 1e-12 and rep.closedness <= 1e-12
    zg = hamjac.project_field(s, section)
    grid = fields.Grid(axes=tuple((0.0, 1.0, 9) for _ in range(4)))
    c0 = 4.0
    sec, defect = hamjac.integrate_projected(zg, [2.0 / c0], grid)
    x1, x2, x3, x4 = grid.meshes()
    exact = 2.0 / (x1 - x2 + c0)
    assert float(np.max(np.abs(sec.values[0] - exact))) <= 1e-7
    assert defect <= 1e-12
    res = hamjac.verify_lift(s, section, sec)
    assert res["velocity"].max <= 5e-3 and res["trace"].max <= 5e-3
