import json
import random

import pytest

from kfield import expr, model
from kfield.errors import (
    FormalismError,
    FreeVariableError,
    SchemaError,
    ShapeMismatchError,
)

SG_JSON = json.dumps(
    {
        "name": "sine_gordon",
        "kind": "lagrangian",
        "formalism": "k-symplectic",
        "k": 2,
        "n": 1,
        "expression": "0.5*(v1^2 - a^2*v2^2) - Omega^2*(1 - cos(q))",
        "params": {"a": 1.0, "Omega": 1.0},
        "names": {"q": ["q"], "v": [["v1", "v2"]]},
    }
)


def test_load_sine_gordon():
    s = model.load_system(SG_JSON)
    assert s.kind == "lagrangian"
    assert (s.k, s.n) == (2, 1)
    assert s.frame.v_names == (("v1", "v2"),)
    env = {"q": 0.3, "v1": 0.5, "v2": -0.2, "a": 1.0, "Omega": 1.0}
    val = s.expression.eval(env)
    import math

    assert val == pytest.approx(0.5 * (0.25 - 0.04) - (1 - math.cos(0.3)))


def test_ksymplectic_rejects_base_dependence():
    doc = json.loads(SG_JSON)
    doc["expression"] = "0.5*v1^2 + x1"
    with pytest.raises(FormalismError):
        model.load_system(json.dumps(doc))


def test_k1_hamiltonian_classical_frame():
    doc = {
        "name": "free",
        "kind": "hamiltonian",
        "formalism": "k-symplectic",
        "k": 1,
        "n": 1,
        "expression": "0.5*p11^2",
    }
    s = model.load_system(json.dumps(doc))
    assert s.frame.p_names == (("p11",),)
    assert s.frame.phase_names("hamiltonian", "k-symplectic") == ["q1", "p11"]


def test_schema_errors():
    with pytest.raises(SchemaError):
        model.load_system("not json")
    with pytest.raises(SchemaError):
        model.load_system(json.dumps({"name": "x"}))
    doc = json.loads(SG_JSON)
    doc["bogus"] = 1
    with pytest.raises(SchemaError):
        model.load_system(json.dumps(doc))
    doc = json.loads(SG_JSON)
    doc["k"] = 0
    with pytest.raises(SchemaError):
        model.load_system(json.dumps(doc))
    doc = json.loads(SG_JSON)
    doc["kind"] = "energy"
    with pytest.raises(SchemaError):
        model.load_system(json.dumps(doc))


def test_free_variable_error():
    doc = json.loads(SG_JSON)
    doc["expression"] = "v1 + mystery"
    with pytest.raises(FreeVariableError):
        model.load_system(json.dumps(doc))


def test_hamiltonian_cannot_use_velocity_names():
    doc = json.loads(SG_JSON)
    doc["kind"] = "hamiltonian"
    # v1/v2 are not in the hamiltonian's allowed set
    with pytest.raises(FreeVariableError):
        model.load_system(json.dumps(doc))


def test_default_names_unique_and_sized():
    frame = model.CoordFrame.default(3, 2)
    assert frame.x_names == ("x1", "x2", "x3")
    assert frame.q_names == ("q1", "q2")
    assert frame.p_names[2] == ("p31", "p32")
    assert frame.v_names[1] == ("v21", "v22", "v23")
    big = model.CoordFrame.default(2, 11)
    assert big.p_names[0][10] == "p_1_11"


def test_zero_field_validates():
    s = model.load_system(SG_JSON)
    model.validate_field(model.zero_field(s.frame), s)


def test_field_with_unknown_name_rejected():
    s = model.load_system(SG_JSON)
    f = model.zero_field(s.frame)
    bad = model.KVectorField(
        config=((expr.parse("z"),),) + f.config[1:],
        fiber=f.fiber,
    )
    with pytest.raises(FreeVariableError):
        model.validate_field(bad, s)


def test_field_shape_rejected():
    s = model.load_system(SG_JSON)
    f = model.zero_field(s.frame)
    with pytest.raises(ShapeMismatchError):
        model.validate_field(model.KVectorField(config=f.config[:1], fiber=f.fiber), s)
    with pytest.raises(FormalismError):
        model.validate_field(model.zero_field(s.frame, cosymplectic=True), s)


def test_print_load_roundtrip():
    s = model.load_system(SG_JSON)
    s2 = model.load_system(model.print_system(s))
    rng = random.Random(99)
    for _ in range(20):
        env = {
            "q": rng.uniform(-2, 2),
            "v1": rng.uniform(-2, 2),
            "v2": rng.uniform(-2, 2),
            "a": 1.3,
            "Omega": 0.7,
        }
        a, b = s.expression.eval(env), s2.expression.eval(env)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
    assert s2.frame == s.frame
    assert s2.params == s.params
