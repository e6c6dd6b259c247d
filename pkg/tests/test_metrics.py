import numpy as np
import pytest

from wenods.errors import SchemaError, ShapeMismatch
from wenods.euler import GasModel, conserved_to_primitive
from wenods.metrics import (compare_table, euler_l1, format_table, l1_error, mse_loss,
                            pointwise_error, read_field, rescale_validation,
                            table_document, write_csv_field, write_field, write_json,
                            read_json)
from wenods.riemann import builtin_ic, RiemannSpec
from wenods.solver import SchemeConfig, restrict, run


def test_l1_identical_fields():
    a = np.arange(12.0).reshape(3, 4)
    assert l1_error(a, a) == 0.0


def test_l1_constant_offset():
    a = np.full((5, 5), 2.5)
    assert l1_error(a, np.zeros((5, 5))) == 2.5


def test_l1_hand_value():
    assert l1_error(np.array([[1.0, 2.0], [3.0, 4.0]]), np.zeros((2, 2))) == 2.5


def test_mse_hand_values():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert mse_loss(a, a) == 0.0
    assert mse_loss(np.full((3, 3), 2.0), np.zeros((3, 3))) == 4.0
    assert mse_loss(a, np.zeros((2, 2))) == 7.5


def test_metrics_are_symmetric_and_shape_checked(rng):
    a = rng.standard_normal((4, 6))
    b = rng.standard_normal((4, 6))
    assert l1_error(a, b) == l1_error(b, a)
    assert mse_loss(a, b) == mse_loss(b, a)
    with pytest.raises(ShapeMismatch):
        l1_error(a, b.T)


def test_euler_l1_recomposition(rng):
    a = rng.standard_normal((8, 8, 4))
    b = rng.standard_normal((8, 8, 4))
    expected = sum(l1_error(a[..., i], b[..., i]) for i in range(4))
    assert euler_l1(a, b) == pytest.approx(expected, rel=1e-15)
    offset = b.copy()
    offset[..., 0] += 0.7
    assert euler_l1(offset, b) == pytest.approx(0.7, rel=1e-12)


def test_rescale_validation():
    assert np.allclose(rescale_validation([2.0, 4.0, 1.0]), [0.5, 1.0, 0.25], atol=0)
    assert np.allclose(rescale_validation([3.0, 3.0, 3.0]), 1.0, atol=0)
    dec = rescale_validation([5.0, 4.0, 1.0])
    assert dec[0] == 1.0
    two = rescale_validation([[2.0, 4.0], [10.0, 5.0]])
    assert np.allclose(two, [[0.5, 1.0], [1.0, 0.5]], atol=0)


def test_f64grid_single_value_layout(tmp_path):
    path = tmp_path / "one.f64grid"
    write_field(path, np.array([[1.0]]))
    raw = path.read_bytes()
    assert len(raw) == 40
    assert raw[:4] == b"WDSF"
    assert raw[32:] == bytes.fromhex("000000000000F03F")   # 1.0, little endian


def test_f64grid_round_trip(tmp_path, rng):
    path = tmp_path / "field.f64grid"
    field = rng.standard_normal((4, 7, 5))
    write_field(path, field)
    again = read_field(path)
    assert again.shape == (4, 7, 5)
    assert (again == field).all()


def test_f64grid_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.f64grid"
    path.write_bytes(b"nope" + bytes(36))
    with pytest.raises(SchemaError):
        read_field(path)


def test_csv_export_line_count(tmp_path):
    path = tmp_path / "field.csv"
    write_csv_field(path, np.arange(4.0).reshape(2, 2))
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 5
    assert lines[0] == "x,y,value"


def test_json_round_trip(tmp_path):
    path = tmp_path / "doc.json"
    doc = {"b": [1, 2.5], "a": "x"}
    write_json(path, doc)
    assert read_json(path) == doc


def test_pointwise_error(rng):
    a = rng.standard_normal((5, 5))
    assert (pointwise_error(a, a) == 0).all()
    assert pointwise_error(a, a - 1.0) == pytest.approx(np.ones((5, 5)))


def _tiny_spec():
    base = builtin_ic("config3")
    return RiemannSpec(states=base.states, gamma=base.gamma, t_final=0.02,
                       config_tag=3)


def test_compare_table_self_ratio_is_one():
    spec = _tiny_spec()
    cfg = SchemeConfig(scheme="z")
    fine = run(spec, 40, 40, cfg)
    prim = conserved_to_primitive(fine.grid.interior, GasModel(spec.gamma))
    table = compare_table(spec, [20], cfg, SchemeConfig(scheme="z"), prim)
    row = table["rows"][0]
    for name in ("rho", "u", "v", "p", "combined"):
        assert row["ratio"][name] == 1.0
    assert row["baseline"]["errors"]["rho"]["l1"] > 0.0
    text = format_table(table)
    assert "20x20" in text and "rho" in text
    doc = table_document(table)
    assert "_fields" not in doc["rows"][0]


def test_compare_table_is_deterministic():
    spec = _tiny_spec()
    cfg = SchemeConfig(scheme="z")
    fine = run(spec, 40, 40, cfg)
    prim = conserved_to_primitive(fine.grid.interior, GasModel(spec.gamma))
    t1 = compare_table(spec, [20], cfg, SchemeConfig(scheme="js"), prim)
    t2 = compare_table(spec, [20], cfg, SchemeConfig(scheme="js"), prim)
    for name in ("rho", "u", "v", "p"):
        assert (t1["rows"][0]["candidate"]["errors"][name]["l1"]
                == t2["rows"][0]["candidate"]["errors"][name]["l1"])
