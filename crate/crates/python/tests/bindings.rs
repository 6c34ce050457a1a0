use pyo3::ffi::c_str;
use ::idos::idos;
use pyo3::prelude::*;

#[test]
fn module_round_trip_from_python() {
    pyo3::append_to_inittab!(idos);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import idos
spec = idos.GeneratorSpec.construct("a", 4, 2, 1, 2)
assert spec.degree == 37
assert spec.matrix(1) == [[6, 3], [4, 2], [2, 1], [0, 0]]
r = idos.verify_idos(spec, mode="invertibility")
assert r["verdict"] == "FAIL" and len(r["failures"]) == 1
assert r["failures"][0]["pattern"]["received_sets"] == [[1], [4], [1, 2, 3, 4]]
b = idos.GeneratorSpec.construct("b", 2, 1, 1, 1)
assert idos.verify_idos(b)["verdict"] == "PASS"
assert idos.classify(4, 2, 1, 2, [1, 1, 1, 1]) == {"class": "violation", "kind": "delay_exceeded", "slot": 3}
f = idos.Field(8)
assert f.lift_det([[0, None], [None, 0]]) == "0x01"
try:
    idos.GeneratorSpec.construct("a", 2, 4, 1, 1)
    raise AssertionError("expected ValueError")
except ValueError:
    pass
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
