import json

import numpy as np
import pytest

from conftest import A1, E1
from descred import io
from descred.errors import ParseError, SchemaError
from descred.model import DescriptorSystem, analyze, shift
from descred.oracle import random_regular_system
from descred.qw import qw_decompose
from descred.reduction import reduce_via_corange, reduce_via_range, to_standard
from descred.switching import SwitchedDescriptorSystem, reduce_switching


def write(tmp_path, doc, name="sys.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_minimal_file(tmp_path):
    doc = {"schema_version": "1", "n": 2, "m": 0, "E": [[1, 0], [0, 0]], "A": [[0, 1], [1, 0]]}
    sys = io.parse_system_file(write(tmp_path, doc))
    assert isinstance(sys, DescriptorSystem)
    assert sys.n == 2 and sys.B is None


def test_worked_example_file(tmp_path):
    doc = {"schema_version": "1", "n": 3, "m": 0, "E": E1.tolist(), "A": A1.tolist()}
    assert analyze(io.parse_system_file(write(tmp_path, doc))).k_star == 2


def test_complex_entries(tmp_path):
    doc = {"schema_version": "1", "n": 1, "m": 0, "E": [[[0, 1]]], "A": [[1]]}
    assert io.parse_system_file(write(tmp_path, doc)).E[0, 0] == 1j


def test_switched_file(tmp_path):
    doc = {"schema_version": "1", "n": 3, "modes": [{"E": E1.tolist(), "A": A1.tolist()},
                                                    {"E": E1.tolist(), "A": (2 * A1).tolist()}]}
    sws = io.parse_system_file(write(tmp_path, doc))
    assert isinstance(sws, SwitchedDescriptorSystem) and len(sws.modes) == 2


def test_malformed_json_has_line_info(tmp_path):
    with pytest.raises(ParseError, match=r"sys.json:3:"):
        io.parse_system_file(write(tmp_path, '{\n "n": 2,\n }'))
    with pytest.raises(ParseError):
        io.parse_system_file(str(tmp_path / "missing.json"))


@pytest.mark.parametrize(
    "doc",
    [
        {"schema_version": "2", "n": 1, "E": [[1]], "A": [[1]]},
        {"schema_version": "1", "n": 2, "E": [[1]], "A": [[1]]},
        {"schema_version": "1", "n": 1, "E": [[1]]},
        {"schema_version": "1", "n": 1, "E": [[1]], "A": [[1]], "modes": [{"E": [[1]], "A": [[1]]}]},
        {"schema_version": "1", "n": 1, "m": 1, "E": [[1]], "A": [[1]]},
        {"schema_version": "1", "n": 1, "m": 2, "E": [[1]], "A": [[1]], "B": [[1]]},
        {"schema_version": "1", "n": 2, "E": [[1, 0], [0]], "A": [[1, 0], [0, 1]]},
        {"schema_version": "1", "n": 1, "E": [["x"]], "A": [[1]]},
        {"schema_version": "1", "n": 1, "E": [[True]], "A": [[1]]},
        {"schema_version": "1", "n": 0, "E": [], "A": []},
        {"schema_version": "1", "n": 1, "modes": []},
        {"schema_version": "1", "n": 1, "modes": [{"E": [[1]]}]},
        [],
    ],
)
def test_schema_errors(tmp_path, doc):
    with pytest.raises(SchemaError):
        io.parse_system_file(write(tmp_path, doc))


def test_system_dict_round_trip(rng):
    sys, _ = random_regular_system(rng, 4, 2, m=1, complex_=True)
    again = io.system_from_dict(json.loads(json.dumps(io.system_to_dict(sys))))
    assert np.array_equal(again.E, sys.E) and np.array_equal(again.B, sys.B)


def same(a, b):
    for name, v in vars(a).items():
        w = getattr(b, name)
        if isinstance(v, np.ndarray):
            assert v.shape == w.shape and np.array_equal(v, w), name
        elif isinstance(v, list):
            assert len(v) == len(w)
            for p, q in zip(v, w):
                assert np.array_equal(p, q)
        else:
            assert v == w, name


def test_reduction_round_trip_bit_exact(rng, ex1):
    sys, _ = random_regular_system(rng, 6, 2, m=2, complex_=True)
    sh = shift(sys, complex(0.1, -0.3))
    objects = [
        reduce_via_range(sh, 1),
        reduce_via_corange(sh, 2),
        to_standard(sh, "corange"),
        qw_decompose(sys),
        reduce_switching(SwitchedDescriptorSystem([ex1, DescriptorSystem(E1, 2 * A1)]), [2, 2]),
    ]
    for obj in objects:
        text = io.dumps(io.reduction_to_dict(obj, {"tool_version": io.TOOL_VERSION}))
        again = io.reduction_from_dict(json.loads(text))
        assert type(again) is type(obj)
        same(obj, again)


def test_index_report_round_trip(ex1):
    rep = analyze(ex1)
    again = io.index_report_from_dict(json.loads(io.dumps(io.index_report_to_dict(rep))))
    assert again == rep
    assert again.cond_estimate == rep.cond_estimate


def test_scalar_encoding_special_values():
    for z in (0.0, -0.0, 1e-310, complex(1 / 3, -2.5e300)):
        assert io.decode_scalar(io.encode_scalar(z)) == z
    with pytest.raises(SchemaError):
        io.decode_scalar({"hex": ["zz", "0x0p+0"]})


def test_bad_reduction_documents():
    with pytest.raises(SchemaError):
        io.reduction_from_dict({"kind": "other", "lambda": io.encode_scalar(0), "matrices": {}})
    with pytest.raises(SchemaError):
        io.reduction_from_dict({"kind": "reduced", "lambda": io.encode_scalar(0), "matrices": {}})
    with pytest.raises(SchemaError):
        io.decode_matrix({"rows": 2, "cols": 2, "hex": [["0x1p+0", "0x0p+0"]]})


def test_dumps_deterministic(ex1):
    doc = io.reduction_to_dict(to_standard(shift(ex1, 0)))
    assert io.dumps(doc) == io.dumps(json.loads(io.dumps(doc)))
    assert io.dumps(doc).endswith("\n")
