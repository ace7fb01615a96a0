"""Command-line interface: document round-trips, exit codes, determinism."""

import json

import numpy as np
import pytest

from sqzlift.algebra import AlgMatrix, mk_algebra
from sqzlift.cli import (
    canonical_json,
    complex_from_payload,
    load_doc,
    main,
    problem_from_doc,
    problem_to_doc,
    save_doc,
    tower_from_payload,
    tower_to_payload,
    unwrap,
    wrap,
)
from sqzlift.complexes import GradedMap, GradedObject, zero_map
from sqzlift.errors import NotADifferential
from sqzlift.finring import mk_tower
from sqzlift.obstruction import DifferentialProblem

OB3 = GradedObject.of({0: 1, 1: 1, 2: 1})
Z4_DESC = ("zmod", 2, (("a", 2), ("b", 1)))
EPS_DESC = ("trunc_poly", 2, (("a", 2), ("b", 1)))


def _z4_doc(z4):
    prob = DifferentialProblem(z4, OB3, zero_map(z4.mid, OB3, OB3, 1))
    return problem_to_doc("differential", z4, Z4_DESC, prob)


def _mf_doc():
    """The obstructed rank-2 algebra instance (x^2 = eps, d = (x, x))."""
    tower = mk_tower("trunc_poly", 2, a=2, b=1)
    R = tower.Rbar
    struct = np.zeros((2, 2, 2, 2), dtype=np.int64)
    struct[0, 0, 0] = R.one_vec()
    struct[0, 1, 1] = R.one_vec()
    struct[1, 0, 1] = R.one_vec()
    struct[1, 1, 0] = np.array([0, 1])
    unit = np.zeros((2, 2), dtype=np.int64)
    unit[0] = R.one_vec()
    defalg = mk_algebra(tower, "custom", struct=struct, unit=unit)
    x = np.zeros((1, 1, 2, 1), dtype=np.int64)
    x[0, 0, 1, 0] = 1
    d = GradedMap(defalg.mid, OB3, OB3, 1,
                  {0: AlgMatrix(defalg.mid, x), 1: AlgMatrix(defalg.mid, x.copy())})
    prob = DifferentialProblem(defalg, OB3, d)
    return problem_to_doc("differential", defalg, EPS_DESC, prob,
                          algebra_kind="custom")


def _write(tmp_path, name, doc):
    path = tmp_path / name
    save_doc(str(path), doc)
    return str(path)


# -- document round-trips ---------------------------------------------------

def test_saved_documents_round_trip_byte_identically(tmp_path, z4):
    path = _write(tmp_path, "p.json", _z4_doc(z4))
    raw = open(path).read()
    assert canonical_json(load_doc(path)) == raw
    # and the parsed problem re-serializes to the same document
    kind, defalg, prob, _ = problem_from_doc(load_doc(path))
    again = problem_to_doc(kind, defalg, Z4_DESC, prob)
    assert canonical_json(again) == raw


def test_tower_payload_round_trip():
    tower = mk_tower("zmod", 2, a=2, b=1)
    pay = tower_to_payload(tower)   # custom encoding with explicit rings
    back = tower_from_payload(pay)
    assert back.Rbar == tower.Rbar and back.R == tower.R
    assert np.array_equal(back.pibar.images, tower.pibar.images)


def test_unwrap_rejects_wrong_schema():
    from sqzlift.errors import SchemaMismatch
    with pytest.raises(SchemaMismatch):
        unwrap(wrap("tower", {}), "complex")
    with pytest.raises(SchemaMismatch):
        unwrap({"schema": "tower", "version": 99, "payload": {}}, "tower")


# -- schema semantics -------------------------------------------------------

def _bad_square_payload():
    return {"level": "mid", "ranks": {"0": 1, "1": 1, "2": 1},
            "d": {"0": [[[[1]]]], "1": [[[[1]]]]}}


def test_complex_schema_enforces_square_zero(z4):
    with pytest.raises(NotADifferential):
        complex_from_payload(z4, _bad_square_payload(), strict=True)
    # the lax loader accepts the same payload as a pre-complex
    X = complex_from_payload(z4, _bad_square_payload(), strict=False)
    assert X.ob == OB3


def test_problem_bundle_defers_validation_to_construction(z4):
    # the codec parses the bundle; the square-zero check happens when the
    # problem object is built, not at the schema layer
    doc = wrap("problem", {
        "kind": "differential",
        "tower": tower_to_payload(z4.tower, Z4_DESC),
        "algebra": {"kind": "trivial"},
        "complex": _bad_square_payload()})
    with pytest.raises(NotADifferential):
        problem_from_doc(doc)


def test_bare_complex_doc_with_bad_square_exits_1(tmp_path, z4, capsys):
    tower_doc = _write(tmp_path, "t.json",
                       wrap("tower", tower_to_payload(z4.tower, Z4_DESC)))
    cx_doc = _write(tmp_path, "c.json", wrap("complex", _bad_square_payload()))
    code = main(["obstruct-diff", "--tower", tower_doc, "--complex", cx_doc])
    out = capsys.readouterr().out
    assert code == 1
    rep = json.loads(out)
    assert rep["verdict"] == "failed"
    assert rep["error"]["type"] == "NotADifferential"


# -- exit-code contract -----------------------------------------------------

def test_unobstructed_problem_exits_0(tmp_path, z4, capsys):
    path = _write(tmp_path, "p.json", _z4_doc(z4))
    code = main(["obstruct-diff", "--complex", path])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rep["verdict"] == "lifts"
    assert rep["obstruction"]["coords"] == [0] * len(rep["obstruction"]["coords"])


def test_obstructed_problem_exits_2(tmp_path, capsys):
    path = _write(tmp_path, "p.json", _mf_doc())
    code = main(["obstruct-diff", "--complex", path])
    rep = json.loads(capsys.readouterr().out)
    assert code == 2
    assert rep["verdict"] == "obstructed"
    assert rep["h2_dim"] == 1
    assert any(rep["obstruction"]["coords"])


def test_missing_file_exits_1_with_error_report(capsys):
    code = main(["lift-diff", "--complex", "/nonexistent/p.json"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 1
    assert rep["verdict"] == "failed"
    assert rep["error"]["type"] == "ParseError"
    assert rep["schema"] == "report" and rep["timings"] is None


def test_command_kind_mismatch_exits_1(tmp_path, z4, capsys):
    path = _write(tmp_path, "p.json", _z4_doc(z4))
    code = main(["lift-map", "--map", path])
    rep = json.loads(capsys.readouterr().out)
    assert code == 1
    assert rep["error"]["type"] == "SchemaMismatch"


# -- command outputs --------------------------------------------------------

def test_classify_reports_the_full_torsor(tmp_path, z4, capsys):
    path = _write(tmp_path, "p.json", _z4_doc(z4))
    code = main(["classify", "--complex", path])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rep["verdict"] == "classified"
    cl = rep["classification"]
    assert cl["h_dim"] == 2 and cl["count"] == 4
    assert len(cl["witnesses"]) == 4


def test_gen_then_oracle_self_consistency(tmp_path, capsys):
    for seed in (0, 1, 2):
        path = str(tmp_path / f"gen{seed}.json")
        assert main(["gen", "--kind", "differential",
                     "--seed", str(seed), "--out", path]) == 0
        capsys.readouterr()
        code = main(["oracle", "--complex", path])
        rep = json.loads(capsys.readouterr().out)
        assert code in (0, 2)
        assert rep["agrees_with_obstruction"] is True
        assert rep["verdict"] == ("verified" if code == 0 else "obstructed")


def test_gen_is_byte_deterministic(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    main(["gen", "--kind", "map", "--seed", "5", "--out", a])
    main(["gen", "--kind", "map", "--seed", "5", "--out", b])
    assert open(a).read() == open(b).read()


def test_reports_are_byte_identical_across_runs(tmp_path, z4):
    path = _write(tmp_path, "p.json", _z4_doc(z4))
    outs = []
    for i, workers in enumerate((1, 4, 1)):
        out = str(tmp_path / f"r{i}.json")
        assert main(["oracle", "--complex", path,
                     "--workers", str(workers), "--out", out]) == 0
        outs.append(open(out).read())
    assert outs[0] == outs[1] == outs[2]
    rep = json.loads(outs[0])
    assert rep["num_witnesses"] == 4 and rep["timings"] is None


def test_extend_order_rejects_wrong_tower(tmp_path, z4, capsys):
    path = _write(tmp_path, "p.json", _z4_doc(z4))
    code = main(["extend-order", "--complex", path])
    rep = json.loads(capsys.readouterr().out)
    assert code == 1
    assert rep["error"]["type"] == "ValidationError"


def test_functor_eval_on_truncated_polynomial_tower(tmp_path, capsys):
    eps = mk_algebra(mk_tower("trunc_poly", 2, a=2, b=1), "trivial")
    ob = GradedObject.of({0: 1, 1: 1})
    prob = DifferentialProblem(eps, ob, zero_map(eps.mid, ob, ob, 1))
    path = _write(tmp_path, "p.json",
                  problem_to_doc("differential", eps, EPS_DESC, prob))
    code = main(["functor-eval", "--complex", path])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rep["tangent_dim"] == 1
    assert rep["F"]["size"] == 2 ** rep["tangent_dim"]
    assert rep["F1"]["size"] == rep["F"]["size"]
