import json
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from xmodkit import cli, corpus
from xmodkit import documents as dm
from xmodkit.errors import SchemaError, UnknownReference

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "corpus_seed0.json")
DOCS = corpus.corpus_documents(0)


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    path = tmp_path_factory.mktemp("ws")
    code, _ = cli.run(["corpus", "--workspace", str(path), "--seed", "0"])
    assert code == 0
    return str(path)


def run(*argv):
    return cli.run(list(argv))


def report(*argv):
    code, out = run(*argv, "--emit", "json")
    return code, json.loads(out) if code != 2 else out


# --- corpus --------------------------------------------------------------------------------

def test_corpus_hash_golden():
    with open(GOLDEN) as fh:
        want = json.load(fh)["content_hash"]
    assert corpus.content_hash(DOCS) == want


def test_corpus_is_deterministic():
    assert corpus.corpus_documents(3) == corpus.corpus_documents(3)
    assert corpus.corpus_hash(0) != corpus.corpus_hash(1)


def test_max_size_shrinks_corpus():
    small = corpus.corpus_documents(0, max_size=4)
    assert 0 < len(small) < len(DOCS)


def test_saved_workspace_round_trips(ws):
    loaded = dm.Workspace.load(ws)
    docs = DOCS
    assert loaded.docs == docs
    with open(os.path.join(ws, "MANIFEST")) as fh:
        assert json.load(fh)["content_hash"] == corpus.content_hash(docs)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(DOCS)))
def test_every_document_parses_and_reencodes(name):
    docs = DOCS
    w = dm.Workspace()
    for d in docs.values():
        w.add(d)
    w.get(name)
    d = docs[name]
    assert json.loads(dm.canonical(d)) == d


# --- verbs and exit codes --------------------------------------------------------------------

def test_obstruction_zero_and_nonzero(ws):
    code, rep = report("obstruction", "inst_lift00_D4_center_triangle", "--workspace", ws)
    assert code == 0 and rep["verdict"] == "class = 0"
    code, rep = report("xmod", "obstruction", "inst_lift_rp2_Z4_Z2", "--workspace", ws)
    assert code == 1 and rep["verdict"] == "class ≠ 0"
    code, rep = report("pbg", "obstruction", "pbgx_rp2_Z4_Z2", "--workspace", ws)
    assert code == 1


def test_conventions_agree_on_verdict(ws):
    for conv in ("paper", "standard"):
        code, rep = report("obstruction", "inst_lift_rp2_Z4_Z2", "--workspace", ws, "--convention", conv)
        assert code == 1 and rep["details"]["convention"] == conv


def test_output_is_byte_identical(ws):
    a = run("pbg", "extend", "pbgx_pbg01_V4_Z2_Z2_circle4", "--workspace", ws, "--emit", "json")
    b = run("pbg", "extend", "pbgx_pbg01_V4_Z2_Z2_circle4", "--workspace", ws, "--emit", "json")
    assert a == b and a[0] == 0


@pytest.mark.parametrize("argv", [
    ("validate", "pbgx_pbg00_Z8_Z2_1_triangle"),
    ("validate", "extension_ext5_S3"),
    ("glue", "data_pbg01_V4_Z2_Z2_circle4"),
    ("extract", "data_pbg01_V4_Z2_Z2_circle4"),
    ("equivalent", "data_pbg01_V4_Z2_Z2_circle4", "data_pbg01_V4_Z2_Z2_circle4"),
    ("extend", "inst_lift00_D4_center_triangle"),
    ("from-extension", "extension_ext2_D4"),
    ("cohomology", "nerve_tetrahedron_4c4p", "group_Z2"),
])
def test_verbs_pass(ws, argv):
    code, rep = report(*argv, "--workspace", ws)
    assert code == 0 and rep["ok"], rep


def test_cohomology_orders(ws):
    _, rep = report("cohomology", "nerve_tetrahedron_4c4p", "group_Z2", "--workspace", ws)
    assert rep["details"]["orders"] == [2, 1, 2]
    _, rep = report("cohomology", "nerve_triangle_3c4p", "group_Z2", "--workspace", ws)
    assert rep["details"]["orders"] == [2, 1, 1]


def test_act_with_cochain(tmp_path, ws):
    for fn in os.listdir(ws):
        if fn.endswith(".json"):
            (tmp_path / fn).write_text(open(os.path.join(ws, fn)).read())
    (tmp_path / "twist.json").write_text(json.dumps({
        "kind": "cochain", "name": "twist", "nerve": "nerve_triangle_3c4p", "group": "group_D4",
        "degree": 1, "elements": ["r0", "r2"], "values": {"1-2": "r2", "2-3": "r2", "1-3": "r0"}}))
    code, rep = report("act", "inst_lift00_D4_center_triangle", "twist", "--workspace", str(tmp_path))
    assert code == 0 and rep["verdict"] == "equivalent"


def test_lie_verbs():
    code, rep = report("lie-cohomology", "sl2")
    assert code == 0 and rep["details"]["dims"] == [1, 0, 0, 1]
    code, rep = report("lie-cohomology", "abelian2")
    assert rep["details"]["dims"] == [1, 2, 1]
    code, rep = report("lie-check", "--count", "8")
    assert code == 0


def test_unknown_reference_exits_2(ws):
    code, msg = run("validate", "no_such_document", "--workspace", ws)
    assert code == 2 and "UnknownReference" in msg


def test_dangling_reference_reports_location(tmp_path):
    (tmp_path / "x.json").write_text(json.dumps(
        {"kind": "group-xmod", "name": "x", "h": "missing", "d": "missing", "boundary": {}, "action": {}}))
    code, msg = run("validate", "x", "--workspace", str(tmp_path))
    assert code == 2 and "x.json" in msg and "missing" in msg


def test_malformed_json_reports_line(tmp_path):
    (tmp_path / "bad.json").write_text('{"kind": "group",\n "name": }')
    code, msg = run("validate", "bad", "--workspace", str(tmp_path))
    assert code == 2 and "bad.json:2" in msg


def test_schema_errors():
    w = dm.Workspace()
    with pytest.raises(SchemaError):
        w.add({"kind": "group", "name": "g", "bogus": 1})
    with pytest.raises(SchemaError):
        w.add({"kind": "wombat", "name": "w"})
    w.add({"kind": "group", "name": "g", "standard": "Z2"})
    with pytest.raises(SchemaError):
        w.add({"kind": "group", "name": "g", "standard": "Z3"})
    with pytest.raises(UnknownReference):
        w.get("h")


def test_unknown_verb_and_missing_workspace():
    assert run("frobnicate")[0] == 2
    assert run("glue", "x")[0] == 2
    assert run("pbg", "validate", "x")[0] == 2


def test_console_entry_point(ws):
    out = subprocess.run([sys.executable, "-m", "xmodkit.cli", "obstruction", "inst_lift_rp2_Z4_Z2",
                          "--workspace", ws], capture_output=True, text=True)
    assert out.returncode == 1 and "class ≠ 0" in out.stdout
