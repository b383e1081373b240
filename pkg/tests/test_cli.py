import json

import jsonschema
import pytest

from nonleaf.cli import main
from nonleaf.criteria import CONCLUSION
from nonleaf.manifest import ManifestError, _exact, bundled_manifests, load, load_schema, parse


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bundled_manifests_load():
    names = bundled_manifests()
    assert {"odd_prime_ray_d6", "odd_prime_ray_d5", "lens_tree", "cp2_sums", "constant_ray", "finite_tree"} <= set(names)
    for n in names:
        load(n)


def test_certify_theorem_c_on_odd_prime_ray(capsys, tmp_path):
    out = tmp_path / "cert.json"
    code, text, _ = run(capsys, "certify", "theorem-c", "odd_prime_ray_d6", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["certificate"]["conclusion"]["statement"] == CONCLUSION
    assert doc["certificate"]["conclusion"]["established"] is True
    assert CONCLUSION in text
    jsonschema.validate(doc, load_schema("certificate"))


def test_non_periodic_on_constant_ray(capsys):
    code, text, _ = run(capsys, "check", "non-periodic", "constant_ray", "--k", "2")
    assert code == 1
    assert "omega" in text


def test_invariants_on_finite_tree(capsys):
    code, text, _ = run(capsys, "invariants", "finite_tree", "--r", "2", "--depth", "10", "--json")
    assert code == 0
    doc = json.loads(text)
    head = dict(doc["invariants"]["head"])
    assert head == {"Z_3": 3, "Z_9": 1, "Z_5": 2}
    assert "omega" not in text


def test_invariants_pi1(capsys):
    code, text, _ = run(capsys, "invariants", "lens_tree", "--r", "1", "--json")
    doc = json.loads(text)
    assert code == 0 and doc["invariants"]["tail"]["sample"][:2] == [["Z_3", 1], ["Z_5", 2]]


def test_undecidable_exit_code(capsys, tmp_path):
    data = json.loads(json.dumps(load("odd_prime_ray_d6").data))
    data["catalog"]["family"]["guarantees"] = ["all_odd"]
    path = tmp_path / "m.json"
    path.write_text(json.dumps(data))
    code, _, _ = run(capsys, "check", "non-periodic", str(path), "--mode", "homology")
    assert code == 2


def test_catalog_validate_flags_indistinguishable_blocks(capsys):
    code, text, _ = run(capsys, "catalog", "validate", "cp2_sums", "--json")
    doc = json.loads(text)
    assert code == 0
    assert ["P#Pbar#Pbar", "Q#Pbar"] in doc["validation"]["model_indistinguishable"]


def test_oracle_run(capsys):
    code, text, _ = run(capsys, "oracle", "run", "finite_tree", "--seed", "4", "--instances", "5")
    assert code == 0
    assert text.splitlines()[0].endswith(": pass")


def test_depth_from_environment(capsys, monkeypatch, tmp_path):
    data = json.loads(json.dumps(load("odd_prime_ray_d6").data))
    del data["options"]["depth"]
    path = tmp_path / "m.json"
    path.write_text(json.dumps(data))
    monkeypatch.setenv("NONLEAF_DEPTH", "12")
    code, text, _ = run(capsys, "check", "non-repeating", str(path), "--json")
    assert code == 0 and json.loads(text)["verdict"]["assumptions"][0]["verified_depth"] == 12


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d["pattern"].update(colour="red"), "pattern.colour"),
        (lambda d: d["catalog"]["blocks"][1].update(p=4), "catalog.blocks[1]"),
        (lambda d: d["pattern"]["assignment"].__setitem__(2, "Nope"), "pattern.assignment[2]"),
        (lambda d: d["catalog"]["blocks"][0].update(preset="lenz"), "catalog.blocks[0].preset"),
        (lambda d: d["options"].update(depth=0), "options.depth"),
    ],
)
def test_malformed_manifests(capsys, tmp_path, mutate, field):
    data = json.loads(json.dumps(load("finite_tree").data))
    mutate(data)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data, indent=2))
    code, _, err = run(capsys, "catalog", "validate", str(path))
    assert code == 3
    assert f"field {field}" in err and "line " in err


def test_invalid_json_reports_line():
    with pytest.raises(ManifestError) as exc:
        parse('{"name": "x",\n "catalog": {}\n "pattern": {}}')
    assert exc.value.line == 3


def test_unknown_manifest(capsys):
    code, _, err = run(capsys, "certify", "theorem-a", "no_such_manifest")
    assert code == 3 and "no manifest" in err


def test_large_integers_are_strings():
    assert _exact({"a": [2**60, 5]}) == {"a": [str(2**60), 5]}


def test_timestamp_from_source_date_epoch(capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    _, text, _ = run(capsys, "check", "non-repeating", "finite_tree", "--json")
    assert json.loads(text)["timestamp"] == "1970-01-01T00:00:00Z"
