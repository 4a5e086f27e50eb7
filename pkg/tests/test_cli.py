import json

import numpy as np
import pytest
import yaml

from nullframe import cli
from nullframe.verify import toy_document


def write(tmp_path, doc, name="m.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return str(p)


def test_sample_points_inside_domain():
    dom = np.array([[0.0, 1.0], [-2.0, 2.0]])
    pts = cli.sample_points(dom, 50, seed=3)
    assert pts.shape == (50, 2)
    lo = dom[:, 0] + 0.05 * (dom[:, 1] - dom[:, 0])
    hi = dom[:, 1] - 0.05 * (dom[:, 1] - dom[:, 0])
    assert np.all(pts >= lo) and np.all(pts <= hi)
    np.testing.assert_array_equal(pts, cli.sample_points(dom, 50, seed=3))


def test_example_subcommand(capsys):
    assert cli.main(["example", "minimal11"]) == 0
    doc = yaml.safe_load(capsys.readouterr().out)
    assert doc["ambient"]["dim"] == 11


def test_check_bronze16_passes(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = cli.main(["check", "bronze16", "--points", "2", "--lm-draws", "1", "--json", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["schema_version"] == "1"
    assert rep["result"]["exit_code"] == 0
    assert all(c["match"] for c in rep["claims"])
    assert any("{z4,z8}" in d for d in rep["discrepancies"])
    assert "PASS" in capsys.readouterr().out.upper()


def test_check_minimal11_reports_claim_mismatch(tmp_path):
    """The manifest carries the printed claims (minimal, mu of dimension 2); the
    engine finds a nonzero inverse-Gram trace and a 3-dimensional mu."""
    out = tmp_path / "r.json"
    code = cli.main(["check", "minimal11", "--points", "2", "--lm-draws", "1", "--json", str(out)])
    rep = json.loads(out.read_text())
    assert code == 2
    assert sorted(rep["result"]["failed_claims"]) == ["minimal", "mu_dim"]
    assert rep["result"]["failed_identities"] == []


def test_identities_subcommand_skips_claims(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["identities", "minimal11", "--points", "1", "--lm-draws", "0", "--json", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["claims"] == []


def test_broken_manifest_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("name: x\nambient: {dim: 3\n")
    assert cli.main(["check", str(p)]) == 1
    doc = toy_document("plane")
    doc["embedding"] = ["0", "t1 +", "t2", "0"]
    assert cli.main(["check", write(tmp_path, doc)]) == 1
    assert cli.main(["check", str(tmp_path / "missing.yaml")]) == 1
    assert cli.main(["check", "bronze16", "--points", "0"]) == 1


def test_signature_exit_3(tmp_path, capsys):
    doc = toy_document("null_curve")
    del doc["ambient"]["timelike_positions"]
    doc["claimed"]["rad_indices"] = [1]
    # (t, t, 0) is null for either timelike position: ambiguous
    ambiguous = write(tmp_path, doc, "a.yaml")
    assert cli.main(["check", ambiguous]) == 3
    assert "candidate" in capsys.readouterr().err
    assert cli.main(["infer-signature", ambiguous]) == 0
    assert capsys.readouterr().out.count("kernel dimension 1") == 2
    # (t, 2t, 0) cannot be null with one timelike coordinate
    doc["embedding"] = ["t1", "2*t1", "0"]
    none = write(tmp_path, doc, "n.yaml")
    assert cli.main(["infer-signature", none]) == 3
    assert cli.main(["check", none]) == 3


def test_infer_signature_examples(capsys):
    assert cli.main(["infer-signature", "bronze16"]) == 0
    assert capsys.readouterr().out.strip().splitlines() == ["{z4,z8}  kernel dimension 2"]


@pytest.mark.parametrize("threads", ["1", "3"])
def test_json_is_byte_identical(tmp_path, monkeypatch, threads):
    paths = []
    for k, env in enumerate(("1", threads)):
        monkeypatch.setenv("NULLFRAME_THREADS", env)
        p = tmp_path / f"{k}.json"
        cli.main(["check", "minimal11", "--points", "3", "--lm-draws", "1", "--seed", "7", "--json", str(p)])
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]
