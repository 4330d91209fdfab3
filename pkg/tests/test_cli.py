import json

import pytest

from emc4 import certio
from emc4.cli import main
from emc4.pipeline import ConfigError, RunConfig, manifest_digest, parse_branch, run_all
from emc4.topstar import TopstarBranch

QUICK = ["pair-ferrers", "triple-ferrers", "board11", "topstar"]


@pytest.fixture(scope="module")
def full_tree(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = main(["run-all", "--out", str(out), "--topstar-branches", "c0"])
    return out, code


def test_parse_branch():
    assert parse_branch("c=5") == TopstarBranch(5)
    assert parse_branch("c23_l4") == TopstarBranch(23, 4)
    assert parse_branch("23:4") == TopstarBranch(23, 4)
    with pytest.raises(ConfigError):
        parse_branch("c23")
    with pytest.raises(ConfigError):
        parse_branch("banana")


def test_full_run_succeeds(full_tree):
    out, code = full_tree
    assert code == 0
    summary = certio.read_tagged(out / "reports" / "run-all.json", "report")
    assert summary["status"] == "ok"
    assert set(summary["checks"]) == {
        "pair-ferrers", "triple-ferrers", "topstar", "notopstar", "board15", "board11", "threshold",
    }
    assert certio.verify_manifest(out) == (True, [])
    assert (out / "topstar" / "c0.json").exists()


def test_fast_run_verifies_stored_artifacts(full_tree, capsys):
    out, _ = full_tree
    assert main(["run-all", "--fast", "--out", str(out), "--topstar-branches", "c0", "--json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert {r["check"] for r in body} >= {"manifest", "topstar", "board15"}


def test_run_all_is_deterministic(tmp_path):
    digests = []
    for name in ("a", "b"):
        cfg = RunConfig(tmp_path / name, True, 1, [TopstarBranch(0)])
        reports = run_all(cfg, QUICK)
        assert all(r.ok for r in reports)
        digests.append(manifest_digest(cfg.out))
    assert digests[0] == digests[1]
    assert (tmp_path / "a" / certio.MANIFEST).read_bytes() == (tmp_path / "b" / certio.MANIFEST).read_bytes()


def test_tampered_tree_fails_fast_mode(tmp_path):
    out = tmp_path / "t"
    assert main(["run-all", "--out", str(out), "--topstar-branches", "c0"]) == 0
    cert = out / "board11" / "dual.json"
    body = certio.read_json(cert)
    body["denominator"] += 1
    certio.write_json(cert, body)
    assert main(["run-all", "--fast", "--out", str(out), "--topstar-branches", "c0"]) == 1
    assert main(["manifest", "verify", "--out", str(out)]) == 1
    assert main(["board11", "--verify-cert", str(cert), "--out", str(out)]) == 1


def test_single_commands_and_cert_io(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["topstar", "--branch", "c=0", "--out", str(out), "--emit-cert", str(tmp_path / "c0.json")]) == 0
    assert main(["topstar", "--branch", "c=0", "--verify-cert", str(tmp_path / "c0.json")]) == 0
    assert main(["pair-ferrers", "--out", str(out)]) == 0
    assert main(["manifest", "emit", "--out", str(out)]) == 0
    assert main(["manifest", "verify", "--out", str(out)]) == 0


def test_config_errors(tmp_path):
    assert main(["run-all", "--fast", "--out", str(tmp_path / "nothing")]) == 2
    assert main(["threshold", "--workers", "0", "--out", str(tmp_path)]) == 2
    assert main(["topstar", "--branch", "c=0", "--verify-cert", str(tmp_path / "absent.json")]) == 2
    assert main(["manifest", "emit", "--out", str(tmp_path / "nope")]) == 2
    assert main(["run-all", "--out", str(tmp_path), "--topstar-branches", "c99"]) == 2
    with pytest.raises(SystemExit):
        main(["no-such-command"])


def test_malformed_certificate_rejected(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "farkas", "denominator": 1.5}')
    assert main(["topstar", "--branch", "c=0", "--verify-cert", str(p)]) == 1
