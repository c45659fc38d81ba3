import json
import subprocess
import sys

import pytest

from rwre_duality.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

HALF = '{"kind": "constant", "params": {"p": 0.5}}'
FAST = ["--instances", "2", "--samples", "200", "--depth", "6"]


def write_config(tmp_path, **data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_verify_constant_half_passes(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["verify", "--model", HALF, "--out", str(out)]) == EXIT_OK
    rows = out.read_text().splitlines()
    assert rows[0].startswith("identity,mode,residual")
    assert all(",pass," in r for r in rows[1:])
    names = {r.split(",")[0] for r in rows[1:]}
    # every check family runs, including on the mixture law
    for name in ("fexact", "F_invariance", "D_eq_CA", "A_markov", "xexact", "derriennic_product",
                 "transcription", "reverse_transcription", "h_identity", "y_identity",
                 "birkhoff_cgzext[mixture]", "average_d[n=20][mixture]", "hitting_probability_u1"):
        assert name in names


def test_verify_zero_tolerance_fails(tmp_path, capsys):
    code = main(["verify", "--tol", "0", *FAST, "--out", str(tmp_path / "v.csv")])
    assert code == EXIT_FAIL
    assert "FAIL" in capsys.readouterr().err


def test_malformed_config_exits_2(tmp_path, capsys):
    assert main(["verify", "--config", write_config(tmp_path, u=1.5)]) == EXIT_USAGE
    assert "[u]" in capsys.readouterr().err
    assert main(["gf", "--config", write_config(tmp_path, bogus=1)]) == EXIT_USAGE
    assert "bogus" in capsys.readouterr().err
    assert main(["gf", "--config", write_config(tmp_path, depth="ten")]) == EXIT_USAGE
    assert main(["gf", "--model", "{not json"]) == EXIT_USAGE
    bad_support = '{"kind": "iid", "params": {"dist": {"kind": "uniform", "a": 0.5, "b": 1.5}}}'
    assert main(["gf", "--model", bad_support]) == EXIT_USAGE
    assert "(0, 1)" in capsys.readouterr().err
    assert main(["gf", "--lo", "3", "--hi", "1"]) == EXIT_USAGE
    assert main(["nope"]) == EXIT_USAGE


def test_config_file_and_flag_override(tmp_path):
    cfg = write_config(tmp_path, depth=3, u=0.25, lo=-1, hi=1, seed=4)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["gf", "--config", cfg, "--out", str(a)]) == EXIT_OK
    assert main(["gf", "--config", cfg, "--depth", "2", "--out", str(b)]) == EXIT_OK
    assert len(a.read_text().splitlines()) == 1 + 3 * 4
    assert len(b.read_text().splitlines()) == 1 + 3 * 3
    assert a.read_text().splitlines()[1].endswith(",0.25")


@pytest.mark.parametrize("argv", [
    ["gen-env", "--lo", "-3", "--hi", "3"],
    ["gf", "--lo", "0", "--hi", "2", "--depth", "4"],
    ["cf", "--direction", "forward", "--depth", "5"],
    ["estimate", "--depth", "3", "--samples", "500"],
    ["estimate", "--which", "d", "--depth", "3", "--samples", "500"],
    ["mc", "--depth", "2", "--paths", "2000"],
    ["verify", *FAST],
])
def test_commands_rerun_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*argv, "--seed", "9", "--out", str(a)]) == EXIT_OK
    assert main([*argv, "--seed", "9", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert "created" in meta["metadata"] and meta["provenance"]["config"]["seed"] == 9


def test_json_format(tmp_path):
    out = tmp_path / "r.json"
    assert main(["mc", "--depth", "1", "--paths", "1000", "--format", "json", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"provenance", "metadata", "result"}
    assert payload["result"]["num_paths"] == 1000 and "exact" in payload["result"]


def test_gf_from_env_file(tmp_path, capsys):
    assert main(["gen-env", "--lo", "-2", "--hi", "2", "--model", HALF]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == "site,p"
    path = tmp_path / "env.csv"
    path.write_text(text)
    assert main(["gf", "--env-file", str(path), "--depth", "1", "--u", "0.5"]) == 0
    assert "0,1,0.26666666666666666,0.26666666666666666,0.5" in capsys.readouterr().out
    assert main(["gf", "--env-file", str(path), "--depth", "3"]) == EXIT_USAGE
    assert "insufficient" in capsys.readouterr().err.lower()


def test_seed_environment_fallback(monkeypatch, capsys):
    main(["gen-env", "--lo", "0", "--hi", "4", "--seed", "5"])
    explicit = capsys.readouterr().out
    monkeypatch.setenv("RWRE_SEED", "5")
    main(["gen-env", "--lo", "0", "--hi", "4"])
    assert capsys.readouterr().out == explicit
    main(["gen-env", "--lo", "0", "--hi", "4", "--seed", "6"])
    assert capsys.readouterr().out != explicit
    monkeypatch.setenv("RWRE_SEED", "x")
    assert main(["gen-env"]) == EXIT_USAGE


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "rwre_duality.cli", "cf", "--depth", "2",
                        "--c-model", '{"kind": "constant", "params": {"c": 1.0}}'],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[1:] == ["0,1.0,1.0", "1,1.0,2.0", "2,1.0,1.5"]
