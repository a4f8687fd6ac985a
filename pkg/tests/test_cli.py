import json

import pytest

from acnbounds import cli
from acnbounds.atlas import GRID_HEADER


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bound_sync(capsys):
    code, out, err = _run(capsys, "bound", "--kind", "trilemma-sync",
                          "--n", "10", "--lmax", "2", "--beta", "0.1")
    assert code == 0 and err == ""
    rec = json.loads(out)
    assert rec["kind"] == "trilemma-sync"
    assert rec["delta"] == pytest.approx(7 / 9)


def test_bound_counting_and_optimality(capsys):
    code, out, _ = _run(capsys, "bound", "--kind", "counting",
                        "--out", "5", "--hops", "3")
    assert code == 0
    rec = json.loads(out)
    assert rec["min_messages"] == 15
    assert rec["overhead_fraction"] == pytest.approx(2 / 3)
    code, out, _ = _run(capsys, "bound", "--kind", "optimality",
                        "--n", "5", "--mu", "3")
    assert json.loads(out)["total"] == 15


def test_bound_without_kind_fails(capsys):
    code, _, err = _run(capsys, "bound")
    assert code == 1
    assert "kind" in err


def test_unknown_subcommand_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["transmogrify"])
    assert exc.value.code == 1


def test_no_subcommand_prints_help(capsys):
    code, out, _ = _run(capsys)
    assert code == 1
    assert "bound" in out and "simulate" in out


def test_simulate_record(capsys):
    code, out, err = _run(capsys, "simulate", "--protocol", "trilemma-unsync",
                          "--attack", "timing-interval", "--n", "2",
                          "--lmax", "2", "--p", "0.25", "--trials", "200",
                          "--seed", "1")
    assert code == 0 and err == ""
    rec = json.loads(out)
    assert rec["protocol"] == "trilemma-unsync"
    assert rec["attack"] == "timing-interval"
    assert rec["notion"] == "SO"
    assert rec["trials"] == 200
    # --p is shorthand for pure cover at that total rate
    assert rec["params"]["beta"] == pytest.approx(0.25)
    assert rec["params"]["p_real"] == 0.0
    assert rec["ci"][0] <= rec["point"] <= rec["ci"][1]


def test_config_supplies_defaults_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 10, "lmax": 2, "beta": 0.1}))
    code, out, _ = _run(capsys, "bound", "--kind", "trilemma-sync",
                        "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["delta"] == pytest.approx(7 / 9)
    code, out, _ = _run(capsys, "bound", "--kind", "trilemma-sync",
                        "--config", str(cfg), "--beta", "0.9")
    assert code == 0
    assert json.loads(out)["delta"] == 0.0


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"n": 10, "warp": 9}))
    code, _, err = _run(capsys, "bound", "--kind", "trilemma-sync",
                        "--config", str(cfg))
    assert code == 1
    assert "warp" in err


def test_config_must_be_an_object(tmp_path, capsys):
    cfg = tmp_path / "list.json"
    cfg.write_text("[1, 2]")
    code, _, err = _run(capsys, "bound", "--kind", "trilemma-sync",
                        "--config", str(cfg))
    assert code == 1 and "flat" in err


def test_verify_pass_and_fail_exit_codes(capsys):
    argv = ["verify", "--protocol", "dropping-model", "--attack", "dropping",
            "--n", "3", "--lmax", "1", "--relays", "4", "--copies", "2",
            "--trials", "200", "--seed", "0"]
    code, out, _ = _run(capsys, *argv)
    assert code == 0
    rec = json.loads(out)
    assert rec["verdict"] == "pass"
    assert rec["check"] == "exact"
    assert rec["expected"] == 1.0
    # an absurd negative tolerance turns the same run into a failure
    code, out, _ = _run(capsys, *argv, "--tol", "-2")
    assert code == 2
    assert json.loads(out)["verdict"] == "fail"


def test_verify_rejects_unknown_combo(capsys):
    code, _, err = _run(capsys, "verify", "--protocol", "dcnet-round",
                        "--attack", "dropping", "--n", "3", "--lmax", "1",
                        "--trials", "200")
    assert code == 1
    assert "reference" in err


def test_region_defaults_to_a_population(capsys):
    code, out, _ = _run(capsys, "region", "--bound", "trilemma",
                        "--lmax", "2", "--beta", "0.3")
    assert code == 0
    rec = json.loads(out)
    assert rec["n"] == 1000
    assert rec["verdict"] == "impossible"
    assert rec["threshold"] == pytest.approx(0.4995)


def test_atlas_table_and_single_preset(capsys):
    code, out, _ = _run(capsys, "atlas")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 11
    assert rows == sorted(rows, key=lambda r: r["preset"])
    code, out, _ = _run(capsys, "atlas", "--preset", "tor")
    rows = json.loads(out)
    assert len(rows) == 1 and rows[0]["preset"] == "tor"
    assert rows[0]["counting"] == "falls-short"


def test_atlas_grid(capsys):
    code, out, _ = _run(capsys, "atlas", "--grid", "--lmax-range", "2:3",
                        "--beta-range", "0.1:0.9:3")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == GRID_HEADER
    assert len(lines) == 1 + 2 * 3


def test_simulate_is_byte_identical_across_workers(capsys):
    argv = ["simulate", "--protocol", "trilemma-unsync", "--attack",
            "timing-interval", "--n", "2", "--lmax", "2", "--p", "0.5",
            "--trials", "3000", "--seed", "42"]
    _, out1, _ = _run(capsys, *argv, "--workers", "1")
    _, out3, _ = _run(capsys, *argv, "--workers", "3")
    assert out1 == out3


def test_bad_parameter_exits_one(capsys):
    code, _, err = _run(capsys, "simulate", "--protocol", "trilemma-unsync",
                        "--attack", "timing-interval", "--n", "1",
                        "--lmax", "2", "--trials", "200")
    assert code == 1
    assert "acnbounds:" in err
