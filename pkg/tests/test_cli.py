"""CLI surface: config parsing, subcommands, exit codes, fault injection."""

import json

import numpy as np
import pytest

from rotcollapse import cli
from rotcollapse import field as fld
from rotcollapse import verify as ver
from rotcollapse.cli import (EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, UsageError,
                             parse_config, serialize_config)


def test_parse_config_roundtrip(tmp_path):
    values = {"omega": 1.0, "a_frac": 0.9, "n": 128, "tol": 1e-5}
    path = tmp_path / "conf.json"
    path.write_text(json.dumps(serialize_config("minimize", values)))
    parsed = parse_config("minimize", {}, str(path))
    assert parsed == values


def test_parse_config_cli_overrides(tmp_path):
    path = tmp_path / "conf.json"
    path.write_text(json.dumps({"minimize.omega": 0.5, "minimize.n": 128}))
    parsed = parse_config("minimize", {"omega": 1.0, "a_frac": None},
                          str(path))
    assert parsed["omega"] == 1.0
    assert parsed["n"] == 128


def test_parse_config_unknown_key(tmp_path):
    path = tmp_path / "conf.json"
    path.write_text(json.dumps({"minimize.bogus": 1}))
    with pytest.raises(UsageError):
        parse_config("minimize", {}, str(path))
    path.write_text(json.dumps({"nosuch.omega": 1}))
    with pytest.raises(UsageError):
        parse_config("minimize", {}, str(path))


def test_parse_config_foreign_scope_tolerated(tmp_path):
    # keys for other subcommands are known, just not relevant here
    path = tmp_path / "conf.json"
    path.write_text(json.dumps({"minimize.omega": 1.0, "sweep.out": "x"}))
    parsed = parse_config("minimize", {}, str(path))
    assert parsed == {"omega": 1.0}


def test_townes_subcommand(tmp_path):
    out = tmp_path / "constants.json"
    csv = tmp_path / "profile.csv"
    code = cli.main(["townes", "--shoot-tol", "1e-10", "--r-max", "18",
                     "--spacing", "5e-4", "--json", str(out),
                     "--profile-csv", str(csv)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert set(payload) == {"a_star", "q0_center", "x_moment", "l4_norm4",
                            "grad_norm2", "r_max", "spacing"}
    assert abs(payload["a_star"] - 11.7009) < 1e-3
    rows = np.loadtxt(csv, delimiter=",", skiprows=1)
    assert rows[0, 0] == 0.0 and abs(rows[0, 1] - 2.2062) < 1e-3


def test_minimize_and_diagnose_roundtrip(tmp_path):
    out = tmp_path / "gs.f2d1"
    rep = tmp_path / "rep.json"
    code = cli.main(["minimize", "--omega", "0.0", "--a-frac", "0.0",
                     "--n", "64", "--extent", "8", "--tol", "1e-6",
                     "--out", str(out), "--report", str(rep)])
    assert code == EXIT_OK
    report = json.loads(rep.read_text())
    assert report["converged"] is True
    assert abs(report["energy"]["total"] - 2.0) < 1e-5
    state = fld.read_f2d1(out)
    assert abs(state.mass() - 1.0) < 1e-9

    diag = tmp_path / "diag.json"
    code = cli.main(["diagnose", "--field", str(out), "--omega", "0.0",
                     "--a-frac", "0.0", "--json", str(diag)])
    assert code == EXIT_OK
    payload = json.loads(diag.read_text())
    assert "eps" in payload and "l2_dist_q0" in payload


def test_minimize_rejects_supercritical_interaction(capsys):
    assert cli.main(["minimize", "--a-frac", "1.2"]) == EXIT_USAGE
    assert "a must be below a*" in capsys.readouterr().err


def test_minimize_rejects_supercritical_rotation(capsys):
    assert cli.main(["minimize", "--omega", "1.5"]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "no ground states above the critical rotation" in err


def test_minimize_nonconvergence_exit_code(tmp_path):
    rep = tmp_path / "rep.json"
    code = cli.main(["minimize", "--omega", "0.0", "--a-frac", "0.5",
                     "--n", "64", "--extent", "8", "--tol", "1e-13",
                     "--max-iters", "4", "--report", str(rep)])
    assert code == EXIT_NUMERICAL
    assert json.loads(rep.read_text())["converged"] is False


def test_sweep_subcommand(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({
        "omega_schedule": 0.0,
        "a_frac_schedule": [0.5, 0.6],
        "grad_tol": 1e-4, "max_iters": 5000}))
    out = tmp_path / "artifacts"
    assert cli.main(["sweep", "--plan", str(plan), "--out", str(out)]) \
        == EXIT_OK
    assert (out / "reports.csv").exists()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"a_frac_schedule": [0.5], "bogus": 1}))
    assert cli.main(["sweep", "--plan", str(bad), "--out", str(out)]) \
        == EXIT_USAGE
    over = tmp_path / "over.json"
    over.write_text(json.dumps({"a_frac_schedule": [1.2]}))
    assert cli.main(["sweep", "--plan", str(over), "--out", str(out)]) \
        == EXIT_USAGE


def test_sweep_requires_plan_and_out():
    assert cli.main(["sweep"]) == EXIT_USAGE


def test_verify_quick_passes():
    assert cli.main(["verify", "--quick"]) == EXIT_OK


def test_verify_fault_injection(profile, constants):
    # corrupting the critical strength must fail the battery at a check
    # whose name identifies the broken identity
    import dataclasses
    broken = dataclasses.replace(constants, a_star=10.0)
    code, rows, _ = ver.run_verification(profile=profile, constants=broken,
                                         quick=True)
    assert code == 1
    assert "pohozaev" in ver.first_failure(rows)
