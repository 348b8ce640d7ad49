"""End-to-end tests of the command-line interface (in-process main())."""

import csv
import io
import json

import pytest

from detfilter import bounds
from detfilter.cli import OUTPUT_DIR_ENV, main
from detfilter.error_model import PrecisionConfig
from detfilter.predicates import PredicateKind, threshold_for


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# ---------------------------------------------------------------------------
# constants


def test_constants_text(capsys):
    rc, out, err = run(capsys, "constants")
    assert rc == 0 and err == ""
    lines = out.splitlines()
    assert lines[0].split()[:3] == ["delta", "sigma", "psi"]
    assert len(lines) == 7  # header + one row per dimension 1..6
    assert "dimension 1 is evaluated exactly" in lines[1]
    assert "3.14" in out  # psi(2) at 3 significant digits


def test_constants_csv(capsys):
    rc, out, _ = run(capsys, "constants", "--format", "csv", "--delta-max", "4")
    assert rc == 0
    recs = list(csv.DictReader(io.StringIO(out)))
    assert len(recs) == 4
    assert recs[2]["delta"] == "3"
    assert recs[2]["epsilon_coefficient"] == "13"
    assert float(recs[1]["sigma"]) == pytest.approx(bounds.sigma(2), rel=1e-2)


def test_constants_json(capsys):
    rc, out, _ = run(capsys, "constants", "--format", "json", "--delta-max", "8")
    assert rc == 0
    rows = json.loads(out)
    assert [r["delta"] for r in rows] == list(range(1, 9))
    assert rows[7]["epsilon_coefficient"] == 247104
    assert rows[4]["epsilon_coefficient"] == 516


def test_constants_rejects_bad_delta_max(capsys):
    rc, _, err = run(capsys, "constants", "--delta-max", "0")
    assert rc == 2
    assert err.startswith("error:")


# ---------------------------------------------------------------------------
# epsilon


def test_epsilon_whichside(capsys):
    rc, out, _ = run(capsys, "epsilon", "--delta", "3", "--bits", "53")
    assert rc == 0
    assert "13 * 2^-53" in out
    assert "1.443e-15" in out
    assert "ops:       14" in out
    assert "note:" not in out


def test_epsilon_insphere_flags_derived_values(capsys):
    rc, out, _ = run(capsys, "epsilon", "--delta", "2", "--bits", "24",
                     "--predicate", "insphere")
    assert rc == 0
    assert "42 * 2^-24" in out
    assert "derived by this package's calculus" in out


def test_epsilon_rejects_out_of_range_delta(capsys):
    rc, _, err = run(capsys, "epsilon", "--delta", "9", "--bits", "53")
    assert rc == 2 and "error:" in err
    rc, _, err = run(capsys, "epsilon", "--delta", "7", "--bits", "53",
                     "--predicate", "insphere")
    assert rc == 2 and "error:" in err


# ---------------------------------------------------------------------------
# simulate


BALL2 = """\
domain = ball
delta = 2
predicate = whichside
n_trials = 4000
seed = 11
thresholds = 0.1, 0.5
"""


@pytest.fixture
def ball2_cfg(tmp_path):
    path = tmp_path / "ball2.cfg"
    path.write_text(BALL2)
    return str(path)


def test_simulate_csv_stdout(capsys, ball2_cfg):
    rc, out, err = run(capsys, "simulate", "--config", ball2_cfg)
    assert rc == 0 and err == ""
    recs = list(csv.DictReader(io.StringIO(out)))
    assert [r["V"] for r in recs] == ["0.1", "0.5"]
    assert all(r["pass"] == "true" for r in recs)
    assert int(recs[0]["N"]) == 4000


def test_simulate_json_and_seed_override(capsys, ball2_cfg):
    rc, out, _ = run(capsys, "simulate", "--config", ball2_cfg,
                     "--format", "json")
    base = json.loads(out)
    rc2, out2, _ = run(capsys, "simulate", "--config", ball2_cfg,
                       "--format", "json", "--seed", "999")
    other = json.loads(out2)
    assert rc == rc2 == 0
    assert base != other  # the override reaches the engine
    assert {r["V"] for r in base} == {0.1, 0.5}


def test_simulate_out_file(capsys, tmp_path, ball2_cfg):
    target = tmp_path / "rows.csv"
    rc, out, _ = run(capsys, "simulate", "--config", ball2_cfg,
                     "--out", str(target))
    assert rc == 0
    assert f"wrote {target}" in out
    assert target.read_text().startswith("delta,domain,predicate")


def test_simulate_out_resolves_against_env(capsys, tmp_path, monkeypatch,
                                           ball2_cfg):
    outdir = tmp_path / "results"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(outdir))
    rc, out, _ = run(capsys, "simulate", "--config", ball2_cfg,
                     "--out", "rows.csv")
    assert rc == 0
    assert (outdir / "rows.csv").exists()
    assert str(outdir) in out


def test_simulate_violated_bound_exits_one(capsys, tmp_path):
    # the general insphere bound is only meaningful on its small-W flank;
    # driving it outside that regime produces an honest dominance failure
    cfg = tmp_path / "weak.cfg"
    cfg.write_text("domain = cube\ndelta = 3\npredicate = insphere\n"
                   "n_trials = 5000\nseed = 77\nthresholds = 0.5\n")
    rc, out, err = run(capsys, "simulate", "--config", str(cfg))
    assert rc == 1
    assert "dominance FAILED" in err
    assert out.startswith("delta,")  # rows still emitted for inspection


def test_simulate_missing_config_exits_two(capsys, tmp_path):
    rc, _, err = run(capsys, "simulate", "--config",
                     str(tmp_path / "nope.cfg"))
    assert rc == 2 and "error:" in err


def test_simulate_bad_config_exits_two(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("domain = ball\ndelta = 2\nn_trials = 10\nseed = 0\n")
    rc, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert rc == 2  # estimate_cdf requires thresholds
    assert "threshold" in err


# ---------------------------------------------------------------------------
# failure


GRID2 = """\
domain = grid
delta = 2
eta_bits = 8
predicate = whichside
n_trials = 20000
seed = 20260823
"""


def test_failure_csv(capsys, tmp_path):
    cfg = tmp_path / "grid2.cfg"
    cfg.write_text(GRID2)
    rc, out, err = run(capsys, "failure", "--config", str(cfg))
    assert rc == 0 and err == ""
    recs = list(csv.DictReader(io.StringIO(out)))
    assert len(recs) == 1
    eps = float(threshold_for(PredicateKind.WHICHSIDE, 2, PrecisionConfig(8)))
    assert float(recs[0]["V"]) == eps
    assert recs[0]["pass"] == "true"
    assert float(recs[0]["bound"]) == pytest.approx(
        bounds.rho(2, 8, 2.0 ** -7), rel=1e-12)


def test_failure_rejects_insphere_config(capsys, tmp_path):
    cfg = tmp_path / "ins.cfg"
    cfg.write_text("domain = grid\ndelta = 2\neta_bits = 8\n"
                   "predicate = insphere\nn_trials = 10\nseed = 0\n")
    rc, _, err = run(capsys, "failure", "--config", str(cfg))
    assert rc == 2
    assert "filter_stats" in err


def test_failure_rejects_continuous_domain(capsys, tmp_path):
    cfg = tmp_path / "ball.cfg"
    cfg.write_text("domain = ball\ndelta = 2\nn_trials = 10\nseed = 0\n")
    rc, _, err = run(capsys, "failure", "--config", str(cfg))
    assert rc == 2 and "grid" in err


# ---------------------------------------------------------------------------
# verify


def test_verify_quick_suite(capsys, tmp_path):
    target = tmp_path / "verify.csv"
    rc, out, err = run(capsys, "verify", "whichside-2d", "--quick",
                       "--out", str(target))
    assert rc == 0 and err == ""
    assert "ball d=2" in out and "cube d=2" in out
    assert "all 20 rows dominated" in out
    recs = list(csv.DictReader(target.open()))
    assert len(recs) == 20
    assert all(r["pass"] == "true" for r in recs)


def test_verify_unknown_suite_rejected_by_parser(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "bogus"])
    assert exc.value.code == 2
