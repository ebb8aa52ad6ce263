import json

import numpy as np
import pytest

from teamfp.cli import main, parse_genspec, parse_teams
from teamfp.experiments import read_csv_columns
from teamfp.gamefile import save_game, save_mg
from teamfp.gamegen import random_mg, random_zsptg


@pytest.fixture
def game_file(tmp_path):
    path = tmp_path / "g.json"
    save_game(random_zsptg([[2, 2], [2, 2]], seed=3), path)
    return path


def test_parse_teams():
    assert parse_teams("2x2+2x3") == ((2, 2), (2, 3))
    with pytest.raises(Exception):
        parse_teams("2x0+2")
    with pytest.raises(Exception):
        parse_teams("abc")


def test_parse_genspec():
    spec = parse_genspec("random-zsptg:teams=2x2+3:seed=9")
    assert spec.family == "random-zsptg"
    assert spec.team_actions == ((2, 2), (3,))
    assert spec.seed == 9
    with pytest.raises(Exception):
        parse_genspec("unknown-family")
    with pytest.raises(Exception):
        parse_genspec("airport:bogus=1")


def test_run_writes_csvs(tmp_path, game_file, capsys):
    out = tmp_path / "run.csv"
    code = main(["run", "--game", str(game_file), "--iterations", "200",
                 "--trials", "2", "--stride", "100", "--out", str(out)])
    assert code == 0
    cols = read_csv_columns(out)
    assert cols["iteration"][-1] == 200
    assert (tmp_path / "run.agg.csv").exists()


def test_run_with_generated_game(tmp_path):
    out = tmp_path / "run.csv"
    code = main(["run", "--gen", "random-zsptg:teams=2x2+2x2:seed=1",
                 "--iterations", "100", "--trials", "1", "--out", str(out)])
    assert code == 0


def test_run_missing_game_exit_2(tmp_path):
    code = main(["run", "--game", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_run_requires_exactly_one_source(tmp_path, game_file):
    code = main(["run", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    code = main(["run", "--game", str(game_file), "--gen", "airport",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_invalid_config_exit_2(tmp_path, game_file):
    code = main(["run", "--game", str(game_file), "--tau", "-1",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_bad_schedule_exit_3_and_override(tmp_path, game_file):
    args = ["run", "--game", str(game_file), "--iterations", "50",
            "--trials", "1", "--alpha-power", "0.4", "--out", str(tmp_path / "x.csv")]
    assert main(args) == 3
    assert main(args + ["--unsafe-schedule"]) == 0


def test_env_seed_fallback(tmp_path, game_file, monkeypatch):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv("TEAMFP_SEED", "123")
    assert main(["run", "--game", str(game_file), "--iterations", "100",
                 "--trials", "1", "--out", str(out1)]) == 0
    monkeypatch.delenv("TEAMFP_SEED")
    assert main(["run", "--game", str(game_file), "--iterations", "100",
                 "--trials", "1", "--seed", "123", "--out", str(out2)]) == 0
    a, b = read_csv_columns(out1), read_csv_columns(out2)
    assert np.array_equal(a["tng_total"], b["tng_total"])


def test_validate_ok_and_invalid(tmp_path, game_file, capsys):
    assert main(["validate", str(game_file)]) == 0
    g = random_zsptg([[2], [2]], seed=0)
    doc = {"kind": "game", "teams": [[2], [2]], "zero_sum": True,
           "potentials": [
               {"row_team": 0, "col_team": 1, "table": [[1.0, 0.0], [0.0, 1.0]]},
               {"row_team": 1, "col_team": 0, "table": [[1.0, 0.0], [0.0, 1.0]]}]}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", str(bad)]) == 1


def test_tng_uniform_and_file(tmp_path, game_file, capsys):
    assert main(["tng", str(game_file), "uniform"]) == 0
    out = capsys.readouterr().out
    assert "tng_total" in out and "lyapunov" in out
    beliefs = tmp_path / "b.json"
    beliefs.write_text(json.dumps(
        {"kind": "beliefs", "vectors": [[0.25] * 4, [0.25] * 4]}))
    assert main(["tng", str(game_file), str(beliefs)]) == 0


def test_gen_roundtrip(tmp_path):
    out = tmp_path / "g.json"
    assert main(["gen", "airport:gates=3:intruders=2", "--out", str(out)]) == 0
    assert main(["validate", str(out)]) == 0
    mg_out = tmp_path / "mg.json"
    assert main(["gen", "random-mg:teams=2+2:num_states=2:horizon=2:seed=1",
                 "--out", str(mg_out)]) == 0
    assert main(["validate", str(mg_out)]) == 0


def test_run_mg(tmp_path):
    mg_path = tmp_path / "mg.json"
    save_mg(random_mg([[2], [2]], num_states=2, horizon=2, seed=1), mg_path)
    out = tmp_path / "mg.csv"
    code = main(["run-mg", "--game", str(mg_path), "--iterations", "50",
                 "--trials", "2", "--stride", "25", "--out", str(out)])
    assert code == 0
    cols = read_csv_columns(out)
    assert "mg_tng_total" in cols
    # repeated game fed to run-mg is a config error
    code = main(["run-mg", "--gen", "airport", "--out", str(out)])
    assert code == 2


def test_opponent_stationary(tmp_path, game_file):
    stat = tmp_path / "s.json"
    stat.write_text(json.dumps(
        {"kind": "stationary", "strategies": {"1": [0.25, 0.25, 0.25, 0.25]}}))
    out = tmp_path / "vs.csv"
    code = main(["run", "--game", str(game_file), "--iterations", "100",
                 "--trials", "1", "--opponent-stationary", str(stat),
                 "--out", str(out)])
    assert code == 0


def test_sweep(tmp_path, game_file):
    outdir = tmp_path / "sweep"
    code = main(["sweep", "--game", str(game_file), "--iterations", "100",
                 "--trials", "1", "--tau", "0.1,0.2",
                 "--variant", "team-fp,independent-team-fp",
                 "--delta", "0.2,0.5", "--out", str(outdir)])
    assert code == 0
    names = sorted(p.name for p in outdir.glob("*.csv") if ".agg" not in p.name)
    assert names == ["independent-team-fp_tau0.1_delta0.2.csv",
                     "independent-team-fp_tau0.1_delta0.5.csv",
                     "independent-team-fp_tau0.2_delta0.2.csv",
                     "independent-team-fp_tau0.2_delta0.5.csv",
                     "team-fp_tau0.1.csv", "team-fp_tau0.2.csv"]
