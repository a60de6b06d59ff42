import json

import pytest
from click.testing import CliRunner

from app.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def test_spectrum_command(runner):
    result = runner.invoke(cli, ["spectrum", "--q", "2", "--d1", "2", "--d2", "2"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["n"] == 49
    assert report["k"] == 9
    assert report["lambda2"] == pytest.approx(4.243, abs=1e-3)
    assert report["bound"] == pytest.approx(5.657, abs=1e-3)


def test_spectrum_for_several_fields(runner):
    result = runner.invoke(cli, ["spectrum", "--q", "2,3"])
    assert result.exit_code == 0, result.output
    assert [r["n"] for r in json.loads(result.output)] == [49, 169]


def test_verify_acceptance_example(runner):
    result = runner.invoke(cli, [
        "verify", "--theorem", "vinh", "--q", "2,3", "--gen", "random_points:n=20",
        "--gen-lines", "random_linepairs:n=20", "--seeds", "0..99", "--lambda", "computed", "--out", "csv",
    ])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0].startswith("run_id,q,d1,d2,theorem_id,seed")
    assert len(lines) == 201


def test_unsupported_field_order(runner):
    result = runner.invoke(cli, ["verify", "--theorem", "vinh", "--q", "6"])
    assert result.exit_code == 2
    assert "unsupported field order 6" in result.output


def test_unknown_theorem_is_a_config_error(runner):
    result = runner.invoke(cli, ["verify", "--theorem", "fermat", "--q", "2"])
    assert result.exit_code == 2
    assert "unknown theorem" in result.output


def test_apps_json_output(runner):
    result = runner.invoke(cli, ["apps", "--app", "dot_pairs", "--q", "3", "--gen", "full_points",
                                 "--variant", "as_written", "--out", "json"])
    assert result.exit_code == 0, result.output
    rows = json.loads(result.output)
    assert rows[0]["lhs"] == 648
    assert rows[0]["theorem_id"] == "dot_pairs_as_written"


def test_flags_override_config_file(runner, tmp_path):
    path = tmp_path / "cs2.json"
    path.write_text(json.dumps({"theorem": "cs2", "q": "3", "gen": "full_points", "gen_lines": "full_linepairs",
                                "out": "json"}))
    result = runner.invoke(cli, ["verify", "--config", str(path), "--q", "2"])
    assert result.exit_code == 0, result.output
    row = json.loads(result.output)[0]
    assert row["q"] == 2
    assert row["lhs"] == 144
    assert row["ratio"] == pytest.approx(1.0909, abs=1e-4)


def test_bad_config_files(runner, tmp_path):
    missing = runner.invoke(cli, ["verify", "--config", str(tmp_path / "nope.json")])
    assert missing.exit_code == 2
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"theorem": "vinh", "flavour": "mild"}))
    unknown = runner.invoke(cli, ["verify", "--config", str(path)])
    assert unknown.exit_code == 2
    assert "unknown config key" in unknown.output


def test_oracle_command(runner):
    result = runner.invoke(cli, ["oracle", "--q", "2", "--instances", "2"])
    assert result.exit_code == 0, result.output
    assert "checks passed" in result.output


def test_oracle_fault_injection(runner):
    result = runner.invoke(cli, ["oracle", "--q", "2", "--instances", "2", "--inject-fault", "0,1"])
    assert result.exit_code == 1
    assert "FAIL regular q=2" in result.output
    assert "counterexample" in result.output


def test_oracle_reads_fields_from_config(runner, tmp_path):
    path = tmp_path / "oracle.json"
    path.write_text(json.dumps({"q": "3", "oracle_instances": 1}))
    result = runner.invoke(cli, ["oracle", "--config", str(path)])
    assert result.exit_code == 0, result.output
    assert "q=3" in result.output
    assert "q=2" not in result.output


def test_verify_dump_sets(runner, tmp_path):
    result = runner.invoke(cli, ["verify", "--theorem", "cartesian", "--q", "3", "--dump-sets", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert {p.name for p in tmp_path.iterdir()} == {
        "cartesian_q3_seed0_a.txt", "cartesian_q3_seed0_b.txt", "cartesian_q3_seed0_flats.txt",
    }
