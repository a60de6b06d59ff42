import csv
import io
import json

import pytest

from app.engine.engine import (
    APPS, ORACLE_COUNTS, RESULT_COLUMNS, THEOREMS, ExperimentConfig, IncidenceEngine, build_set, default_generators,
    parse_fault, parse_q_list, parse_seed_range, render_rows,
)
from app.engine.errors import ExperimentConfigError, FieldError
from app.engine.geometry_module import load_set
from app.engine.gf_module import build_field


@pytest.fixture(scope="module")
def engine():
    return IncidenceEngine(verbose=False, workers=1)


def make_config(**data):
    return ExperimentConfig.from_dict(data)


# ----- configuration ----------------------------------------------------------------


def test_parse_q_list():
    assert parse_q_list("2,3,2") == (2, 3)
    assert parse_q_list(5) == (5,)
    assert parse_q_list([4, 2]) == (4, 2)
    with pytest.raises(ExperimentConfigError, match="empty q list"):
        parse_q_list("")
    with pytest.raises(ExperimentConfigError):
        parse_q_list("two")


def test_parse_seed_range():
    assert parse_seed_range("0..99") == (0, 99)
    assert parse_seed_range("7") == (7, 7)
    assert parse_seed_range([3, 4]) == (3, 4)
    with pytest.raises(ExperimentConfigError):
        parse_seed_range("9..3")
    with pytest.raises(ExperimentConfigError):
        parse_seed_range("a..b")


def test_parse_fault():
    assert parse_fault("0,1") == (0, 1)
    assert parse_fault(None) is None
    with pytest.raises(ExperimentConfigError):
        parse_fault("3")
    with pytest.raises(ExperimentConfigError):
        parse_fault("-1,2")


def test_config_aliases_and_defaults():
    config = make_config(theorem="vinh", q="2,3", seeds="0..4", **{"lambda": "computed", "gen-lines": "full_linepairs"})
    assert config.theorem_id == "vinh"
    assert config.q_list == (2, 3)
    assert config.seeds == (0, 4)
    assert config.lambda_mode == "computed"
    assert config.gen_lines == "full_linepairs"
    assert config.variant == "corrected"
    assert config.threshold_exponent == 3.5
    assert len(config.grid()) == 10
    assert config.grid() == sorted(config.grid())


def test_config_rejects_unknown_keys():
    with pytest.raises(ExperimentConfigError, match="unknown config key 'colour'"):
        make_config(colour="blue")
    with pytest.raises(ExperimentConfigError, match="JSON object"):
        ExperimentConfig.from_dict(["verify"])
    with pytest.raises(ExperimentConfigError, match="numeric"):
        make_config(d1="two")


def test_config_validation():
    with pytest.raises(FieldError, match="unsupported field order 6"):
        make_config(theorem="vinh", q="6").validate()
    with pytest.raises(ExperimentConfigError, match="unknown theorem"):
        make_config(theorem="riemann").validate()
    with pytest.raises(ExperimentConfigError, match="unknown application"):
        make_config(command="apps", app="dot_triples").validate()
    with pytest.raises(ExperimentConfigError):
        make_config(theorem="vinh", gen="grid:n=3").validate()
    with pytest.raises(ExperimentConfigError):
        make_config(theorem="vinh", output="xml").validate()
    with pytest.raises(ExperimentConfigError, match="oracle_instances"):
        make_config(command="oracle", oracle_instances=0).validate()


def test_run_id_ignores_presentation_fields():
    base = make_config(theorem="vinh", q="2", seeds="0..3")
    assert base.run_id == make_config(theorem="vinh", q="2", seeds="0..3", out="json", workers=4).run_id
    assert base.run_id != make_config(theorem="vinh", q="2", seeds="0..4").run_id
    assert len(base.run_id) == 12


def test_config_overrides_base():
    base = make_config(theorem="cs1", q="3", seeds="1..2")
    merged = ExperimentConfig.from_dict({"q": "5", "theorem": None}, base)
    assert merged.q_list == (5,)
    assert merged.theorem_id == "cs1"
    assert merged.seeds == (1, 2)
    assert merged.oracle_instances is None
    assert ExperimentConfig.from_dict({"oracle_instances": "4"}, base).oracle_instances == 4


# ----- generators -------------------------------------------------------------------


def test_build_set_clamps_to_population():
    spec = build_field(2)
    assert build_set(spec, "random_points:n=100", 0).total == 16
    assert build_set(spec, "random_linepairs:n=100,nonvertical_only", 0).total == 16


def test_default_generators():
    assert default_generators("cs1", 2, 3)[1].startswith("random_hyperplanepairs")
    assert default_generators("vinh")[1].startswith("random_linepairs")
    assert default_generators("dot_4d")[0] == "random_vectors:n=20,d=4"


# ----- runs -------------------------------------------------------------------------


def test_vinh_computed_acceptance_run(engine):
    config = make_config(theorem="vinh", q="2,3", gen="random_points:n=20", gen_lines="random_linepairs:n=20",
                         seeds="0..99", **{"lambda": "computed"})
    result = engine.run(config)
    assert result.exit_code == 0, result.failures[:1]
    assert len(result.rows) == 200
    assert [(row.q, row.seed) for row in result.rows] == config.grid()
    assert all(row.discrepancy <= row.bound_term + 1e-9 for row in result.rows)


@pytest.mark.parametrize("theorem", THEOREMS)
def test_every_theorem_runs_clean(engine, theorem):
    result = engine.run(make_config(theorem=theorem, q="2,3", seeds="0..1"))
    assert result.exit_code == 0, result.failures[:1]
    assert len(result.rows) == 4
    assert all(row.theorem_id == theorem for row in result.rows)


@pytest.mark.parametrize("app_id", APPS)
def test_every_app_runs_clean(engine, app_id):
    result = engine.run(make_config(command="apps", app=app_id, q="2,3,4", seeds="0..1"))
    assert result.exit_code == 0, result.failures[:1]
    assert len(result.rows) == 6


def test_cs2_full_space_exceedance(engine):
    result = engine.run(make_config(theorem="cs2", q="2", gen="full_points", gen_lines="full_linepairs"))
    row = result.rows[0]
    assert row.lhs == 144
    assert row.ratio == pytest.approx(144 / 132)
    assert result.exit_code == 0


def test_dot_pairs_variants(engine):
    as_written = engine.run(make_config(command="apps", app="dot_pairs", q="3", gen="full_points",
                                        variant="as_written"))
    corrected = engine.run(make_config(command="apps", app="dot_pairs", q="3", gen="full_points"))
    assert as_written.rows[0].lhs == 648
    assert as_written.rows[0].theorem_id == "dot_pairs_as_written"
    assert corrected.rows[0].lhs == 576


def test_runs_are_deterministic(engine):
    config = make_config(theorem="cartesian", q="3,5", seeds="0..5")
    first = engine.run(config).render()
    assert first == engine.run(config).render()
    threaded = IncidenceEngine(verbose=False, workers=4)
    assert first == threaded.run(config).render()


def test_csv_and_json_rendering(engine):
    result = engine.run(make_config(theorem="sdz", q="2", seeds="0..2"))
    rows = list(csv.reader(io.StringIO(result.render("csv"))))
    assert tuple(rows[0]) == RESULT_COLUMNS
    assert len(rows) == 4
    assert rows[1][-1] == ""
    assert rows[1][RESULT_COLUMNS.index("hypothesis_ok")] in ("true", "false")
    objects = json.loads(result.render("json"))
    assert [tuple(o) for o in objects] == [RESULT_COLUMNS] * 3


def test_timings_fill_elapsed(engine):
    result = engine.run(make_config(theorem="cs1", q="2", timings=True))
    assert result.rows[0].elapsed_ms is not None
    assert render_rows(result.rows).splitlines()[1].split(",")[-1] != ""


def test_dump_sets(engine, tmp_path):
    engine.run(make_config(theorem="vinh", q="2", seeds="0..1", dump_sets=str(tmp_path)))
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["vinh_q2_seed0_flats.txt", "vinh_q2_seed0_points.txt",
                     "vinh_q2_seed1_flats.txt", "vinh_q2_seed1_points.txt"]
    assert load_set(tmp_path / "vinh_q2_seed0_points.txt").total == 16


def test_run_rejects_bad_configs(engine):
    with pytest.raises(FieldError, match="unsupported field order 6"):
        engine.run(make_config(theorem="vinh", q="6"))
    with pytest.raises(ExperimentConfigError):
        engine.run(make_config(command="oracle"))


# ----- spectrum and oracle ----------------------------------------------------------


def test_spectrum(engine):
    report = engine.spectrum(2)
    assert report["n"] == 49
    assert report["k"] == 9
    assert report["lambda2"] == pytest.approx(4.243, abs=1e-3)
    assert report["bound"] == pytest.approx(5.657, abs=1e-3)
    assert report["regular"]


def test_oracle_small_fields(engine):
    report = engine.oracle(make_config(command="oracle", q="2,3", oracle_instances=3))
    assert report.ok, report.counterexample
    assert report.exit_code == 0
    names = {check.name for check in report.checks}
    assert {"counting_equivalence", "full_space_linepairs", "full_space_hyperplanepairs", "regular",
            "neighbor_formula", "square_decomposition", "lambda_bound", "mixing", "energy_reduction"} <= names
    assert report.summary().endswith("checks passed\n")
    by_name = {(check.name, check.q): check for check in report.checks}
    assert {"mixing_l2", "vinh_computed", "neighbor_formula_2x3", "lambda_bound_2x3",
            "neighbor_formula_3x3", "lambda_bound_3x3"} <= names
    assert ("neighbor_formula_2x3", 3) in by_name
    assert ("neighbor_formula_3x3", 3) not in by_name
    assert by_name["mixing", 2].detail == {"instances": 3}
    assert by_name["vinh_computed", 3].detail == {"instances": 3}


def test_oracle_defaults_to_full_counts(engine):
    spec = build_field(2)
    assert engine._oracle_counting(spec, None).detail == {"instances": ORACLE_COUNTS["counting"]}
    assert engine._oracle_energy(spec, None).detail == {"instances": ORACLE_COUNTS["energy"]}
    assert engine._oracle_energy(spec, 7).detail == {"instances": 7}
    assert ORACLE_COUNTS == {"counting": 200, "mixing": 500, "mixing_l2": 200, "vinh": 100, "energy": 100}


def test_oracle_fault_injection(engine):
    report = engine.oracle(make_config(command="oracle", q="2", oracle_instances=2, inject_fault="0,1"))
    assert not report.ok
    assert report.exit_code == 1
    assert report.counterexample["name"] == "regular"
    failed = {check.name for check in report.checks if not check.ok}
    assert "neighbor_formula" in failed


def test_oracle_fault_outside_graph(engine):
    with pytest.raises(ExperimentConfigError):
        engine.oracle(make_config(command="oracle", q="2", inject_fault="0,49"))


@pytest.mark.slow
def test_default_oracle_suite(engine):
    report = engine.oracle(make_config(command="oracle", q="2,3,4,5"))
    assert report.ok, report.counterexample


# ----- persistence ------------------------------------------------------------------


def test_store_and_read_back(engine):
    result = engine.run(make_config(theorem="cs1", q="2", seeds="0..2", store=True))
    listed = engine.list_runs()
    assert listed["success"]
    assert result.run_id in {run["run_id"] for run in listed["data"]}
    fetched = engine.get_run(result.run_id)
    assert fetched["success"]
    assert [row["seed"] for row in fetched["data"]["rows"]] == [0, 1, 2]
    assert fetched["data"]["rows"][0]["lhs"] == result.rows[0].lhs
    missing = engine.get_run("000000000000")
    assert not missing["success"]
