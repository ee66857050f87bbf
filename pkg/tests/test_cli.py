import csv
import io
import json
import math

import pytest
from hypothesis import given, strategies as st

from quelab import cli, config
from quelab.errors import ConfigInvalid
from quelab.experiments import CRITERIA, REGISTRY, ExperimentReport, bounded_growth, run_experiment


def _write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_every_criterion_has_one_experiment():
    assert sorted(CRITERIA) == list(range(1, 17))
    assert len(set(CRITERIA.values())) == 16
    assert set(CRITERIA.values()) == set(REGISTRY) == set(config.EXPERIMENTS)


def test_validate_merges_defaults():
    p = config.validate("special-check", {"schema": 1, "triples": 5})
    assert p["triples"] == 5 and p["tol"] == config.DEFAULTS["special-check"]["tol"]


@pytest.mark.parametrize("raw,needle", [
    ({"schema": 1, "bogus": 3}, "bogus"),
    ({"schema": 2}, "schema"),
    ({"triples": 5}, "schema"),
    ({"schema": 1, "triples": "many"}, "triples"),
    ({"schema": 1, "experiment": "que-table"}, "experiment"),
])
def test_validate_names_offending_key(raw, needle):
    with pytest.raises(ConfigInvalid, match=needle):
        config.validate("special-check", raw)


def test_shipped_configs_validate():
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    for exp in config.EXPERIMENTS:
        config.load(exp, str(root / f"{exp}.json"))


def test_malformed_config_exit_2(tmp_path, capsys):
    path = _write(tmp_path, {"schema": 1, "tripels": 5})
    code = cli.main(["run", "special-check", "--config", path, "--out", str(tmp_path / "o")])
    assert code == 2
    assert "tripels" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_invalid_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{schema: 1")
    assert cli.main(["run", "special-check", "--config", str(p), "--out", str(tmp_path)]) == 2


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_cells_round_trip(v):
    assert float(cli.format_cell(v)) == v


@given(st.integers(-10 ** 40, 10 ** 40))
def test_int_cells_exact(v):
    assert cli.format_cell(v) == str(v)


def test_csv_quoting_and_crlf():
    text = cli.table_csv([{"a": 1, "b": 'x, "y"'}, {"a": 0.1, "c": True}])
    assert text.split("\r\n")[0] == "a,b,c"
    assert '"x, ""y"""' in text
    assert "\n" not in text.replace("\r\n", "")
    rows = list(csv.reader(io.StringIO(text, newline="")))
    assert rows[1] == ["1", 'x, "y"', ""] and rows[2] == ["0.10000000000000001", "", "true"]


def test_run_writes_deterministic_outputs(tmp_path):
    path = _write(tmp_path, {"schema": 1, "triples": 4})
    outs = []
    for d in ("a", "b"):
        code = cli.main(["run", "special-check", "--config", path, "--out", str(tmp_path / d), "--seed", "3"])
        assert code == 0
        outs.append((tmp_path / d / "special-check.csv").read_bytes())
    assert outs[0] == outs[1]
    assert b"\r\n" in outs[0]
    data = json.loads((tmp_path / "a" / "special-check.json").read_text())
    assert data["seed"] == 3 and data["config"]["triples"] == 4
    assert all("tolerance" in r and "provenance" in r for r in data["rows"])
    assert not [p for p in (tmp_path / "a").iterdir() if p.name.startswith(".tmp")]


def test_tolerance_failure_exit_1(tmp_path):
    path = _write(tmp_path, {"schema": 1, "triples": 3, "tol": 1e-30})
    assert cli.main(["run", "special-check", "--config", path, "--out", str(tmp_path)]) == 1
    assert (tmp_path / "special-check.csv").exists()


def test_report_round_trip():
    rep = run_experiment("special-check", config.validate("special-check", {"schema": 1, "triples": 3}), seed=2)
    text = cli.report_json(rep)
    back = ExperimentReport.from_dict(json.loads(text))
    assert cli.report_json(back) == text
    assert cli.report_csv(back) == cli.report_csv(rep)


def test_bounded_growth_rule():
    assert bounded_growth([1.0, 1.1, 1.2, 1.3])
    assert not bounded_growth([1.0, 1.0, 3.0, 5.0])
    assert not bounded_growth([1.0, math.nan])
