import csv
import json
import math

import jsonschema
import pytest

from mixcenter.cli import SCHEMAS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv)
    payload = json.loads(out)
    schema = SCHEMAS.get(payload.get("schema"))
    if schema is not None:
        jsonschema.validate(payload, schema)
    return code, payload


@pytest.fixture
def cauchy_spec(tmp_path):
    path = tmp_path / "cauchy.json"
    path.write_text(json.dumps({"kind": "cauchy"}))
    return str(path)


@pytest.fixture
def triple_spec(tmp_path):
    third = {"kind": "finite", "atoms": [[0.0, 1 / 3], [1.0, 2 / 3]]}
    path = tmp_path / "triple.json"
    path.write_text(json.dumps([third, third, third]))
    return str(path)


class TestInterval:
    def test_n3(self, capsys):
        code, payload = run_json(capsys, "interval", "--n", "3")
        assert code == 0
        assert payload["hi"] == pytest.approx(math.log(2) / math.pi, abs=1e-12)
        assert payload["lo"] == -payload["hi"]
        assert payload["method"] == "exact_formula"

    def test_bad_n(self, capsys):
        code, _ = run_cli(capsys, "interval", "--n", "1")
        assert code == 1

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "iv.json"
        code, _ = run_cli(capsys, "interval", "--n", "5", "--out", str(out))
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["hi"] == pytest.approx(math.log(4) / math.pi)


class TestBounds:
    def test_cm_single(self, capsys, cauchy_spec):
        code, payload = run_json(capsys, "bounds", "--marginals", cauchy_spec, "--n", "3")
        assert code == 0
        assert payload["mode"] == "cm"
        assert payload["hi"] == pytest.approx(math.log(2) / math.pi, abs=1e-4)

    def test_jm_list(self, capsys, triple_spec):
        code, payload = run_json(
            capsys, "bounds", "--marginals", triple_spec, "--beta", "0.05"
        )
        assert code == 0
        assert payload["mode"] == "jm"
        assert payload["lo"] <= 2.0 <= payload["hi"]

    def test_missing_n_for_single(self, capsys, cauchy_spec):
        code, _ = run_cli(capsys, "bounds", "--marginals", cauchy_spec)
        assert code == 1

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run_cli(capsys, "bounds", "--marginals", str(tmp_path / "nope.json"),
                          "--n", "3")
        assert code == 2


class TestDual:
    def test_inside_interval(self, capsys):
        code, payload = run_json(capsys, "dual", "--n", "3", "--c", "0.15")
        assert code == 0
        assert payload["value"] >= 1 - 1e-6
        assert payload["excludes_center"] is False

    def test_point_mass_excluded(self, capsys, tmp_path):
        path = tmp_path / "pm.json"
        path.write_text(json.dumps({"kind": "point", "value": 0.0}))
        code, payload = run_json(capsys, "dual", "--n", "2", "--c", "0.5",
                                 "--marginal", str(path))
        assert code == 0
        assert payload["excludes_center"] is True


class TestFeasibleCenters:
    def test_feasible(self, capsys, triple_spec):
        code, payload = run_json(
            capsys, "feasible", "--marginals", triple_spec, "--center", "2.0"
        )
        assert code == 0
        assert payload["verdict"] == "feasible"
        assert "coupling" in payload
        sums = {sum(row) for row in payload["coupling"]["support"]}
        assert sums == {2.0}

    def test_infeasible_with_dual(self, capsys, triple_spec):
        code, payload = run_json(
            capsys, "feasible", "--marginals", triple_spec, "--center", "1.0"
        )
        assert code == 0
        assert payload["verdict"] == "infeasible"
        assert payload["dual"] is not None

    def test_centers(self, capsys, triple_spec):
        code, payload = run_json(capsys, "centers", "--marginals", triple_spec)
        assert code == 0
        assert payload["centers"] == [2.0]


class TestSampleVerify:
    def test_round_trip(self, capsys, tmp_path):
        out = str(tmp_path / "rows.csv")
        code, _ = run_cli(
            capsys, "sample", "--n", "3", "--c", "0.15", "--count", "8000",
            "--seed", "7", "--t-grid", "512", "--out", out,
        )
        assert code == 0
        meta = json.loads((tmp_path / "rows.csv.meta.json").read_text())
        jsonschema.validate(meta, SCHEMAS["mixcenter.sample_meta/1"])
        assert meta["n"] == 3 and meta["seed"] == 7
        code, payload = run_json(capsys, "verify", out)
        assert code == 0
        assert payload["all_pass"] is True

    def test_csv_round_trips_doubles(self, capsys, tmp_path):
        out = str(tmp_path / "rows.csv")
        run_cli(capsys, "sample", "--n", "3", "--c", "0.1", "--count", "50",
                "--seed", "1", "--t-grid", "512", "--out", out)
        with open(out) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header[:3] == ["x1", "x2", "x3"]
        assert header[3:] == ["t", "branch", "row_sum"]
        for row in rows:
            vals = [float(v) for v in row[:3]]
            assert float(row[5]) == sum(vals)  # 17 digits round-trip exactly

    def test_determinism(self, capsys, tmp_path):
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        for out in (a, b):
            run_cli(capsys, "sample", "--n", "3", "--c", "0.1", "--count", "200",
                    "--seed", "5", "--t-grid", "512", "--out", out)
        assert open(a).read() == open(b).read()

    def test_c_zero_engine(self, capsys, tmp_path):
        out = str(tmp_path / "zero.csv")
        code, _ = run_cli(capsys, "sample", "--n", "2", "--c", "0", "--count",
                          "4000", "--seed", "2", "--out", out)
        assert code == 0
        code, payload = run_json(capsys, "verify", out)
        assert code == 0 and payload["all_pass"]

    def test_ra_engine(self, capsys, tmp_path):
        out = str(tmp_path / "ra.csv")
        code, _ = run_cli(capsys, "sample", "--n", "3", "--c", "0", "--count",
                          "2000", "--seed", "3", "--engine", "ra", "--out", out)
        assert code == 0
        code, payload = run_json(capsys, "verify", out)
        assert code == 0 and payload["all_pass"]
        code, _ = run_cli(capsys, "sample", "--n", "3", "--c", "0.1", "--count",
                          "10", "--seed", "3", "--engine", "ra", "--out", out)
        assert code == 1  # ra engine only flattens toward center zero

    def test_center_outside_interval(self, capsys, tmp_path):
        code, _ = run_cli(capsys, "sample", "--n", "3", "--c", "0.3", "--count",
                          "10", "--out", str(tmp_path / "x.csv"))
        assert code == 1

    def test_zero_count_rejected(self, capsys, tmp_path):
        code, _ = run_cli(capsys, "sample", "--n", "3", "--c", "0", "--count",
                          "0", "--out", str(tmp_path / "x.csv"))
        assert code == 1

    def test_verify_csv_format(self, capsys, tmp_path):
        out = str(tmp_path / "rows.csv")
        run_cli(capsys, "sample", "--n", "3", "--c", "0", "--count", "2000",
                "--seed", "9", "--out", out)
        code, text = run_cli(capsys, "verify", out, "--format", "csv")
        assert code == 0
        header = text.splitlines()[0]
        assert header == "name,passed,measured,threshold"


class TestEx01:
    def test_sums(self, capsys):
        code, payload = run_json(capsys, "ex01", "--K", "8")
        assert code == 0
        x_sums = {sum(row) for row in payload["mix_x"]["support"]}
        y_sums = {sum(row) for row in payload["mix_y"]["support"]}
        assert x_sums == {0.0} and y_sums == {1.0}
        assert payload["residual"] == pytest.approx(2.0 ** -9)

    def test_split_outputs(self, capsys, tmp_path):
        fx, fy = str(tmp_path / "x.json"), str(tmp_path / "y.json")
        code, _ = run_cli(capsys, "ex01", "--K", "4", "--out-x", fx, "--out-y", fy)
        assert code == 0
        mix_x = json.loads(open(fx).read())
        assert {sum(r) for r in mix_x["support"]} == {0.0}


class TestCliPlumbing:
    def test_unknown_flag(self, capsys):
        assert main(["interval", "--n", "3", "--bogus"]) == 2

    def test_unknown_command(self, capsys):
        assert main(["transmogrify"]) == 2

    def test_malformed_json(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        code, _ = run_cli(capsys, "bounds", "--marginals", str(bad), "--n", "3")
        assert code == 2

    def test_out_dir_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("MIXCENTER_OUT_DIR", str(tmp_path))
        code, _ = run_cli(capsys, "sample", "--n", "2", "--c", "0", "--count",
                          "100", "--seed", "1", "--out", "env.csv")
        assert code == 0
        assert (tmp_path / "env.csv").exists()

    def test_repro_all_pass(self, capsys, tmp_path):
        out_file = tmp_path / "repro.json"
        code, out = run_cli(capsys, "repro", "--out", str(out_file))
        assert code == 0
        assert "[FAIL]" not in out
        payload = json.loads(out_file.read_text())
        jsonschema.validate(payload, SCHEMAS["mixcenter.repro/1"])
        assert payload["all_pass"] is True
