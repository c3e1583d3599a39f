import json
import math

import pytest

from kugel.cli import dumps, fmt_real, main
from kugel.geometry import StarDomain, rescale_to_volume, unit_ball_volume


@pytest.fixture
def files(tmp_path):
    ball = tmp_path / "ball.json"
    ball.write_text(json.dumps(StarDomain(3, (0, 0, 0), 1.0).to_json()))
    pert = rescale_to_volume(StarDomain(3, (0, 0, 0), 1.0, ((2, 0, 0.2),)), unit_ball_volume(3))
    perturbed = tmp_path / "perturbed.json"
    perturbed.write_text(json.dumps(pert.to_json()))
    big = tmp_path / "big.json"
    big.write_text(json.dumps(StarDomain(3, (0, 0, 0), 4.2, ((2, 0, 0.2),)).to_json()))
    return {"ball": str(ball), "perturbed": str(perturbed), "big": str(big), "dir": tmp_path}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestFormatting:
    def test_reals(self):
        assert fmt_real(1.0) == "1"
        assert fmt_real(0.1) == "0.10000000000000001"
        assert float(fmt_real(math.pi)) == math.pi

    def test_dumps_is_valid_ordered_json(self):
        text = dumps({"b": [1.5, 2], "a": {"x": None, "y": True}, "c": []})
        assert json.loads(text) == {"b": [1.5, 2], "a": {"x": None, "y": True}, "c": []}
        assert text.index('"b"') < text.index('"a"')


class TestSpecfunTable:
    def test_header_and_first_row(self, capsys):
        code, out, _ = run(capsys, "specfun-table", "--start", "0", "--stop", "1", "--step", "0.5")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "t,a_plus,a_minus,u_plus,u_minus"
        assert lines[1] == "0,1,1,1,1"
        assert len(lines) == 4

    def test_row_at_zero_of_a_minus(self, capsys):
        code, out, _ = run(capsys, "specfun-table", "--start", "4.4934094579", "--stop", "5",
                           "--step", "1", "--m", "3")
        row = out.splitlines()[1].split(",")
        assert code == 0 and abs(float(row[2])) < 1e-10

    @pytest.mark.parametrize("argv", [["--step", "0"], ["--step", "-1"], ["--stop", "61"],
                                      ["--start", "2", "--stop", "1"], ["--m", "4"],
                                      ["--bogus"]])
    def test_bad_flags_exit_2(self, capsys, argv):
        assert run(capsys, "specfun-table", *argv)[0] == 2

    def test_json_and_out_file(self, capsys, files):
        path = files["dir"] / "table.json"
        code, _, _ = run(capsys, "specfun-table", "--stop", "0.2", "--step", "0.1",
                         "--format", "json", "--out", str(path))
        data = json.loads(path.read_text())
        assert code == 0 and len(data["rows"]) == 3 and data["rows"][0]["a_plus"] == 1

    def test_config_file_overridden_by_flags(self, capsys, files):
        cfg = files["dir"] / "cfg.json"
        cfg.write_text(json.dumps({"stop": 2.0, "step": 1.0}))
        _, out, _ = run(capsys, "specfun-table", "--config", str(cfg))
        assert len(out.splitlines()) == 4
        _, out, _ = run(capsys, "specfun-table", "--config", str(cfg), "--step", "0.5")
        assert len(out.splitlines()) == 6

    def test_bad_config(self, capsys, files):
        cfg = files["dir"] / "cfg.json"
        cfg.write_text(json.dumps({"nonsense": 1}))
        assert run(capsys, "specfun-table", "--config", str(cfg))[0] == 2
        assert run(capsys, "specfun-table", "--config", str(files["dir"] / "missing.json"))[0] == 2


class TestVerifyBall:
    def test_yukawa_passes(self, capsys):
        code, out, _ = run(capsys, "verify-ball", "--equation", "yukawa", "--mu", "1",
                           "--radius", "1", "--probes", "10")
        report = json.loads(out)
        assert code == 0 and report["passed"] is True

    def test_tiny_threshold_fails(self, capsys):
        code, out, _ = run(capsys, "verify-ball", "--threshold", "1e-15", "--probes", "10")
        assert code == 1 and json.loads(out)["passed"] is False

    def test_helmholtz_size_check(self, capsys):
        code, out, _ = run(capsys, "verify-ball", "--equation", "helmholtz", "--lambda", "1",
                           "--probes", "10")
        report = json.loads(out)
        assert code == 0 and report["size_check"]["satisfied"] is True

    def test_two_dimensional(self, capsys):
        code, out, _ = run(capsys, "verify-ball", "--m", "2", "--equation", "helmholtz")
        assert code == 0 and len(json.loads(out)["checks"]) == 2

    def test_bad_parameter(self, capsys):
        assert run(capsys, "verify-ball", "--mu", "-1")[0] == 2
        assert run(capsys, "verify-ball", "--n-radial", "2")[0] == 2


class TestScan:
    def test_ball(self, capsys, files):
        code, out, _ = run(capsys, "scan", files["ball"], "--probes", "20", "--out",
                           str(files["dir"] / "scan.json"))
        sups = [float(tok.split("=")[1]) for tok in out.split() if tok.startswith("sup=")]
        assert code == 0 and len(sups) == 2 and max(sups) < 1e-8

    def test_perturbed(self, capsys, files):
        code, out, _ = run(capsys, "scan", files["perturbed"], "--branch", "minus", "--probes", "20",
                           "--out", str(files["dir"] / "scan.json"))
        data = json.loads((files["dir"] / "scan.json").read_text())
        assert code == 0 and data["sup"] > 1e-4

    def test_probe_inside_exit_2(self, capsys, files):
        code, _, err = run(capsys, "scan", files["ball"], "--probe-point", "0.2,0,0")
        assert code == 2 and "inside" in err

    def test_csv(self, capsys, files):
        code, out, _ = run(capsys, "scan", files["ball"], "--probe-point", "3,0,0",
                           "--probe-point", "0,0,-2.5", "--format", "csv", "--branch", "plus")
        lines = [l for l in out.splitlines() if "," in l]
        assert code == 0 and lines[0] == "branch,x,y,z,re,im" and len(lines) == 3

    def test_malformed_domain_names_field(self, capsys, files):
        bad = files["dir"] / "bad.json"
        bad.write_text(json.dumps({"dim": 3, "center": [0, 0, 0], "rho0": "one", "coeffs": []}))
        code, _, err = run(capsys, "scan", str(bad))
        assert code == 2 and "rho0" in err
        bad.write_text("{not json")
        assert run(capsys, "scan", str(bad))[0] == 2
        assert run(capsys, "scan", str(files["dir"] / "missing.json"))[0] == 2

    def test_deterministic(self, capsys, files):
        a, b = files["dir"] / "a.json", files["dir"] / "b.json"
        for path in (a, b):
            run(capsys, "scan", files["perturbed"], "--probes", "8", "--out", str(path))
        assert a.read_bytes() == b.read_bytes()


class TestDefect:
    def test_ball_zero(self, capsys, files):
        code, out, _ = run(capsys, "defect", files["ball"])
        data = json.loads(out)
        assert code == 0
        for key in ("scalar_defect", "inner_excess", "outer_deficiency", "split_difference"):
            assert abs(data[key]) < 1e-10

    def test_yukawa_perturbed(self, capsys, files):
        code, out, _ = run(capsys, "defect", files["perturbed"], "--equation", "yukawa")
        data = json.loads(out)
        assert code == 0 and data["scalar_defect"] > 0
        assert data["verdict"] == "consistent with Theorem 2"

    def test_helmholtz_perturbed(self, capsys, files):
        code, out, _ = run(capsys, "defect", files["perturbed"], "--equation", "helmholtz")
        data = json.loads(out)
        assert code == 0 and data["scalar_defect"] < 0 and data["size_check"]["satisfied"]

    def test_helmholtz_outside_size_condition(self, capsys, files):
        code, out, _ = run(capsys, "defect", files["big"], "--equation", "helmholtz")
        assert code == 0 and "size condition violated" in json.loads(out)["verdict"]

    def test_laplace_rejected(self, capsys, files):
        assert run(capsys, "defect", files["ball"], "--equation", "laplace")[0] == 2


class TestRecover:
    def test_ball_converges_immediately(self, capsys, files):
        out_path = files["dir"] / "trace.json"
        code, out, _ = run(capsys, "recover", files["ball"], "--out", str(out_path))
        summary = out.strip().splitlines()[-1]
        assert code == 0 and summary.startswith("final_obj=")
        fields = dict(tok.split("=") for tok in summary.split())
        assert float(fields["max_coeff"]) < 1e-9 and int(fields["iters"]) <= 1
        trace = json.loads(out_path.read_text())
        assert set(trace["iterations"][0]) == {"obj", "coeffs"}

    def test_size_violation_warns_and_proceeds(self, capsys, files):
        code, out, err = run(capsys, "recover", files["big"], "--equation", "helmholtz",
                             "--max-iterations", "3", "--probes", "6",
                             "--out", str(files["dir"] / "t.json"))
        assert "size condition" in err
        assert code == 1 and "iters=3" in out
