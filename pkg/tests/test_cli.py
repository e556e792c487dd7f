import json
import math

import pytest

from rupert.cli import CliError, main, parse_angle, parse_point, parse_poly


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_angles(self):
        assert parse_angle("pi/64") == pytest.approx(math.pi / 64, rel=1e-16)
        assert parse_angle("2pi") == pytest.approx(2 * math.pi, rel=1e-16)
        assert parse_angle("0.5pi") == pytest.approx(math.pi / 2, rel=1e-16)
        assert parse_angle("-pi/2") == pytest.approx(-math.pi / 2, rel=1e-16)
        assert parse_angle("1.25") == 1.25
        assert parse_angle("pi") == pytest.approx(math.pi)
        with pytest.raises(CliError):
            parse_angle("one")

    def test_point(self):
        p = parse_point("0,pi/2,pi,0,2pi")
        assert p.theta == pytest.approx(math.pi / 2)
        with pytest.raises(CliError):
            parse_point("1,2,3")

    def test_poly_specs(self, tmp_path):
        assert parse_poly("cube").label == "cube"
        assert parse_poly("stellated:0.55").label == "stellated:0.55"
        path = tmp_path / "tetra.txt"
        path.write_text("1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n")
        assert len(parse_poly(f"file:{path}").vertices) == 4
        with pytest.raises(CliError):
            parse_poly("dodecahedron")
        with pytest.raises(CliError):
            parse_poly("stellated:2.0")
        with pytest.raises(CliError):
            parse_poly("file:/nonexistent/path.txt")


class TestCertifyCommand:
    def test_identical_orientations_exit_2(self, capsys):
        code, out, _ = run_cli(capsys, "certify", "--poly", "stellated:0.55", "--point", "0,0,0,0,0")
        assert code == 2
        assert json.loads(out)["outcome"]["kind"] == "exhausted"

    def test_ruled_out_exit_0(self, capsys):
        point = "2.544276222803882,1.2311879446028435,0.9528850319898517,0.7486367449441562,3.6654974587763136"
        code, out, _ = run_cli(capsys, "certify", "--poly", "stellated:0.55", "--point", point)
        assert code == 0
        payload = json.loads(out)
        assert payload["outcome"]["kind"] == "ruled_out"
        assert payload["outcome"]["delta_success"] == 0.06553600000000002

    def test_cube_passage_exit_3(self, capsys):
        point = "5.854964342734726,0.4310449857668787,3.141592643015719,0.7940957336929387,1.9044655988489638"
        code, out, _ = run_cli(capsys, "certify", "--poly", "cube", "--point", point)
        assert code == 3
        assert json.loads(out)["outcome"]["passage_scale"] > 1.05

    def test_bad_arguments_exit_1(self, capsys):
        code, _, _ = run_cli(capsys, "certify", "--poly", "nope", "--point", "0,0,0,0,0")
        assert code == 1
        code, _, _ = run_cli(capsys, "certify", "--poly", "cube", "--point", "0,0")
        assert code == 1
        code, _, _ = run_cli(capsys, "certify", "--poly", "cube")
        assert code == 1


class TestSearchCommand:
    def test_trivial_search_exit_0(self, capsys, tmp_path):
        out_path = str(tmp_path / "r.jsonl")
        code, out, _ = run_cli(
            capsys, "search", "--poly", "stellated:0.55", "--min-side", "1.6", "--out", out_path
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["report"]["coverage_percent"] == 0.0
        assert payload["report"]["complete"] is True
        assert (tmp_path / "r.jsonl.manifest.json").exists()

    def test_report_reproduces_search_report(self, capsys, tmp_path):
        out_path = str(tmp_path / "r.jsonl")
        code, search_out, _ = run_cli(
            capsys, "search", "--poly", "stellated:0.55", "--min-side", "1.0", "--out", out_path
        )
        assert code == 0
        search_report = json.loads(search_out)["report"]
        code, report_out, _ = run_cli(capsys, "report", "--in", out_path)
        assert code == 0
        file_report = json.loads(report_out)["report"]
        search_report.pop("wall_time")
        file_report.pop("wall_time")
        assert file_report == search_report

    def test_cube_search_exit_3(self, capsys, tmp_path):
        out_path = str(tmp_path / "cube.jsonl")
        code, out, _ = run_cli(
            capsys,
            "search", "--poly", "cube", "--min-side", "pi/8",
            "--max-checks", "1800", "--out", out_path,
        )
        assert code == 3
        assert json.loads(out)["report"]["invalid_count"] >= 1

    def test_resume_matches_uninterrupted(self, capsys, tmp_path):
        out_a = str(tmp_path / "a.jsonl")
        code, full_out, _ = run_cli(
            capsys, "search", "--poly", "stellated:0.55", "--min-side", "1.0", "--out", out_a
        )
        assert code == 0
        out_b = str(tmp_path / "b.jsonl")
        ckpt = str(tmp_path / "b.ckpt")
        code, _, _ = run_cli(
            capsys,
            "search", "--poly", "stellated:0.55", "--min-side", "1.0",
            "--out", out_b, "--checkpoint", ckpt, "--max-checks", "11",
        )
        assert code == 0
        code, resumed_out, _ = run_cli(
            capsys,
            "search", "--poly", "stellated:0.55", "--min-side", "1.0",
            "--out", out_b, "--checkpoint", ckpt, "--resume", ckpt,
        )
        assert code == 0
        assert open(out_a, "rb").read() == open(out_b, "rb").read()
        a = json.loads(full_out)["report"]
        b = json.loads(resumed_out)["report"]
        a.pop("wall_time"), b.pop("wall_time")
        assert a == b

    def test_corrupt_resume_exit_4(self, capsys, tmp_path):
        ckpt = tmp_path / "bad.ckpt"
        ckpt.write_text("garbage{")
        code, _, err = run_cli(
            capsys,
            "search", "--poly", "stellated:0.55", "--min-side", "1.0",
            "--resume", str(ckpt),
        )
        assert code == 4
        assert "checkpoint" in err


class TestReportCommand:
    def test_empty_file_warns(self, capsys, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        code, out, err = run_cli(capsys, "report", "--in", str(path))
        assert code == 0
        assert "no box records" in err
        assert json.loads(out)["report"]["coverage_percent"] == 0.0

    def test_duplicate_record_exit_1(self, capsys, tmp_path):
        src = tmp_path / "r.jsonl"
        run_cli(capsys, "search", "--poly", "stellated:0.55", "--min-side", "1.6", "--out", str(src))
        lines = src.read_text().splitlines()
        lines.append(lines[0])
        src.write_text("\n".join(lines) + "\n")
        code, _, err = run_cli(capsys, "report", "--in", str(src))
        assert code == 1
        assert "duplicate" in err

    def test_malformed_record_exit_1(self, capsys, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text('{"center":[0,0,0],"side":1.0,"status":"small"}\n')
        code, _, err = run_cli(capsys, "report", "--in", str(path))
        assert code == 1
        assert "malformed" in err

    def test_bad_side_exit_1(self, capsys, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text(
            '{"center":[0,0,0,0,0],"side":0.7,"status":"small","delta_success":null,"passage_scale":null}\n'
        )
        code, _, err = run_cli(capsys, "report", "--in", str(path))
        assert code == 1
        assert "grid" in err

    def test_csv_output(self, capsys, tmp_path):
        src = tmp_path / "r.jsonl"
        run_cli(capsys, "search", "--poly", "stellated:0.55", "--min-side", "1.6", "--out", str(src))
        csv_path = tmp_path / "cov.csv"
        code, _, _ = run_cli(capsys, "report", "--in", str(src), "--csv", str(csv_path))
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "depth,side,ruled_out,small,invalid,ruled_out_volume"
        assert lines[1].startswith("0,")


class TestPassageCommand:
    def test_passage_json(self, capsys):
        code, out, _ = run_cli(capsys, "passage", "--poly", "cube", "--budget", "2000", "--seed", "0")
        assert code == 0
        payload = json.loads(out)
        assert "scale" in payload["candidate"]
        assert payload["candidate"]["scale"] > 0


class TestSweepCommand:
    def test_sweep_csv(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run_cli(
            capsys,
            "sweep", "--from", "0.54", "--to", "0.56", "--step", "0.02",
            "--budget", "500", "--out", str(out_path),
        )
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "a,best_scale,alpha,theta,phi,theta_p,phi_p"
        assert len(lines) == 3
        assert (tmp_path / "sweep.csv.manifest.json").exists()
