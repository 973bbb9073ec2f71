import io
import json
import subprocess
import sys

import numpy as np
import pytest

from clusterbound.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, main
from clusterbound.experiments import ANGLE_COLUMNS, RITZ_COLUMNS


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def custom_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text("n = 30\np = 2\ntop = 2.0, 1.7\neigenvalues = formula:linear,1,0\nk_max = 3\n")
    return str(path)


class TestExperiment:
    def test_stdout_both_panels(self, custom_cfg):
        code, text = run("experiment", "custom", "--config", custom_cfg, "--samples", "2")
        assert code == EXIT_OK
        assert ",".join(ANGLE_COLUMNS) in text and ",".join(RITZ_COLUMNS) in text

    def test_out_files(self, custom_cfg, tmp_path):
        path = tmp_path / "res.csv"
        code, _ = run("experiment", "custom", "--config", custom_cfg, "--samples", "2",
                      "--out", str(path))
        assert code == EXIT_OK
        assert path.read_text().startswith(",".join(ANGLE_COLUMNS))
        assert (tmp_path / "res_ritz.csv").read_text().startswith(",".join(RITZ_COLUMNS))

    def test_json(self, custom_cfg, tmp_path):
        path = tmp_path / "res.json"
        code, _ = run("experiment", "custom", "--config", custom_cfg, "--samples", "2",
                      "--format", "json", "--out", str(path), "--agg", "max", "--no-cap")
        assert code == EXIT_OK
        assert len(json.loads(path.read_text())["rows"]) == 3

    def test_options(self, custom_cfg):
        code, _ = run("experiment", "custom", "--config", custom_cfg, "--samples", "2",
                      "--ritz-denominator", "psi", "--cheby-params", "ritz", "--rhs", "eliminated",
                      "--tau", "2", "--i", "1", "--workers", "2")
        assert code == EXIT_OK

    def test_violation_exit(self, custom_cfg, monkeypatch, capsys):
        from clusterbound import bounds

        real = bounds.bound_lz_angles

        def broken(*args, **kwargs):
            rep = real(*args, **kwargs)
            c = rep.main
            rep.checks[0] = bounds._make(c.name, c.lhs + 1.0, c.rhs, c.kind, c.atol, 1e-8)
            return rep

        monkeypatch.setattr(bounds, "bound_lz_angles", broken)
        code, text = run("experiment", "custom", "--config", custom_cfg, "--samples", "1")
        assert code == EXIT_VIOLATION
        assert text.splitlines()[1].endswith(",1")
        assert "violation in sample 0" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["experiment", "custom"],
        ["experiment", "example1", "--config", "x.cfg"],
        ["experiment", "example1", "--samples", "0"],
        ["experiment", "example1", "--tau", "4"],
        ["experiment", "example1", "--seed", "-3"],
        ["experiment", "example1", "--format", "xml"],
        ["experiment", "example1", "--tol", "-1"],
        ["experiment", "example9"],
        ["frobnicate"],
    ])
    def test_config_errors(self, argv):
        with pytest.raises(SystemExit) as info:
            code = main(argv, out=io.StringIO())
            raise SystemExit(code)
        assert info.value.code == EXIT_CONFIG

    def test_no_prefix_matching(self):
        with pytest.raises(SystemExit) as info:
            main(["experiment", "example1", "--no"], out=io.StringIO())
        assert info.value.code == EXIT_CONFIG


class TestOtherCommands:
    def test_angles(self, tmp_path):
        u = tmp_path / "u.npy"
        v = tmp_path / "v.txt"
        np.save(u, np.array([[1.0], [0.0], [0.0]]))
        np.savetxt(v, np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
        code, text = run("angles", str(u), str(v))
        assert code == EXIT_OK
        row = text.splitlines()[1].split(",")
        assert float(row[1]) == pytest.approx(np.pi / 4)
        assert float(row[2]) == pytest.approx(1.0)
        assert float(row[3]) == pytest.approx(1.0)

    def test_angles_bad_input(self, tmp_path):
        u = tmp_path / "u.npy"
        np.save(u, np.ones((3, 2)))
        np.save(tmp_path / "v.npy", np.ones((4, 2)))
        assert run("angles", str(u), str(tmp_path / "v.npy"))[0] == EXIT_CONFIG
        assert run("angles", str(u), str(tmp_path / "missing.npy"))[0] == EXIT_CONFIG

    def test_bounds(self, custom_cfg):
        code, text = run("bounds", "custom", "--config", custom_cfg, "--k", "3")
        assert code == EXIT_OK
        assert text.count("applicable=") == 10
        assert "VIOLATED" not in text

    def test_bounds_bad_k(self, custom_cfg):
        assert run("bounds", "custom", "--config", custom_cfg, "--k", "0")[0] == EXIT_CONFIG

    def test_lanczos(self, custom_cfg):
        code, text = run("lanczos", "custom", "--config", custom_cfg, "--sample", "1")
        assert code == EXIT_OK
        lines = text.strip().splitlines()
        assert lines[0] == "k,dim,psi_1,psi_2,sum_tan_tau"
        assert [int(line.split(",")[1]) for line in lines[1:]] == [2, 4, 6]
        tans = [float(line.split(",")[-1]) for line in lines[1:]]
        assert tans == sorted(tans, reverse=True)


def test_module_entry_point(custom_cfg):
    res = subprocess.run([sys.executable, "-m", "clusterbound", "lanczos", "custom", "--config", custom_cfg],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("k,dim")
