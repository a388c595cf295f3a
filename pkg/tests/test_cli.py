import os
import subprocess
import sys

import numpy as np
import pytest

from levelset_topopt import cli
from levelset_topopt.cases import grid_coordinates
from levelset_topopt.optimizer import IterationRecord, RunHistory


def read_lines(path):
    with open(path) as f:
        return f.read().splitlines()


class TestRunDirectory:
    def test_naming(self):
        assert cli.run_directory("out", "cantilever", 40.0, 150) == os.path.join("out", "cantilever", "LagVol=40_Nx=150")
        # the multiplier is truncated like np.int_
        assert cli.run_directory(".", "inverter", 0.01, 121).endswith("LagVol=0_Nx=121")


class TestRender:
    def test_all_material(self, tmp_path):
        path = tmp_path / "a.pgm"
        cli.render_design(-np.ones((3, 5)), path, 2.0, 1.0)
        img = cli.read_pgm(path)
        assert img.shape == (4 * 2, 4 * 4)
        assert not img.any()

    def test_all_void(self, tmp_path):
        path = tmp_path / "b.pgm"
        cli.render_design(np.ones((3, 5)), path, 2.0, 1.0)
        assert np.all(cli.read_pgm(path) == 255)

    def test_half_plane(self, tmp_path):
        X, _ = grid_coordinates(2.0, 1.0, 10, 5)
        path = tmp_path / "c.pgm"
        cli.render_design(X - 1.0, path, 2.0, 1.0)
        img = cli.read_pgm(path)
        assert img.shape == (20, 40)
        assert np.all(img[:, :20] == 0) and np.all(img[:, 20:] == 255)

    def test_row_zero_is_top(self):
        _, Y = grid_coordinates(1.0, 1.0, 4, 4)
        # material in the upper half
        img = cli.rasterize(0.5 - Y, 1.0, 1.0)
        assert np.all(img[0] == 0) and np.all(img[-1] == 255)

    def test_header(self, tmp_path):
        path = tmp_path / "d.pgm"
        cli.render_design(np.ones((2, 2)), path, 1.0, 1.0, supersample=3)
        with open(path, "rb") as f:
            assert f.read().startswith(b"P5\n3 3\n255\n")

    def test_not_pgm(self, tmp_path):
        p = tmp_path / "x.pgm"
        p.write_bytes(b"P2\n1 1\n255\n0")
        with pytest.raises(ValueError):
            cli.read_pgm(p)

    def test_bilinear_exact_for_affine(self):
        X, Y = grid_coordinates(3.0, 1.0, 6, 2)
        phi = 2 * X - Y + 1
        x = np.array([0.1, 1.3, 2.99])
        y = np.array([0.05, 0.5, 0.97])
        np.testing.assert_allclose(cli.bilinear(phi, 3.0, 1.0, x, y), 2 * x - y + 1, atol=1e-14)


class TestHistory:
    def history(self, n):
        h = RunHistory()
        for k in range(n):
            h.append(IterationRecord(k, 1.0 / (k + 3), 0.1 * k, 0.7, 0.35, 0.5 + 0.01 * k, k % 4))
        return h

    def test_single_row(self, tmp_path):
        p = tmp_path / "h.csv"
        cli.write_history(self.history(1), p)
        lines = read_lines(p)
        assert lines[0] == "iter,J,objective,volume,volume_fraction,beta,ls"
        assert len(lines) == 2

    def test_round_trip(self, tmp_path):
        p = tmp_path / "h.csv"
        h = self.history(7)
        cli.write_history(h, p)
        back = cli.read_history(p)
        for a, b in zip(h.records, back.records):
            assert a.iteration == b.iteration and a.ls == b.ls
            for name in ("J", "objective", "volume", "volume_fraction", "beta"):
                assert getattr(b, name) == float(f"{getattr(a, name):.12g}")

    def test_empty(self, tmp_path):
        with pytest.raises(ValueError):
            cli.write_history(RunHistory(), tmp_path / "h.csv")


class TestMain:
    def test_unknown_case(self, capsys):
        assert cli.main(["foo", "--out", "unused"]) == cli.EXIT_USAGE
        assert "valid names" in capsys.readouterr().err

    def test_non_square(self, tmp_path, capsys):
        assert cli.main(["cantilever", "--nx", "10", "--ny", "10", "--out", str(tmp_path)]) == cli.EXIT_USAGE
        assert not any(tmp_path.iterdir())

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["cantilever", "--nx", "many"])
        assert exc.value.code == cli.EXIT_USAGE

    def test_bad_max_iters(self, tmp_path):
        assert cli.main(["cantilever", "--max-iters", "0", "--out", str(tmp_path)]) == cli.EXIT_USAGE

    def test_short_run(self, tmp_path, capsys):
        code = cli.main(["cantilever", "--nx", "62", "--ny", "31", "--max-iters", "3", "--out", str(tmp_path)])
        assert code == cli.EXIT_OK
        rd = tmp_path / "cantilever" / "LagVol=40_Nx=62"
        assert len(read_lines(rd / "history.csv")) == 4
        assert cli.read_pgm(rd / "design.pgm").shape == (4 * 31, 4 * 62)
        assert "cantilever" in capsys.readouterr().out

    def test_ny_follows_nx(self, tmp_path):
        assert cli.main(["MBB_beam", "--nx", "30", "--max-iters", "1", "--out", str(tmp_path)]) == 0
        assert cli.read_pgm(tmp_path / "MBB_beam" / "LagVol=130_Nx=30" / "design.pgm").shape == (40, 120)

    def test_lambda_override(self, tmp_path):
        assert cli.main(["cantilever", "--nx", "20", "--lambda", "55", "--max-iters", "1", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "cantilever" / "LagVol=55_Nx=20" / "history.csv").exists()

    def test_seed_figures(self, tmp_path):
        args = ["cantilever", "--nx", "20", "--max-iters", "11", "--seed-figures", "--out", str(tmp_path)]
        assert cli.main(args) == 0
        rd = tmp_path / "cantilever" / "LagVol=40_Nx=20"
        assert sorted(p.name for p in rd.glob("it_*.pgm")) == ["it_1.pgm", "it_10.pgm", "it_11.pgm"]

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert cli.main(["cantilever", "--nx", "20", "--max-iters", "1", "--out", str(blocker)]) == cli.EXIT_RUNTIME

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "levelset_topopt", "--help"], capture_output=True, text=True)
        assert out.returncode == 0 and "--seed-figures" in out.stdout
