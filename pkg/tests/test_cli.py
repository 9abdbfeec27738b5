import subprocess
import sys

import pytest

from realent import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fiber_example(capsys):
    code, out, _ = run(capsys, "fiber", "--sigma1", "2", "--sigma2", "-8")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "mu,t"
    rows = sorted(tuple(round(float(v), 9) for v in ln.split(",")) for ln in lines[1:])
    assert rows == [(-2.0, -4.0), (4.0, 2.0)]


def test_eval_at_infinity(capsys):
    code, out, _ = run(capsys, "eval", "--mu", "2", "--t", "0", "--x", "inf")
    assert code == 0
    assert float(out) == 0.0


def test_entropy_command(capsys):
    code, out, _ = run(capsys, "entropy", "--mu", "-2", "--t", "-4")
    assert code == 0
    assert "status: converged" in out
    assert abs(float(out.split()[1]) - 0.6931471805599453) < 2e-3


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["entropy", "--mu", "1"],
        ["entropy", "--mu", "1", "--t", "-1"],
        ["entropy", "--mu", "nan", "--t", "1"],
        ["sweep", "--res", "0x4"],
        ["--threads", "0", "fiber", "--sigma1", "1", "--sigma2", "1"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_io_failure_exits_1(capsys, tmp_path):
    out = tmp_path / "missing" / "f.csv"
    code, _, err = run(capsys, "--out", str(out), "fiber", "--sigma1", "2", "--sigma2", "-8")
    assert code == 1
    assert "failed" in err


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small sweep\nres = 6x4\ndomain = rect:-3,-0.5,-5,-2\ndepth = 128\n")
    prefix = tmp_path / "s"
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--res", "5x3", "--out", str(prefix))
    assert code == 0
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert len(lines) == 1 + 15
    assert (tmp_path / "s.ppm").read_bytes().startswith(b"P6\n5 3\n255\n")


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert run(capsys, "fiber", "--config", str(cfg), "--sigma1", "1", "--sigma2", "1")[0] == 2


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("REALENT_THREADS", "3")
    args = cli.build_parser().parse_args(["fiber", "--sigma1", "1", "--sigma2", "1"])
    assert args.threads == 3


def test_sweep_connectivity_pipeline(capsys, tmp_path):
    prefix = tmp_path / "p"
    assert run(capsys, "sweep", "--domain", "rect:-3,-0.5,-5,-2", "--res", "8x6", "--depth", "128", "--out", str(prefix))[0] == 0
    code, out, _ = run(capsys, "connectivity", "--input", f"{prefix}.csv", "--band", "6")
    assert code == 0
    assert '"components"' in out
    code, _, err = run(capsys, "project", "--input", f"{prefix}.csv", "--out", str(tmp_path / "proj.csv"))
    assert code == 0
    assert (tmp_path / "proj.csv").read_text().startswith("sigma1,sigma2,band")


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "realent", "fiber", "--sigma1", "2", "--sigma2", "-8"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("mu,t")


def test_period_palette():
    import numpy as np

    img = cli.period_image(np.array([[0, 1, 2, 13]]))
    assert img[0].tolist() == [[0, 0, 0], [255, 140, 0], [255, 255, 0], [255, 140, 0]]
