import csv
import io
import math

import pytest

from stokesdiff.cli import main


def run(args):
    buf = io.StringIO()
    code = main(args, out=buf)
    return code, buf.getvalue()


@pytest.fixture
def files(tmp_path):
    def make(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return make


def test_check_mild_codes(files, tmp_path):
    assert run(["check-mild", files("b.dsys", "A = [[1 + 0.5*t]]")])[0] == 0
    code, out = run(["check-mild", files("t.dsys", "A = [[t]]")])
    assert code == 2 and "A(0) singular" in out
    assert run(["check-mild", files("bad.dsys", "A = [[1+t,]")])[0] == 1
    assert run(["check-mild", str(tmp_path / "missing.dsys")])[0] == 1


def test_formal_output(files):
    code, out = run(["formal", files("d.dsys", "A = [[2*(1+t), 0], [0, 1+t/2]]")])
    assert code == 0
    assert "(0.6931471805599453*s, G=[[-1.0]])" in out and "(0, G=[[-0.5]])" in out
    assert run(["formal", files("u.dsys", "A = [[1, t], [t, 1]]")])[0] == 3


def test_directions_csv(files, tmp_path):
    code, out = run(["directions", files("p.dsys", "A = [[1, 0], [0, exp(-(1+1i))]]"), "--outdir", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "p_directions.csv")))
    sig = sorted(float(r["sigma"]) for r in rows if r["kind"] == "stokes")
    assert sig == pytest.approx([-3 * math.pi / 4, math.pi / 4])


def test_solve_and_precedence(files, tmp_path, monkeypatch):
    monkeypatch.setenv("STOKESDIFF_OUTDIR", str(tmp_path / "env"))
    path = files("b.dsys", "param smin = 12\nparam n = 9\nA = [[1 + 0.5*t]]")
    code, out = run(["solve", path, "--n", "11"])
    assert code == 0
    assert "# n = 11 (flag)" in out and "# smin = 12.0 (file)" in out and "(env)" in out
    rows = list(csv.reader(open(tmp_path / "env" / "b_theta+0.0000.csv")))
    assert rows[0] == ["re_s", "im_s", "re_y0", "im_y0"] and len(rows) == 12


def test_solve_is_deterministic(files, tmp_path):
    path = files("b.dsys", "A = [[1 + 0.5*t]]")
    for d in ("x", "y"):
        run(["solve", path, "--theta", "0.3", "--outdir", str(tmp_path / d)])
    name = "b_theta+0.3000.csv"
    assert (tmp_path / "x" / name).read_text() == (tmp_path / "y" / name).read_text()


def test_solve_on_stokes_line_warns(files, tmp_path):
    path = files("p.dsys", "A = [[1, 0], [0, exp(-1)]]")
    with pytest.warns(UserWarning):
        code, out = run(["solve", path, "--theta", str(-math.pi / 2), "--outdir", str(tmp_path)])
    assert "warning" in out


def test_cocycle(files, tmp_path):
    code, out = run(["cocycle", files("b.dsys", "A = [[1 + 0.5*t]]"), "--outdir", str(tmp_path)])
    assert code == 0 and "rapid" in out and (tmp_path / "b.stokes").exists()


def test_verify():
    assert run(["verify", "gamma", "--alpha", "0.5"])[0] == 0
    assert run(["verify", "gamma", "--alpha", "0.3+0.2i"])[0] == 0
    assert run(["verify", "egamma"])[0] == 0
    code, out = run(["verify", "lambda", "--direction", "0.3"])
    assert code == 0 and out.strip().endswith("pass")


def test_plot_data(files, tmp_path):
    path = files("b.dsys", "A = [[1 + 0.5*t]]")
    code, out = run(["plot-data", path, "--theta", "0", "--theta", "0.5", "--outdir", str(tmp_path)])
    assert code == 0
    gp = (tmp_path / "b_plot.gp").read_text()
    assert "b_plot_theta+0.0000.csv" in gp and "b_plot_theta+0.5000.csv" in gp


def test_invalid_config(files):
    assert run(["solve", files("b.dsys", "A = [[1 + 0.5*t]]"), "--smin", "-1"])[0] == 1
