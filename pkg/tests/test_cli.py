import json

import numpy as np
import pytest

from hasimoto import CPN, Grid, io
from hasimoto import transform as T
from hasimoto.cli import main
from hasimoto.hierarchy import plane_wave


def run(tmp_path, cmd, text, *extra, name="run"):
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(text)
    out = tmp_path / name
    return main([cmd, "--config", str(cfg), "--out", str(out), *extra]), out


def test_verify_default_passes(tmp_path, capsys):
    code, out = run(tmp_path, "verify", "verify.samples = 200\n")
    text = capsys.readouterr().out
    assert code == 0
    assert text.count("identities") == 3
    assert "[N=1]" in text and "[N=3]" in text
    rep = json.loads((out / "report.json").read_text())
    assert rep["passed"] and len(rep["sections"][0]["checks"]) >= 12
    assert (out / "manifest.txt").exists()


def test_verify_detects_corruption(tmp_path, capsys):
    code, _ = run(tmp_path, "verify", "verify.ns = 2\nverify.samples = 100\nverify.corrupt = 0,1,2,1e-6\n")
    text = capsys.readouterr().out
    assert code == 1
    assert "identity failure for N=2" in text and "jacobi" in text


def test_bad_config_exits_2(tmp_path, capsys):
    code, _ = run(tmp_path, "evolve", "dt = 0.1\nwhat = 1\n")
    assert code == 2
    assert "line 2" in capsys.readouterr().err


def test_plane_wave_evolution(tmp_path, capsys):
    text = ("algebra.n = 2\ngrid.points = 32\ninitial.kind = plane_wave\ninitial.a = 0.5\n"
            "initial.k = 1\ndt = 1e-3\nt_final = 0.1\n")
    code, out = run(tmp_path, "evolve", text)
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["plane_wave_error"] < 1e-8
    assert rep["drift"]["H1"] < 1e-12


def test_t_final_zero_writes_initial_snapshot_only(tmp_path):
    code, out = run(tmp_path, "evolve", "grid.points = 16\nt_final = 0\nsnapshot_every = 1\n")
    assert code == 0
    snaps = sorted((out / "snapshots").glob("*.csv"))
    assert [p.name for p in snaps] == ["snap_00000.csv"]
    assert len((out / "diagnostics.csv").read_text().splitlines()) == 2


def test_evolve_is_bit_reproducible(tmp_path):
    text = "algebra.n = 2\ngrid.points = 32\nflow = heisenberg\ndt = 1e-3\nt_final = 0.02\ndiagnostics_every = 5\n"
    code1, a = run(tmp_path, "evolve", text, name="a")
    code2, b = run(tmp_path, "evolve", text, name="b")
    assert code1 == code2 == 0
    assert (a / "diagnostics.csv").read_bytes() == (b / "diagnostics.csv").read_bytes()
    for pa in (a / "snapshots").glob("*.csv"):
        assert pa.read_bytes() == (b / "snapshots" / pa.name).read_bytes()


def test_blow_up_exits_3(tmp_path, capsys):
    text = ("grid.points = 64\nintegrator = rk4\ndealias = false\ninitial.amplitude = 50\n"
            "initial.kmax = 20\ndt = 0.05\nt_final = 5\n")
    code, out = run(tmp_path, "evolve", text)
    assert code == 3
    assert (out / "diagnostics.csv").exists()


def test_coordinate_singularity_exits_4(tmp_path, capsys):
    code, _ = run(tmp_path, "evolve", "flow = coord_map\ninitial.kind = map_coords\nt_final = 0.01\n")
    assert code == 4
    assert "theta" in capsys.readouterr().err


def test_compare_zero_and_strict(tmp_path, capsys):
    base = "grid.points = 32\nt_final = 0.05\ndt = 2e-3\ncompare.refine = false\n"
    code, _ = run(tmp_path, "compare", base + "compare.zero = true\n", name="zero")
    assert code == 0
    code, _ = run(tmp_path, "compare", base + "tolerance = 1e-16\n", name="strict")
    assert code == 1
    assert "FAIL" in capsys.readouterr().out


def _hrow(capsys, path):
    assert main(["hamiltonians", str(path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    return lines[0].split(","), lines[1].split(",")


def test_hamiltonians_of_zero_and_plane_wave(tmp_path, capsys):
    al, g = CPN(2), Grid(32)
    p = io.write_snapshot(tmp_path / "z", np.zeros((32, 2), complex), g, 0.0, "q", 2)
    head, row = _hrow(capsys, p)
    assert head[:5] == ["kind", "H1", "H2", "H3", "H4"]
    assert all(float(v) == 0 for v in row[1:5])
    pw = plane_wave(al, g, 0.5, 2)
    p = io.write_snapshot(tmp_path / "pw", pw.q, g, 0.0, "q", 2)
    _, row = _hrow(capsys, p)
    # H1 = 1/2 int <q, q> = 1/2 * 4(N+1) * |a|^2 * L
    assert float(row[1]) == pytest.approx(0.5 * 12 * 0.25 * 2 * np.pi, rel=1e-12)


def test_hamiltonians_agree_across_snapshot_kinds(tmp_path, capsys):
    ec = T.EquivalenceConfig(n=2, m_points=128)
    al = CPN(2)
    q = T.hasimoto_from_map(T.reference_coords(ec), al)
    spin = T.spin_from_q(q)
    pq = io.write_snapshot(tmp_path / "q", q.q, q.grid, 0.0, "q", 2)
    ps = io.write_snapshot(tmp_path / "s", spin.t_field, q.grid, 0.0, "spin", 2)
    pm = io.write_snapshot(tmp_path / "m", al.kappa * spin.t_field, q.grid, 0.0, "map", 2)
    _, rq = _hrow(capsys, pq)
    for p in (ps, pm):
        _, r = _hrow(capsys, p)
        for j in range(1, 5):
            assert float(r[j]) == pytest.approx(float(rq[j]), abs=1e-6)


def test_malformed_snapshot_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("x,q1_re\n0,1\n")
    assert main(["hamiltonians", str(p)]) == 2
