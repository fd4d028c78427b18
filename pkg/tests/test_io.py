import json

import numpy as np
import pytest

from hasimoto import CPN, Grid, SnapshotError
from hasimoto import geometry as G
from hasimoto import io
from hasimoto import mapping as M


def _fields(n, m=16):
    rng = np.random.default_rng(n)
    al, g = CPN(n), Grid(m)
    q = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    spin = G.random_spin(al, g, 1).t_field
    c = M.random_coords(n, g, seed=2)
    return g, {"q": q, "spin": spin, "map": al.kappa * spin, "curve": spin,
               "coords": (c.theta, c.big_theta)}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_snapshot_round_trip_is_bit_exact(tmp_path, n):
    g, fields = _fields(n)
    for kind, v in fields.items():
        path = io.write_snapshot(tmp_path / kind, v, g, 0.25, kind, n)
        back, g2, meta = io.read_snapshot(path)
        assert g2 == g and meta["kind"] == kind and meta["time"] == 0.25
        if kind == "coords":
            assert np.array_equal(back[0], v[0]) and np.array_equal(back[1], v[1])
        else:
            assert np.array_equal(back, v)


def test_snapshot_csv_is_reproducible(tmp_path):
    g, fields = _fields(2)
    a = io.write_snapshot(tmp_path / "a", fields["spin"], g, 0.0, "spin", 2)
    b = io.write_snapshot(tmp_path / "b", fields["spin"], g, 0.0, "spin", 2)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0].startswith("x,m00_re,m00_im,m01_re")


def test_snapshot_shape_mismatch(tmp_path):
    g = Grid(16)
    with pytest.raises(SnapshotError):
        io.write_snapshot(tmp_path / "x", np.zeros((16, 3)), g, 0.0, "q", 2)


def test_malformed_snapshots(tmp_path):
    g, fields = _fields(1)
    path = io.write_snapshot(tmp_path / "q", fields["q"], g, 0.0, "q", 1)
    text = path.read_text().splitlines()
    path.write_text("\n".join(text[:-1]) + "\n")
    with pytest.raises(SnapshotError):
        io.read_snapshot(path)
    path.write_text("\n".join(text[:-1] + [text[-1].replace(text[-1].split(",")[1], "abc")]) + "\n")
    with pytest.raises(SnapshotError):
        io.read_snapshot(path)
    side = path.with_suffix(".json")
    side.write_text("{not json")
    with pytest.raises(SnapshotError):
        io.read_snapshot(path)
    side.unlink()
    with pytest.raises(SnapshotError, match="sidecar"):
        io.read_snapshot(path)


def test_manifest_and_report(tmp_path):
    io.write_manifest(tmp_path / "manifest.txt", "dt = 0.1\n", {"tolerance": 1e-5})
    text = (tmp_path / "manifest.txt").read_text()
    assert io.content_hash("dt = 0.1\n") in text
    io.write_report(tmp_path / "r.json", {"x": np.float64(1.5), "a": np.arange(2)})
    assert json.loads((tmp_path / "r.json").read_text())["x"] == 1.5
