import pytest

from hasimoto import ConfigError
from hasimoto.config import load_config


def test_defaults_and_echo_round_trip():
    cfg = load_config("algebra.n = 2\nflow = mkdv  # third order\ndt = 1e-4\n")
    assert cfg["algebra.n"] == 2 and cfg.flow_family == "q" and cfg.hierarchy_index == 3
    again = load_config(cfg.echo())
    assert again.values == cfg.values


@pytest.mark.parametrize("text,line,key", [
    ("dt = 0.1\nbogus = 3\n", 2, "bogus"),
    ("dt = 0.1\ndt = 0.2\n", 2, "dt"),
    ("\n\ngrid.points = 100\n", 3, "grid.points"),
    ("dt = fast\n", 1, "dt"),
    ("dt = -1\n", 1, "dt"),
    ("flow = kdv\n", 1, "flow"),
    ("flow = coord_map\ninitial.kind = random_band\n", 2, "initial.kind"),
    ("flow = heisenberg\ninitial.kind = plane_wave\n", 2, "initial.kind"),
    ("algebra.n = 2\ninitial.kind = plane_wave\ninitial.direction = 5\n", 3, "initial.direction"),
    ("verify.corrupt = 1,2\n", 1, "verify.corrupt"),
])
def test_errors_carry_line_and_key(text, line, key):
    with pytest.raises(ConfigError) as err:
        load_config(text)
    assert err.value.line == line and err.value.key == key
    assert f"line {line}" in str(err.value)


def test_missing_equals_sign():
    with pytest.raises(ConfigError) as err:
        load_config("# header\ndt 0.1\n")
    assert err.value.line == 2


def test_hierarchy_flows_and_families():
    assert load_config("flow = hierarchy(5)\n").hierarchy_index == 5
    assert load_config("flow = vfe_axial\n").flow_family == "curve"
    assert load_config("flow = coord_map\ninitial.kind = map_coords\n").flow_family == "map"
    with pytest.raises(ConfigError):
        load_config("flow = hierarchy(0)\n")


def test_overrides_win_and_corruption_parses():
    cfg = load_config("seed = 1\nverify.corrupt = 0,1,2,1e-4\n", {"seed": 7})
    assert cfg["seed"] == 7
    assert cfg["verify.corrupt"] == (0, 1, 2, 1e-4)
