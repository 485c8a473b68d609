"""Scenario parsing, type invariants, and topology helpers."""

import json

import pytest

from cellless_wpt import (
    AccessPoint,
    Device,
    Position,
    ScenarioError,
    Topology,
    load_scenario,
    scenario_from_dict,
)
from cellless_wpt.topology import (
    default_scenario_path,
    with_effective_power,
    with_uniform_antennas,
)


def make_ap(ap_id=1, x=0.0, y=0.0, antennas=2, budget=18.0, restriction=20.0):
    return AccessPoint(ap_id, Position(x, y), antennas, budget, restriction)


def make_device(dev_id=1, x=5.0, y=5.0, xi=0.5):
    return Device(dev_id, Position(x, y), xi, 4000.0, 5.0, 2058.0, 0.8, 50.0)


def test_position_rejects_non_finite():
    with pytest.raises(ValueError):
        Position(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Position(0.0, float("inf"))


def test_ap_requires_at_least_one_antenna():
    with pytest.raises(ValueError):
        make_ap(antennas=0)


def test_device_invariants():
    with pytest.raises(ValueError):
        make_device(xi=1.5)
    with pytest.raises(ValueError):
        Device(1, Position(0, 0), 0.5, 4000.0, 5.0, 2058.0, 0.0, 50.0)
    with pytest.raises(ValueError):
        Device(1, Position(0, 0), 0.5, -1.0, 5.0, 2058.0, 0.8, 50.0)
    with pytest.raises(ValueError):
        Device(1, Position(0, 0), 0.5, 4000.0, 5.0, -3.0, 0.8, 50.0)


def test_topology_rejects_duplicate_ids():
    with pytest.raises(ValueError, match="duplicate AP"):
        Topology(aps=(make_ap(1), make_ap(1, x=10.0)), devices=(make_device(),))
    with pytest.raises(ValueError, match="duplicate device"):
        Topology(aps=(make_ap(),), devices=(make_device(1), make_device(1, x=8.0)))


def test_topology_rejects_device_closer_than_reference():
    with pytest.raises(ValueError, match="reference distance"):
        Topology(aps=(make_ap(x=0.0, y=0.0),), devices=(make_device(x=0.5, y=0.0),))


def test_topology_sorts_by_id():
    topo = Topology(
        aps=(make_ap(2, x=10.0), make_ap(1, x=0.0)),
        devices=(make_device(7, x=5.0), make_device(3, x=4.0)),
    )
    assert topo.ap_ids == (1, 2)
    assert topo.device_ids == (3, 7)


def test_default_scenario_matches_reference_configuration(default_topology):
    assert len(default_topology.aps) == 3
    assert len(default_topology.devices) == 5
    assert default_topology.path_loss_exponent == 1.7
    assert default_topology.rician_k_db == 10.0
    for ap in default_topology.aps:
        assert ap.power_budget_dbm == 18.0
        assert ap.power_restriction_dbm == 20.0
        assert ap.effective_power_dbm == 18.0
    for dev in default_topology.devices:
        assert dev.conversion_efficiency == 0.5


def test_load_scenario_roundtrip(tmp_path):
    src = json.loads(default_scenario_path().read_text())
    path = tmp_path / "copy.json"
    path.write_text(json.dumps(src))
    topo = load_scenario(path)
    assert topo.ap_ids == (1, 2, 3)
    assert topo.device_ids == (1, 2, 3, 4, 5)


def test_scenario_unknown_top_level_key_is_named():
    data = json.loads(default_scenario_path().read_text())
    data["extra_stuff"] = 1
    with pytest.raises(ScenarioError, match="extra_stuff"):
        scenario_from_dict(data)


def test_scenario_unknown_ap_key_is_named():
    data = json.loads(default_scenario_path().read_text())
    data["aps"][0]["gain_dbi"] = 3.0
    with pytest.raises(ScenarioError, match="gain_dbi"):
        scenario_from_dict(data)


def test_scenario_missing_devices_key_is_named():
    data = json.loads(default_scenario_path().read_text())
    del data["devices"]
    with pytest.raises(ScenarioError, match="devices"):
        scenario_from_dict(data)


def test_scenario_invalid_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "aps": [,]\n}')
    with pytest.raises(ScenarioError, match="line 2"):
        load_scenario(path)


def test_scenario_channel_defaults_apply(tmp_path):
    data = json.loads(default_scenario_path().read_text())
    del data["channel"]
    topo = scenario_from_dict(data)
    assert topo.path_loss_exponent == 1.7
    assert topo.reference_distance_m == 1.0
    assert topo.rician_k_db == 10.0


def test_with_uniform_antennas(default_topology):
    topo = with_uniform_antennas(default_topology, 5)
    assert all(ap.antenna_count == 5 for ap in topo.aps)
    # original untouched
    assert all(ap.antenna_count == 3 for ap in default_topology.aps)


def test_with_effective_power(default_topology):
    topo = with_effective_power(default_topology, 15.0)
    for ap in topo.aps:
        assert ap.power_budget_dbm == 15.0
        assert ap.power_restriction_dbm == 15.0
        assert ap.effective_power_dbm == 15.0
