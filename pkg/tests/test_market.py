import json

import pytest

from vaxprice.market import (
    DataError, DomainError, ManufacturerParams, ScenarioConfig, default_sweep_grid,
    load_grid, load_scenario,
)


def test_default_grid_size(grid):
    assert len(grid) == 1296
    assert len(grid) == 3 * 3 * 3 * 3 * 4 * 4


def test_default_grid_first_and_last(grid):
    first = grid[0]
    assert (first.total_demand, first.gamma) == (157.05, 0.25)
    assert [p.target_profit for p in first.params] == [25.7, 41.4]
    assert [p.unit_cost for p in first.params] == [0.0, 0.0]
    last = grid[-1]
    assert (last.total_demand, last.gamma) == (191.95, 0.75)
    assert [p.target_profit for p in last.params] == [2570.0, 2570.0]
    assert [p.unit_cost for p in last.params] == [31.96, 31.96]


def test_default_grid_ids_are_bijective_and_stable(grid):
    assert [s.scenario_id for s in grid] == list(range(1, 1297))
    assert default_sweep_grid() == grid


def test_default_grid_lexicographic_order(grid):
    # independent enumeration: nested loops, last factor fastest
    expected = []
    for D in (157.05, 174.5, 191.95):
        for g in (0.25, 0.5, 0.75):
            for ppf in (25.7, 234, 2570):
                for pmod in (41.4, 496, 2570):
                    for dpf in (0, 6.6, 23.44, 31.96):
                        for dmod in (0, 6.6, 23.44, 31.96):
                            expected.append((D, g, ppf, pmod, dpf, dmod))
    got = [(s.total_demand, s.gamma, s.params[0].target_profit, s.params[1].target_profit,
            s.params[0].unit_cost, s.params[1].unit_cost) for s in grid]
    assert got == expected


def test_default_grid_fixed_values(grid):
    for s in grid:
        assert (s.params[0].capacity, s.params[1].capacity) == (250.0, 200.0)
        assert (s.r_pub, s.mu, s.k) == (0.57, 0.9, 6)
        assert s.r_priv == pytest.approx(0.43)


@pytest.mark.parametrize("kwargs", [
    dict(total_demand=0.0, gamma=0.5),
    dict(total_demand=100.0, gamma=1.0),
    dict(total_demand=100.0, gamma=0.0),
    dict(total_demand=100.0, gamma=0.5, r_pub=1.0),
    dict(total_demand=100.0, gamma=0.5, mu=1.5),
    dict(total_demand=float("nan"), gamma=0.5),
])
def test_scenario_invariants(kwargs):
    params = (ManufacturerParams(250, 10, 0), ManufacturerParams(200, 10, 0))
    with pytest.raises(DomainError):
        ScenarioConfig(params=params, **kwargs)


@pytest.mark.parametrize("kwargs", [
    dict(capacity=0, target_profit=1, unit_cost=1),
    dict(capacity=1, target_profit=-1, unit_cost=1),
    dict(capacity=1, target_profit=1, unit_cost=-0.1),
])
def test_manufacturer_invariants(kwargs):
    with pytest.raises(DomainError):
        ManufacturerParams(**kwargs)


def test_scenario_json_roundtrip(tmp_path, grid):
    sc = grid[100]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(sc.to_json_dict()))
    back = load_scenario(path)
    assert back.params == sc.params
    assert (back.total_demand, back.gamma, back.k, back.r_pub, back.mu) == \
        (sc.total_demand, sc.gamma, sc.k, sc.r_pub, sc.mu)
    assert set(sc.to_json_dict()) == {"total_demand_millions", "gamma", "k", "r_pub", "mu",
                                      "manufacturers"}
    assert set(sc.to_json_dict()["manufacturers"][0]) == {
        "label", "capacity_millions", "target_profit_millions", "unit_cost_usd"}


def test_scenario_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DataError):
        load_scenario(bad)
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"gamma": 0.5, "manufacturers": []}))
    with pytest.raises(DataError):
        load_scenario(missing)
    with pytest.raises(DataError):
        load_scenario(tmp_path / "nope.json")


def test_load_grid(tmp_path, grid):
    path = tmp_path / "grid.json"
    path.write_text(json.dumps([s.to_json_dict() for s in grid[:3]]))
    loaded = load_grid(path)
    assert [s.scenario_id for s in loaded] == [1, 2, 3]
    assert [s.params for s in loaded] == [s.params for s in grid[:3]]
    path.write_text("[]")
    with pytest.raises(DataError):
        load_grid(path)


def test_swapped_scenario(grid):
    sc = grid[500]
    sw = sc.swapped()
    assert sw.params == (sc.params[1], sc.params[0])
    assert sw.labels == (sc.labels[1], sc.labels[0])
    assert sw.swapped() == sc
