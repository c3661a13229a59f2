import pytest

from vaxprice.demand import load_historical
from vaxprice.market import ManufacturerParams, ScenarioConfig, default_sweep_grid

# Published scenario table: (D, P_pf, d_pf, P_mod, d_mod) at gamma = 0.75, followed by
# p_priv, q_priv, (p_pub_pf, p_pub_mod), (q_pub_pf, q_pub_mod), (profit_pf, profit_mod).
TABLE3 = [
    ((174.5, 234.0, 31.96, 41.4, 31.96), 24.31, 55.6, (40.67, 53.66), (75.7, 23.8), (234.0, 90.2)),
    ((157.05, 234.0, 31.96, 41.4, 31.96), 24.31, 55.6, (40.35, 54.92), (78.6, 20.3), (234.0, 41.4)),
    ((174.5, 25.7, 23.44, 41.4, 31.96), 23.46, 53.6, (38.65, 47.15), (66.7, 32.7), (1015.9, 41.4)),
    ((174.5, 234.0, 23.44, 41.4, 31.96), 23.46, 53.6, (38.65, 47.15), (66.7, 32.7), (1015.9, 41.4)),
    ((157.05, 25.7, 31.96, 496.0, 23.44), 23.46, 53.6, (38.00, 53.86), (79.7, 16.3), (25.7, 496.0)),
]
# Realized profit printed in bold (strictly above target), per manufacturer.
TABLE3_BOLD = [(False, True), (False, False), (True, False), (True, False), (False, False)]


def make_scenario(D, P_pf, d_pf, P_mod, d_mod, gamma=0.75, sid=0):
    return ScenarioConfig(
        total_demand=D, gamma=gamma,
        params=(ManufacturerParams(250.0, P_pf, d_pf), ManufacturerParams(200.0, P_mod, d_mod)),
        scenario_id=sid,
    )


@pytest.fixture(scope="session")
def records():
    return load_historical()


@pytest.fixture(scope="session")
def grid():
    return default_sweep_grid()


@pytest.fixture(scope="session")
def table3_scenarios():
    return [make_scenario(*params, sid=n) for n, (params, *_) in enumerate(TABLE3, start=1)]


@pytest.fixture(scope="session")
def sweep_rows(grid, records):
    from vaxprice.sweep import run_sweep
    return run_sweep(grid, records, jobs=1)


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
