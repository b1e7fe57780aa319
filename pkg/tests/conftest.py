import json
from pathlib import Path

import pytest

from meixner_cliquet import CliquetContract, GeometricMeixnerModel, MeixnerParams

ORACLES = json.loads((Path(__file__).parent / "data" / "oracles.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture(scope="session")
def canon_params():
    return MeixnerParams(0.3, -0.5, 0.5, 0.0)


@pytest.fixture(scope="session")
def canon_model(canon_params):
    return GeometricMeixnerModel(100.0, 0.03, canon_params)


@pytest.fixture(scope="session")
def canon_contract():
    return CliquetContract(1.0, 0.02, 0.08, 12, 1.0)


@pytest.fixture(scope="session")
def canon_table(canon_model, canon_contract):
    # the cached table that the Monte Carlo pricers also use
    from meixner_cliquet.market import period_law
    from meixner_cliquet.montecarlo import _table

    return _table(period_law(canon_model, canon_contract.tau), 4096)


@pytest.fixture(scope="session")
def price_grid(canon_model):
    """Both prices for every contract of the cap x guarantee grid, computed once."""
    from meixner_cliquet import price_distribution_method, price_fourier_method

    out = {}
    for c in (0.0, 0.04, 0.08, 0.16):
        for g in (0.0, 0.02, 0.05):
            k = CliquetContract(1.0, g, c, 12, 1.0)
            out[(c, g)] = (price_distribution_method(canon_model, k), price_fourier_method(canon_model, k))
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import SUMMARY
    except ImportError:
        return
    if SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in SUMMARY:
            terminalreporter.write_line(line)
