import pytest

import defbond as db


@pytest.fixture(scope="session")
def market():
    return db.MarketParams(r=0.1, b=0.05, s_V=1.0)


@pytest.fixture(scope="session")
def schedule():
    return db.DefaultSchedule((0.0, 3.0, 6.0), (0.002, 0.005), (100.0, 100.0))


@pytest.fixture(scope="session")
def exo():
    return db.RecoveryModel("exogenous", 0.5)


@pytest.fixture(scope="session")
def endo_high_barrier():
    # n/R = 2 sits below both barriers
    return db.RecoveryModel("endogenous", 0.5, n=1.0)


@pytest.fixture(scope="session")
def endo_low_barrier():
    # n/R = 200 sits above both barriers
    return db.RecoveryModel("endogenous", 0.5, n=100.0)


@pytest.fixture()
def base_doc():
    return {
        "market": {"r": 0.1, "b": 0.05, "s_V": 1.0},
        "schedule": {
            "dates": [0.0, 3.0, 6.0],
            "intensities": [0.002, 0.005],
            "barriers": [100.0, 100.0],
        },
        "recovery": {"mode": "exogenous", "R": 0.5},
        "evaluation": {"x": 200.0, "t": 0.0},
    }
