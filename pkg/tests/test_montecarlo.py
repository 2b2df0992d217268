import math

import pytest

import defbond as db
from defbond.errors import DomainError


def test_config_validation():
    with pytest.raises(DomainError):
        db.SimConfig(n_paths=0)
    with pytest.raises(DomainError):
        db.SimConfig(n_paths=10001, antithetic=True)
    db.SimConfig(n_paths=10001, antithetic=False)


def test_no_default_channels_is_exact(market):
    schedule = db.DefaultSchedule((0.0, 3.0, 6.0), (0.0, 0.0), (1e-12, 1e-12))
    rec = db.RecoveryModel("exogenous", 0.5)
    df = math.exp(-market.r * 6.0)
    res = db.simulate_price(market, schedule, rec, 200.0 * df, db.SimConfig(n_paths=4000, seed=1))
    assert res.price_estimate == df
    assert res.std_error == 0.0
    assert res.survival_freq == 1.0


def test_full_exogenous_recovery_is_exact(market, schedule):
    rec = db.RecoveryModel("exogenous", 1.0)
    df = math.exp(-market.r * 6.0)
    res = db.simulate_price(market, schedule, rec, 150.0 * df, db.SimConfig(n_paths=4000, seed=2))
    assert res.price_estimate == df
    assert res.std_error == 0.0
    assert res.survival_freq < 1.0  # defaults occur, they just pay face


def test_seed_determinism(market, schedule, exo):
    cfg = db.SimConfig(n_paths=20000, seed=123)
    a = db.simulate_price(market, schedule, exo, 100.0, cfg)
    b = db.simulate_price(market, schedule, exo, 100.0, cfg)
    assert a == b
    c = db.simulate_price(market, schedule, exo, 100.0, db.SimConfig(n_paths=20000, seed=124))
    assert c.price_estimate != a.price_estimate


def test_block_boundary_continuity(market, schedule, exo):
    # path counts straddling the block size produce consistent estimates
    df = math.exp(-market.r * 6.0)
    small = db.simulate_price(
        market, schedule, exo, 200.0 * df, db.SimConfig(n_paths=2**16, seed=9)
    )
    big = db.simulate_price(
        market, schedule, exo, 200.0 * df, db.SimConfig(n_paths=2**16 + 2**14, seed=9)
    )
    assert abs(small.price_estimate - big.price_estimate) <= 4 * (
        small.std_error + big.std_error
    )


def test_antithetic_mean_unchanged_variance_not_larger(market, schedule, exo):
    df = math.exp(-market.r * 6.0)
    v = 200.0 * df
    anti = db.simulate_price(market, schedule, exo, v, db.SimConfig(n_paths=200_000, seed=5))
    plain = db.simulate_price(
        market, schedule, exo, v, db.SimConfig(n_paths=200_000, seed=5, antithetic=False)
    )
    assert abs(anti.price_estimate - plain.price_estimate) <= 4 * (
        anti.std_error + plain.std_error
    )
    assert anti.std_error <= plain.std_error * 1.05


def test_matches_closed_form_exogenous(market, schedule, exo):
    df = math.exp(-market.r * 6.0)
    rep = db.price_exogenous(market, schedule, exo, 200.0 * df, 0.0)
    res = db.simulate_price(
        market, schedule, exo, 200.0 * df, db.SimConfig(n_paths=400_000, seed=7)
    )
    assert abs(res.price_estimate - rep.price) <= 3.0 * res.std_error
    w_se = math.sqrt(rep.survival_prob * (1 - rep.survival_prob) / res.n_paths)
    assert abs(res.survival_freq - rep.survival_prob) <= 3.0 * w_se


@pytest.mark.parametrize("n,t", [(1.0, 0.0), (100.0, 0.0), (1.0, 3.0), (100.0, 4.5)])
def test_matches_closed_form_endogenous(market, schedule, n, t):
    rec = db.RecoveryModel("endogenous", 0.5, n=n)
    df = math.exp(-market.r * (6.0 - t))
    v = 200.0 * df
    rep = db.price_endogenous(market, schedule, rec, v, t)
    res = db.simulate_price(market, schedule, rec, v, db.SimConfig(n_paths=400_000, seed=11), t)
    assert abs(res.price_estimate - rep.price) <= 3.0 * max(res.std_error, 1e-9)


def test_evaluation_on_announcing_date_skips_its_barrier(market, schedule, exo):
    # at t = t_1 the date-1 barrier is already resolved; only t_2 remains
    df = math.exp(-market.r * 3.0)
    v = 50.0 * df  # below the barrier scale: would have defaulted at t_1
    rep = db.price_exogenous(market, schedule, exo, v, 3.0)
    res = db.simulate_price(market, schedule, exo, v, db.SimConfig(n_paths=200_000, seed=13), 3.0)
    assert abs(res.price_estimate - rep.price) <= 3.0 * res.std_error


def test_input_validation(market, schedule, exo):
    with pytest.raises(DomainError):
        db.simulate_price(market, schedule, exo, -1.0, db.SimConfig(n_paths=100, antithetic=False))
    with pytest.raises(DomainError):
        db.simulate_price(market, schedule, exo, 100.0, db.SimConfig(n_paths=100, antithetic=False), t=6.0)
