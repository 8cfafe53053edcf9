import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zdlab.games import canonical_game, prisoners_dilemma
from zdlab.markov import StrategyVector, expected_payoffs, randomizer, tit_for_tat
from zdlab.zd import (
    FeasibleRange,
    InfeasibleZDError,
    ZDLinear,
    extortion_ranges,
    feasible_beta,
    feasible_phi,
    mischief_range,
    recover_zd,
    resolve_strategy,
    synth_extortion,
    synth_mischief,
    zd_from_linear,
)

PD = canonical_game("pd")
SH = canonical_game("sh")
GC = canonical_game("gc")
BS = canonical_game("bs")
MOD_PD = prisoners_dilemma(R=10, S=0, T=11, P=9)


def assert_vector(sv, expected, tol=1e-12):
    for got, want in zip(sv.probs, expected):
        assert got == pytest.approx(want, abs=tol)


# ---------------------------------------------------------------- golden vectors

def test_mischief_golden_vectors():
    assert_vector(synth_mischief(PD, target=1, beta=-0.1), (0.8, 0.6, 0.1, 0))
    assert_vector(synth_mischief(SH, target=8, beta=-0.1), (0.8, 1, 0.8, 0))
    assert_vector(synth_mischief(GC, target=2.5, beta=-0.1), (0.65, 0.55, 0.05, 0.25))


def test_extortion_golden_vectors():
    assert_vector(synth_extortion(PD, chi=10, delta=1, phi=0.02), (0.64, 0.18, 0.28, 0))
    assert_vector(synth_extortion(SH, chi=10, delta=8, phi=0.01), (0.82, 0.92, 0.8, 0))
    assert_vector(synth_extortion(GC, chi=10, delta=2, phi=0.02), (0.28, 0, 0.1, 0.36))
    assert_vector(synth_extortion(BS, chi=2, delta=1, phi=-0.1), (1, 1, 0, 0.6))
    assert_vector(synth_extortion(MOD_PD, chi=10, delta=9, phi=0.01),
                  (0.91, 0.71, 0.92, 0))


def test_extortion_y_side_mirrors_x_side_for_symmetric_games():
    for game in (PD, SH, GC, MOD_PD):
        x = synth_extortion(game, chi=10, delta=None, phi=None, side="x")
        y = synth_extortion(game, chi=10, delta=None, phi=None, side="y")
        assert x.probs == y.probs


def test_extortion_y_side_bs():
    # the scale flips sign across seats in the battle of the sexes
    assert_vector(synth_extortion(BS, chi=2, delta=1, phi=0.1, side="y"),
                  (0.4, 1, 0, 0))
    rng = feasible_phi(BS, chi=2, delta=1, side="y")
    assert rng.lo == pytest.approx(0)
    assert rng.hi == pytest.approx(1 / 6)
    rng_x = feasible_phi(BS, chi=2, delta=1, side="x")
    assert rng_x.lo == pytest.approx(-1 / 6)
    assert rng_x.hi == pytest.approx(0)


def test_fair_strategy_at_maximal_scale_is_tit_for_tat():
    for game in (PD, GC):
        rng = feasible_phi(game, chi=1, delta=maximin_delta(game))
        R, S, T, P = game.sx
        assert rng.hi == pytest.approx(1 / (T - S))
        assert_vector(synth_extortion(game, chi=1, phi=rng.hi), (1, 0, 1, 0), tol=1e-12)


def maximin_delta(game):
    from zdlab.games import maximin
    return maximin(game)[0]


# ---------------------------------------------------------------- feasible ranges

def test_mischief_ranges():
    assert (mischief_range(PD).lo, mischief_range(PD).hi) == (1, 3)
    assert (mischief_range(SH).lo, mischief_range(SH).hi) == (8, 8)
    assert (mischief_range(GC).lo, mischief_range(GC).hi) == (2, 6)
    assert mischief_range(BS).is_empty


def test_mischief_infeasible_settings():
    with pytest.raises(InfeasibleZDError):
        synth_mischief(BS, target=3)
    with pytest.raises(InfeasibleZDError):
        synth_mischief(PD, target=4)  # above min(R, T)
    with pytest.raises(InfeasibleZDError):
        synth_mischief(PD, target=1, beta=-5)  # scale too large
    with pytest.raises(InfeasibleZDError):
        synth_mischief(PD, target=1, beta=0)


def test_extortion_chi_ranges():
    rng = extortion_ranges(PD, delta=1)
    assert rng.lo == 1 and math.isinf(rng.hi)
    rng = extortion_ranges(GC, delta=0)
    assert rng.lo == 1 and rng.hi == pytest.approx(3.5)
    rng = extortion_ranges(GC, delta=2)
    assert math.isinf(rng.hi)
    rng = extortion_ranges(SH, delta=9)  # above T, capped
    assert rng.hi == pytest.approx(9 / 1)
    rng = extortion_ranges(BS, delta=1)
    assert rng.lo == pytest.approx(0.5) and rng.hi == pytest.approx(2)
    rng = extortion_ranges(BS, delta=2)  # baseline off the miscoordination value
    assert (rng.lo, rng.hi) == (1.0, 1.0)


def test_extortion_baseline_bounds():
    with pytest.raises(InfeasibleZDError):
        extortion_ranges(PD, delta=0.5)
    with pytest.raises(InfeasibleZDError):
        extortion_ranges(PD, delta=3.5)
    with pytest.raises(InfeasibleZDError):
        synth_extortion(SH, chi=2, delta=7.5)


def test_extortion_chi_out_of_range():
    with pytest.raises(InfeasibleZDError) as err:
        synth_extortion(GC, chi=10, delta=0)
    assert "3.5" in str(err.value)
    with pytest.raises(InfeasibleZDError):
        synth_extortion(PD, chi=0.5, delta=1)
    with pytest.raises(InfeasibleZDError):
        synth_extortion(BS, chi=3, delta=1)


def test_feasible_phi_examples():
    rng = feasible_phi(PD, chi=10, delta=1)
    assert rng.lo == pytest.approx(0)
    assert rng.hi == pytest.approx(1 / 41)
    assert rng.contains(0.02)
    assert not rng.contains(0.03)
    assert not rng.contains(0)
    assert not rng.contains(-0.01)

    rng = feasible_phi(SH, chi=10, delta=8)
    assert rng.hi == pytest.approx(1 / 80)
    assert rng.contains(0.01)


def test_phi_out_of_range_raises():
    with pytest.raises(InfeasibleZDError) as err:
        synth_extortion(PD, chi=10, delta=1, phi=0.03)
    assert "0.024" in str(err.value)
    with pytest.raises(InfeasibleZDError):
        synth_extortion(PD, chi=10, delta=1, phi=0)
    with pytest.raises(InfeasibleZDError):
        synth_extortion(BS, chi=2, delta=1, phi=0.1)  # wrong sign for the X seat


def test_default_phi_is_interval_midpoint():
    sv = synth_extortion(PD, chi=10)  # delta defaults to maximin = 1
    assert sv.probs[1] == pytest.approx(0.5, abs=1e-12)  # 1 - 41 * (1/82)
    assert sv.probs[3] == 0


def test_default_beta_is_interval_midpoint():
    rng = feasible_beta(GC, target=2.5)
    assert rng.lo == pytest.approx(-2 / 9)
    assert rng.hi == pytest.approx(0)
    assert rng.default_value() == pytest.approx(-1 / 9)


def test_feasible_range_describe():
    assert "empty" in FeasibleRange.empty().describe()
    assert feasible_phi(PD, chi=10, delta=1).describe().startswith("(0")


# ---------------------------------------------------------------- enforcement

def opponents(seed, n=30):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield StrategyVector(tuple(rng.random(4)), first_move=rng.random())


def test_extortion_constraint_enforced_against_anyone():
    cases = [(PD, 10, 1.0), (GC, 10, 2.0), (SH, 10, 8.0), (MOD_PD, 10, 9.0),
             (GC, 3.5, 0.0), (BS, 2, 1.0)]
    for game, chi, delta in cases:
        sv = synth_extortion(game, chi=chi, delta=delta)
        for q in opponents(hash((game.name, chi)) % 2 ** 32):
            res = expected_payoffs(sv, q, game)
            assert abs((res.x - delta) - chi * (res.y - delta)) < 1e-9


def test_mischief_pins_opponent_payoff():
    sv = synth_mischief(GC, target=2.5, beta=-0.1)
    own = []
    for q in opponents(7, n=100):
        res = expected_payoffs(sv, q, GC)
        assert res.y == pytest.approx(2.5, abs=1e-9)
        own.append(res.x)
    # the pinned side's own payoff still moves with the opponent
    assert max(own) - min(own) > 0.1


def test_mischief_y_side_pins_x():
    sv = synth_mischief(GC, target=2.5, beta=-0.1, side="y")
    for p in opponents(11, n=30):
        res = expected_payoffs(p, sv, GC)
        assert res.x == pytest.approx(2.5, abs=1e-9)


def test_extortion_y_side_constraint():
    sv = synth_extortion(BS, chi=2, delta=1, phi=0.1, side="y")
    for p in opponents(13, n=30):
        res = expected_payoffs(p, sv, BS)
        assert abs((res.y - 1) - 2 * (res.x - 1)) < 1e-9


# ---------------------------------------------------------------- recovery

def test_recover_tit_for_tat():
    rec = recover_zd(PD, tit_for_tat())
    assert rec is not None
    assert rec.alpha == pytest.approx(0.2, abs=1e-9)
    assert rec.beta == pytest.approx(-0.2, abs=1e-9)
    assert rec.gamma == pytest.approx(0, abs=1e-9)
    assert rec.chi == pytest.approx(1)
    assert rec.baseline is None


def test_recover_rejects_non_zd():
    assert recover_zd(PD, randomizer()) is None
    assert recover_zd(PD, (0.9, 0.1, 0.8, 0.2)) is None


def test_recover_mischief():
    rec = recover_zd(GC, synth_mischief(GC, target=2.5, beta=-0.1))
    assert rec is not None
    assert rec.chi is None
    assert rec.pinned_y == pytest.approx(2.5, abs=1e-9)
    assert rec.beta == pytest.approx(-0.1, abs=1e-9)


def test_recover_y_side():
    q = synth_extortion(BS, chi=2, delta=1, phi=0.1, side="y")
    rec = recover_zd(BS, q, side="y")
    assert rec is not None
    # Y's factor reads off the swapped coefficient ratio
    assert -rec.alpha / rec.beta == pytest.approx(2, abs=1e-9)
    assert rec.baseline == pytest.approx(1, abs=1e-9)


@given(st.floats(1.0, 30.0), st.floats(0.0, 1.0), st.floats(0.05, 1.0))
def test_recover_round_trips_synthesis(chi, delta_t, phi_t):
    delta = 1 + 2 * delta_t  # anywhere in [P, R] for the dilemma
    phi = phi_t * feasible_phi(PD, chi, delta).hi
    sv = synth_extortion(PD, chi=chi, delta=delta, phi=phi)
    rec = recover_zd(PD, sv)
    assert rec is not None
    assert rec.alpha == pytest.approx(phi, abs=1e-9)
    assert rec.chi == pytest.approx(chi, rel=1e-7)
    if abs(chi - 1) > 1e-6:
        assert rec.baseline == pytest.approx(delta, abs=1e-6)


def test_zd_linear_residual():
    linear = ZDLinear(0.02, -0.2, 0.18)
    assert linear.residual(4.125, 1.3125) == pytest.approx(0.02 * 4.125 - 0.2 * 1.3125 + 0.18)
    assert linear.chi == pytest.approx(10)
    assert linear.baseline == pytest.approx(-0.18 / (0.02 - 0.2))


def test_zd_from_linear_rejects_out_of_cube():
    with pytest.raises(InfeasibleZDError):
        zd_from_linear(PD, 1.0, 0.0, 0.0)


# ---------------------------------------------------------------- spec resolution

def test_resolve_extortion_spec():
    sv, info = resolve_strategy({"type": "extortion", "chi": 10}, PD)
    assert info["delta"] == 1.0
    assert info["phi"] == pytest.approx(1 / 82)
    assert sv.probs == synth_extortion(PD, chi=10).probs


def test_resolve_zd_shorthand():
    sv, info = resolve_strategy({"type": "zd"}, GC)
    assert info["type"] == "extortion"
    assert info["chi"] == 10.0
    assert info["delta"] == 2.0


def test_resolve_mischief_spec():
    sv, info = resolve_strategy({"type": "mischief", "target": 2.5, "beta": -0.1}, GC)
    assert_vector(sv, (0.65, 0.55, 0.05, 0.25))
    assert info["beta"] == -0.1


def test_resolve_named_and_vector_specs():
    sv, info = resolve_strategy({"type": "tft"}, PD)
    assert sv.probs == (1, 0, 1, 0) and sv.first_move == 1.0
    assert info["name"] == "tft"
    sv, _ = resolve_strategy({"type": "random", "prob": 0.25}, PD)
    assert sv.probs == (0.25,) * 4
    sv, info = resolve_strategy(
        {"type": "vector", "probs": [0.9, 0.1, 0.8, 0.2], "first_move": 0.7}, PD)
    assert sv.first_move == 0.7
    assert info["probs"] == [0.9, 0.1, 0.8, 0.2]


def test_resolve_linear_spec():
    sv, info = resolve_strategy(
        {"type": "linear", "alpha": 0.2, "beta": -0.2, "gamma": 0}, PD)
    assert sv.probs == (1, 0, 1, 0)
    assert info["chi"] == pytest.approx(1)


def test_resolve_spec_errors():
    with pytest.raises(ValueError):
        resolve_strategy({"type": "extortion"}, PD)
    with pytest.raises(ValueError):
        resolve_strategy({"type": "banana"}, PD)
    with pytest.raises(ValueError):
        resolve_strategy({"no": "type"}, PD)
    with pytest.raises(InfeasibleZDError):
        resolve_strategy({"type": "mischief", "target": 9}, PD)
    with pytest.raises(InfeasibleZDError):
        resolve_strategy({"type": "zd"}, BS)  # chi = 10 never fits there
