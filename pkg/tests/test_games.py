import math

import pytest
from hypothesis import given, strategies as st

from zdlab.games import (
    battle_of_sexes,
    canonical_game,
    convex_hull,
    folk_region,
    game_from_dict,
    game_of_chicken,
    game_to_dict,
    in_hull,
    maximin,
    payoff_region,
    prisoners_dilemma,
    profile_payoffs,
    stage_nash,
    stag_hunt,
    symmetric_game,
)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def test_canonical_payoff_vectors():
    assert canonical_game("pd").sx == (3, 0, 5, 1)
    assert canonical_game("pd").sy == (3, 5, 0, 1)
    assert canonical_game("sh").sx == (10, 0, 8, 8)
    assert canonical_game("gc").sx == (6, 2, 7, 0)
    assert canonical_game("bs").sx == (5, 1, 1, 3)
    assert canonical_game("bs").sy == (3, 1, 1, 5)
    for name in ("pd", "sh", "gc"):
        assert canonical_game(name).is_symmetric
    assert not canonical_game("bs").is_symmetric


def test_unknown_game_name():
    with pytest.raises(ValueError):
        canonical_game("matching_pennies")


def test_ordering_violations_raise():
    with pytest.raises(ValueError):
        prisoners_dilemma(R=3, S=0, T=2, P=1)  # T < R
    with pytest.raises(ValueError):
        prisoners_dilemma(R=3, S=1.5, T=5, P=2)  # 2R <= T + S
    with pytest.raises(ValueError):
        stag_hunt(R=8, S=0, T=10, P=8)  # T > R
    with pytest.raises(ValueError):
        game_of_chicken(R=6, S=0, T=7, P=2)  # P > S
    with pytest.raises(ValueError):
        battle_of_sexes(F=3, C=1, L=1, D=5)  # D > F


def test_modified_dilemma_is_still_a_dilemma():
    g = prisoners_dilemma(R=10, S=0, T=11, P=9)
    assert g.sx == (10, 0, 11, 9)
    assert g.is_symmetric


def test_maximin_canonical():
    assert maximin(canonical_game("pd")) == (1, 1)
    assert maximin(canonical_game("sh")) == (8, 8)
    assert maximin(canonical_game("gc")) == (2, 2)
    vx, vy = maximin(canonical_game("bs"))
    assert vx == pytest.approx(7 / 3)
    assert vy == pytest.approx(7 / 3)
    assert maximin(prisoners_dilemma(R=10, S=0, T=11, P=9)) == (9, 9)


@given(finite, finite, finite, finite)
def test_maximin_symmetric_games_agree(R, S, T, P):
    vx, vy = maximin(symmetric_game(R, S, T, P))
    assert vx == pytest.approx(vy, abs=1e-9)


def test_stage_nash_pd():
    points = stage_nash(canonical_game("pd"))
    assert len(points) == 1
    (eq,) = points
    assert (eq.x_up, eq.y_up, eq.kind) == (0.0, 0.0, "pure")
    assert eq.payoffs == (1, 1)


def test_stage_nash_sh():
    points = stage_nash(canonical_game("sh"))
    pure = {(p.x_up, p.y_up) for p in points if p.kind == "pure"}
    assert pure == {(1.0, 1.0), (0.0, 0.0)}
    (mixed,) = [p for p in points if p.kind == "mixed"]
    assert mixed.x_up == pytest.approx(0.8)
    assert mixed.y_up == pytest.approx(0.8)


def test_stage_nash_gc():
    points = stage_nash(canonical_game("gc"))
    pure = {(p.x_up, p.y_up) for p in points if p.kind == "pure"}
    assert pure == {(1.0, 0.0), (0.0, 1.0)}
    (mixed,) = [p for p in points if p.kind == "mixed"]
    assert mixed.x_up == pytest.approx(2 / 3)
    assert mixed.y_up == pytest.approx(2 / 3)


def test_stage_nash_bs():
    # the mixed point is asymmetric: X insists on its favourite two thirds
    # of the time, Y only one third
    points = stage_nash(canonical_game("bs"))
    pure = {(p.x_up, p.y_up) for p in points if p.kind == "pure"}
    assert pure == {(1.0, 1.0), (0.0, 0.0)}
    (mixed,) = [p for p in points if p.kind == "mixed"]
    assert mixed.x_up == pytest.approx(2 / 3)
    assert mixed.y_up == pytest.approx(1 / 3)
    assert mixed.payoffs[0] == pytest.approx(7 / 3)
    assert mixed.payoffs[1] == pytest.approx(7 / 3)


@given(finite, finite, finite, finite)
def test_stage_nash_points_have_no_profitable_deviation(R, S, T, P):
    game = symmetric_game(R, S, T, P)
    for eq in stage_nash(game):
        px, py = eq.payoffs
        for dev in (0.0, 1.0):
            assert profile_payoffs(game, dev, eq.y_up)[0] <= px + 1e-9
            assert profile_payoffs(game, eq.x_up, dev)[1] <= py + 1e-9


def test_profile_payoffs_pure_cell():
    assert profile_payoffs(canonical_game("pd"), 1, 1) == (3, 3)
    assert profile_payoffs(canonical_game("pd"), 1, 0) == (0, 5)


def test_payoff_region_pd():
    hull = payoff_region(canonical_game("pd"))
    assert set(hull) == {(1.0, 1.0), (3.0, 3.0), (0.0, 5.0), (5.0, 0.0)}


def test_payoff_region_sh_drops_interior_point():
    hull = payoff_region(canonical_game("sh"))
    assert set(hull) == {(10.0, 10.0), (0.0, 8.0), (8.0, 0.0)}
    assert in_hull(hull, (8.0, 8.0))


@given(st.sampled_from(["pd", "sh", "gc", "bs"]),
       st.lists(st.floats(min_value=0, max_value=1), min_size=4, max_size=4))
def test_feasible_mixtures_stay_in_region(name, weights):
    total = sum(weights)
    if total <= 1e-9:
        weights, total = [1, 1, 1, 1], 4
    w = [v / total for v in weights]
    game = canonical_game(name)
    point = (sum(wi * si for wi, si in zip(w, game.sx)),
             sum(wi * si for wi, si in zip(w, game.sy)))
    assert in_hull(payoff_region(game), point, tol=1e-9)


def test_folk_region_pd():
    game = canonical_game("pd")
    poly = folk_region(game, (1, 1))
    assert all(x >= 1 - 1e-12 and y >= 1 - 1e-12 for x, y in poly)
    hull = payoff_region(game)
    assert all(in_hull(hull, p, tol=1e-9) for p in poly)
    assert in_hull(poly, (2.9, 2.9))
    assert in_hull(poly, (1.05, 1.05))
    assert not in_hull(poly, (0.5, 0.5))


def test_convex_hull_collinear_points_dropped():
    hull = convex_hull([(0, 0), (1, 1), (2, 2), (0, 2), (2, 0)])
    assert set(hull) == {(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)}


def test_serialization_round_trip():
    for name in ("pd", "sh", "gc", "bs"):
        game = canonical_game(name)
        assert game_from_dict(game_to_dict(game)) == game


def test_game_from_letter_dicts():
    assert game_from_dict({"R": 3, "S": 0, "T": 5, "P": 1}).sx == (3, 0, 5, 1)
    bs = game_from_dict({"kind": "sexes", "F": 5, "C": 1, "L": 1, "D": 3})
    assert bs.sy == (3, 1, 1, 5)
    with pytest.raises(ValueError):
        game_from_dict({"R": 3})


def test_s_hat():
    assert canonical_game("pd").s_hat == 5
    assert canonical_game("gc").s_hat == 7
    assert symmetric_game(-4, 1, 2, 3).s_hat == 4


def test_maximin_never_exceeds_best_reply_payoffs():
    # the guarantee is conservative: each stage equilibrium pays at least it
    for name in ("pd", "sh", "gc", "bs"):
        game = canonical_game(name)
        vx, vy = maximin(game)
        for eq in stage_nash(game):
            assert eq.payoffs[0] >= vx - 1e-9
            assert eq.payoffs[1] >= vy - 1e-9
