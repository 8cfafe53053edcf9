"""Zero-determinant strategy laboratory for iterated 2x2 games."""

from zdlab.games import (
    StageGame,
    battle_of_sexes,
    canonical_game,
    folk_region,
    game_of_chicken,
    maximin,
    payoff_region,
    prisoners_dilemma,
    stage_nash,
    stag_hunt,
    symmetric_game,
)
from zdlab.markov import (
    PayoffResult,
    StrategyVector,
    convergence_constant,
    expected_payoffs,
    randomizer,
    tit_for_tat,
)
from zdlab.respond import best_response, discounted_payoff, retaliation_feasible
from zdlab.simulate import batch_average, estimate_mem1_equivalent, play_iterated
from zdlab.zd import (
    InfeasibleZDError,
    extortion_ranges,
    mischief_range,
    resolve_strategy,
    synth_extortion,
    synth_mischief,
)

__all__ = [
    "InfeasibleZDError",
    "PayoffResult",
    "StageGame",
    "StrategyVector",
    "battle_of_sexes",
    "batch_average",
    "best_response",
    "canonical_game",
    "convergence_constant",
    "discounted_payoff",
    "estimate_mem1_equivalent",
    "expected_payoffs",
    "extortion_ranges",
    "folk_region",
    "game_of_chicken",
    "maximin",
    "mischief_range",
    "payoff_region",
    "play_iterated",
    "prisoners_dilemma",
    "randomizer",
    "resolve_strategy",
    "retaliation_feasible",
    "stage_nash",
    "stag_hunt",
    "symmetric_game",
    "synth_extortion",
    "synth_mischief",
    "tit_for_tat",
]
