"""auctionkit: symmetric equilibrium, level-k bidding and mixture estimation
for discrete all-pay and first-price auctions (with bid cancellation and
coarse bid grids)."""

from .core import (
    AuctionSpec,
    BehaviouralStrategy,
    Format,
    JumpVector,
    PureBidding,
    expected_payoff,
    jump_to_strategy,
    strategy_to_jump,
    win_probability,
)
from .design import SeparationResult, distance, distance_derivative, optimize_p
from .equilibrium import (
    EquilibriumResult,
    continuous_equilibrium,
    solve_equilibrium,
    verify_equilibrium,
)
from .errors import AuctionKitError
from .estimation import (
    BidRecord,
    BidderType,
    Grouping,
    MixtureFit,
    TypeSet,
    assign_levels,
    bic,
    choice_prob,
    correlate,
    crra_from_bret,
    equilibrium_type,
    fit_mixture,
    jackknife_se,
    levelk_type,
    likelihood,
    prediction_rmse,
    simulate_dataset,
)
from .levelk import (
    Level0Spec,
    LevelPrediction,
    best_response,
    ch_bidding,
    check_l0_bound,
    closed_form_allpay,
    closed_form_firstprice,
    crra_levelk,
    iterate_levels,
)
from .oracle import oracle_best_bids, oracle_expected_payoff, oracle_no_pure_symmetric_eq

__version__ = "0.1.0"

__all__ = [
    "AuctionSpec", "BehaviouralStrategy", "Format", "JumpVector", "PureBidding",
    "expected_payoff", "jump_to_strategy", "strategy_to_jump", "win_probability",
    "SeparationResult", "distance", "distance_derivative", "optimize_p",
    "EquilibriumResult", "continuous_equilibrium", "solve_equilibrium", "verify_equilibrium",
    "AuctionKitError",
    "BidRecord", "BidderType", "Grouping", "MixtureFit", "TypeSet",
    "assign_levels", "bic", "choice_prob", "correlate", "crra_from_bret",
    "equilibrium_type", "fit_mixture", "jackknife_se", "levelk_type", "likelihood",
    "prediction_rmse", "simulate_dataset",
    "Level0Spec", "LevelPrediction", "best_response", "ch_bidding", "check_l0_bound",
    "closed_form_allpay", "closed_form_firstprice", "crra_levelk", "iterate_levels",
    "oracle_best_bids", "oracle_expected_payoff", "oracle_no_pure_symmetric_eq",
]
