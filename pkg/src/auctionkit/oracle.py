"""Brute-force ground truth for small auctions.

Everything here enumerates outcomes exhaustively with exact rationals and is
deliberately independent of the closed-form payoff code, so the two can be
checked against each other.  Enumeration includes the bidder's own
cancellation draw, so first-price payoffs carry the own-survival factor p
that the analytic payoff drops as an argmax-invariant constant.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .core import AuctionSpec, BehaviouralStrategy, Format, PureBidding
from .errors import EnumerationSizeError

__all__ = [
    "oracle_expected_payoff",
    "oracle_best_bids",
    "oracle_no_pure_symmetric_eq",
    "MAX_OUTCOMES",
]

MAX_OUTCOMES = 10_000_000

_CANCELLED = -1  # sentinel effective bid for a cancelled opponent


def _single_opponent_outcomes(spec: AuctionSpec, strategy: BehaviouralStrategy):
    """All (effective bid, probability) pairs for one opponent: value draw,
    bid draw, then the cancellation coin."""
    outcomes = []
    for v in spec.values:
        qv = spec.value_pmf[v]
        if qv == 0:
            continue
        for b, qb in strategy.pmf(v).items():
            if spec.p < 1:
                outcomes.append((b, qv * qb * spec.p))
                outcomes.append((_CANCELLED, qv * qb * (1 - spec.p)))
            else:
                outcomes.append((b, qv * qb))
    return outcomes


def oracle_expected_payoff(
    spec: AuctionSpec, opponents: BehaviouralStrategy, v: int, b: int
) -> Fraction:
    """Exact expected payoff by full cartesian enumeration of opponent values,
    bids and cancellation draws (and the own cancellation draw)."""
    spec.check_value(v)
    spec.grid_index(b)
    single = _single_opponent_outcomes(spec, opponents)
    if len(single) ** (spec.n - 1) > MAX_OUTCOMES:
        raise EnumerationSizeError(
            f"{len(single)}^{spec.n - 1} outcomes exceed the {MAX_OUTCOMES} cap"
        )
    total = Fraction(0)
    win_prob_if_alive = Fraction(0)
    for combo in itertools.product(single, repeat=spec.n - 1):
        prob = Fraction(1)
        highest = _CANCELLED
        for eb, q in combo:
            prob *= q
            if eb > highest:
                highest = eb
        if b > highest:  # ties lose, so strictly higher is required
            win_prob_if_alive += prob
    if spec.format is Format.ALL_PAY:
        # the bid is paid regardless; p == 1 so the own bid always stands
        total = Fraction(v) * win_prob_if_alive - b
    else:
        # pay only on a win; a cancelled own bid means no win and no payment
        total = spec.p * Fraction(v - b) * win_prob_if_alive
    return total


def oracle_best_bids(
    spec: AuctionSpec, opponents: BehaviouralStrategy, v: int
) -> tuple[int, ...]:
    """All payoff-maximising grid bids at value v, by exhaustive scan."""
    payoffs = {b: oracle_expected_payoff(spec, opponents, v, b) for b in spec.bid_grid}
    best = max(payoffs.values())
    return tuple(b for b, pi in payoffs.items() if pi == best)


def _monotone_pure_strategies(spec: AuctionSpec):
    """Yield every weakly increasing map from values into the bid grid."""
    grid = spec.bid_grid

    def rec(v: int, min_idx: int, prefix: list[int]):
        if v > spec.x:
            yield PureBidding(prefix)
            return
        for idx in range(min_idx, len(grid)):
            prefix.append(grid[idx])
            yield from rec(v + 1, idx, prefix)
            prefix.pop()

    yield from rec(0, 0, [])


def oracle_no_pure_symmetric_eq(spec: AuctionSpec) -> bool:
    """True iff no pure bidding function is a symmetric equilibrium.

    Only monotone candidates are enumerated: any symmetric equilibrium has
    monotone supports, so non-monotone pure profiles can never be equilibria.
    """
    n_candidates = 1
    for _ in spec.values:
        n_candidates *= len(spec.bid_grid)  # loose upper bound before pruning
    if n_candidates > MAX_OUTCOMES:
        raise EnumerationSizeError("value/bid space too large for exhaustive search")
    for candidate in _monotone_pure_strategies(spec):
        profile = candidate.as_strategy(spec)
        stable = True
        for v in spec.values:
            if spec.value_pmf[v] == 0:
                continue
            own = oracle_expected_payoff(spec, profile, v, candidate(v))
            for b in spec.bid_grid:
                if oracle_expected_payoff(spec, profile, v, b) > own:
                    stable = False
                    break
            if not stable:
                break
        if stable:
            return False
    return True
