import itertools
import random
from fractions import Fraction

import pytest

from auctionkit import (
    AuctionSpec,
    Format,
    PureBidding,
    expected_payoff,
    jump_to_strategy,
    oracle_best_bids,
    oracle_expected_payoff,
    oracle_no_pure_symmetric_eq,
    solve_equilibrium,
)
from auctionkit.errors import EnumerationSizeError
from conftest import random_jump_vector


def _small_specs():
    """The full small-game matrix: x <= 6, n <= 3, both formats, p in {1/2, 1}."""
    specs = []
    for x, n in itertools.product(range(1, 7), (2, 3)):
        specs.append(AuctionSpec(format=Format.ALL_PAY, n=n, x=x))
        for p in (Fraction(1, 2), Fraction(1)):
            specs.append(AuctionSpec(format=Format.FIRST_PRICE, n=n, x=x, p=p))
    return specs


def _random_strategy(rng, spec):
    jv = random_jump_vector(rng, spec.size, max_len=min(4, spec.x))
    return jump_to_strategy(spec, jv)


class TestOracleEquivalence:
    def test_payoffs_agree_exactly_on_small_matrix(self):
        rng = random.Random(11)
        for spec in _small_specs():
            strat = _random_strategy(rng, spec)
            factor = spec.p if spec.format is Format.FIRST_PRICE else Fraction(1)
            for v in spec.values:
                for b in spec.bid_grid:
                    if spec.format is Format.FIRST_PRICE:
                        # enumeration keeps the own-survival factor the
                        # analytic payoff drops; equality holds up to p
                        assert oracle_expected_payoff(spec, strat, v, b) == \
                            factor * expected_payoff(spec, strat, v, b)
                    else:
                        assert oracle_expected_payoff(spec, strat, v, b) == \
                            expected_payoff(spec, strat, v, b)

    def test_allpay_closed_form_on_uniform(self):
        # v * (j/S)^(n-1) - b against enumeration, x=5, n=2
        spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=5)
        strat = jump_to_strategy(spec, [Fraction(5, 2)])
        for v in spec.values:
            for b in spec.bid_grid:
                below = strat.prob_bid_below(b)
                assert oracle_expected_payoff(spec, strat, v, b) == v * below - b

    def test_firstprice_closed_form_up_to_p(self):
        spec = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=5, p=Fraction(1, 2))
        strat = jump_to_strategy(spec, [3])
        p = spec.p
        for v in spec.values:
            for b in spec.bid_grid:
                below = strat.prob_bid_below(b)
                analytic = (v - b) * (1 - p + p * below)
                assert oracle_expected_payoff(spec, strat, v, b) == p * analytic

    def test_zero_value_payoffs(self):
        rng = random.Random(3)
        ap = AuctionSpec(format=Format.ALL_PAY, n=2, x=4)
        fp = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=4, p="1/2")
        ap_strat = _random_strategy(rng, ap)
        fp_strat = _random_strategy(rng, fp)
        for b in range(5):
            # all-pay: the bid is sunk, v=0 earns exactly -b
            assert oracle_expected_payoff(ap, ap_strat, 0, b) == -b
            # first-price: -b times win odds, never positive
            assert oracle_expected_payoff(fp, fp_strat, 0, b) <= 0

    def test_size_cap(self):
        spec = AuctionSpec(format=Format.FIRST_PRICE, n=9, x=20, p="1/2")
        strat = PureBidding([v // 2 for v in spec.values]).as_strategy(spec)
        with pytest.raises(EnumerationSizeError):
            oracle_expected_payoff(spec, strat, 3, 1)


class TestNoPureSymmetricEquilibrium:
    @pytest.mark.parametrize("x", [3, 4, 5, 6])
    def test_allpay_uniform_has_none(self, x):
        spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=x)
        assert oracle_no_pure_symmetric_eq(spec) is True

    def test_single_action_game_has_pure_equilibrium(self):
        spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=0)
        assert oracle_no_pure_symmetric_eq(spec) is False

    @pytest.mark.parametrize("x", [3, 4, 5, 6])
    def test_solver_returns_properly_mixed_when_no_pure_eq(self, x):
        spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=x)
        assert oracle_no_pure_symmetric_eq(spec) is True
        result = solve_equilibrium(spec)
        assert result.verified
        assert not result.strategy.is_pure()


class TestOracleBestBids:
    def test_matches_full_scan_of_analytic_payoffs(self):
        rng = random.Random(5)
        spec = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=6, p="1/2")
        strat = _random_strategy(rng, spec)
        for v in spec.values:
            payoffs = {b: expected_payoff(spec, strat, v, b) for b in spec.bid_grid}
            best = max(payoffs.values())
            assert set(oracle_best_bids(spec, strat, v)) == \
                {b for b, q in payoffs.items() if q == best}
