"""Exit criteria for the toolkit, one test per criterion.

Each test enforces its stated tolerance (exact rational equality wherever the
arithmetic is exact) and prints a single PASS line on success; run with

    pytest tests/test_acceptance.py -v -s

to see the per-criterion report.
"""

import time
from fractions import Fraction

from auctionkit import (
    AuctionSpec,
    Format,
    Level0Spec,
    TypeSet,
    choice_prob,
    closed_form_allpay,
    crra_levelk,
    equilibrium_type,
    fit_mixture,
    iterate_levels,
    jump_to_strategy,
    levelk_type,
    optimize_p,
    oracle_expected_payoff,
    oracle_no_pure_symmetric_eq,
    simulate_dataset,
    solve_equilibrium,
    strategy_to_jump,
    expected_payoff,
)
from conftest import random_jump_vector


def _report(num: int, message: str) -> None:
    print(f"\n[criterion {num:2d}] PASS — {message}")


def test_criterion_01_allpay_worked_example_exact():
    t0 = time.time()
    spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=100)
    result = solve_equilibrium(spec)
    elapsed = time.time() - t0
    assert result.jumps[0] == Fraction("10.1")
    assert result.jumps[1] == Fraction("16.4125")
    strat = result.strategy
    assert strat.pmf(10) == {0: Fraction("0.1"), 1: Fraction("0.9")}
    assert strat.prob(16, 1) == Fraction("0.4125")
    assert result.verified and result.max_regret == 0
    assert elapsed < 1.0
    _report(1, f"all-pay S=101 jumps begin (10.1, 16.4125), mixing exact, {elapsed:.3f}s")


def test_criterion_02_allpay_size_variants_exact():
    for x in (99, 98):  # 100 and 99 possible valuations
        spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=x)
        assert solve_equilibrium(spec).jumps[0] == 10
    _report(2, "all-pay S=100 and S=99 both open with first jump exactly 10")


def test_criterion_03_firstprice_worked_example_exact():
    spec = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=Fraction(1, 2))
    result = solve_equilibrium(spec)
    assert result.jumps[0] == 11
    assert result.verified and result.max_regret == 0
    _report(3, "first-price S=101 p=1/2 first jump exactly 11")


def test_criterion_04_experiment_scale_fast_and_exact():
    t0 = time.time()
    for spec in (
        AuctionSpec(format=Format.ALL_PAY, n=2, x=100),
        AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=Fraction(1, 2)),
    ):
        result = solve_equilibrium(spec)
        assert result.verified
        assert result.max_regret == 0
    elapsed = time.time() - t0
    assert elapsed < 1.0
    _report(4, f"x=100 solves verified with zero regret in {elapsed:.3f}s (< 1s)")


def test_criterion_05_low_level_characterization_and_no_equilibrium_level():
    spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=15)
    prediction = iterate_levels(spec, Level0Spec.uniform(), 200)
    # (x+1)^((n-1)/n) + 1 = 5 at x=15, n=2: levels 1..5 have the closed form
    for k in range(1, 6):
        assert prediction.by_level(k) == closed_form_allpay(spec, k)
    eq = solve_equilibrium(spec).strategy
    for k in range(1, 201):
        assert prediction.by_level(k).as_strategy(spec) != eq
    _report(5, "levels 1..5 match the threshold form exactly; levels 1..200 never hit equilibrium")


def test_criterion_06_cycling():
    t0 = time.time()
    spec = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=Fraction(1, 2))
    prediction = iterate_levels(spec, Level0Spec.uniform(), 100, tiebreak="low")
    elapsed = time.time() - t0
    assert prediction.cycle == (7, 29)
    assert prediction.by_level(7) == prediction.by_level(36)
    max_bids = prediction.max_bids()
    assert min(max_bids) == 0 and max(max_bids) == 20
    assert sorted(set(max_bids)) == list(range(0, 21))
    assert elapsed < 10.0
    _report(6, f"cycle period 29 (level 7 = level 36), max bids span 0..20, {elapsed:.2f}s")


def test_criterion_07_optimal_cancellation_table():
    reference = {2: 0.536, 3: 0.343, 4: 0.256, 5: 0.204, 6: 0.170, 7: 0.145, 8: 0.127}
    for n, target in reference.items():
        result = optimize_p(n)
        assert abs(result.p_star - target) <= 1e-3, (n, result.p_star)
        assert result.p_star >= 1.0 / n
        assert abs(optimize_p(n, x=10).p_star - optimize_p(n, x=1000).p_star) <= 1e-9
    _report(7, "optimal pass-through matches the reference row to 1e-3, x-invariant, >= 1/n")


def test_criterion_08_coarse_grid_comparative_static():
    p = Fraction(1, 2)
    fine = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=p)
    coarse = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=p,
                         bid_grid=range(0, 101, 5))
    avg = {}
    for label, spec in (("fine", fine), ("coarse", coarse)):
        result = solve_equilibrium(spec)
        assert result.verified
        avg[label] = result.strategy.mean_bid()
    increase_pp = float(avg["coarse"] / avg["fine"] - 1) * 100
    assert 4.2 <= increase_pp <= 5.2

    ratios = []
    fine_levels = iterate_levels(fine, Level0Spec.uniform(), 3)
    coarse_levels = iterate_levels(coarse, Level0Spec.uniform(), 3)
    for k in (1, 2, 3):
        mean_fine = sum(fine_levels.by_level(k).bids) / 101
        mean_coarse = sum(coarse_levels.by_level(k).bids) / 101
        assert mean_coarse >= 3 * mean_fine  # level 1 is 0 on both grids
        if mean_fine > 0:
            ratios.append(mean_coarse / mean_fine)
    assert ratios  # at least one level bids positively on both grids
    _report(8, f"coarse grid lifts the mean equilibrium bid {increase_pp:.2f}% "
               f"(4.7 +/- 0.5 band); level ratios {[round(r, 2) for r in ratios]} all >= 3")


def test_criterion_09_mixture_recovery():
    t0 = time.time()
    spec = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=Fraction(1, 2))
    typeset = TypeSet([equilibrium_type(spec), levelk_type(spec, 3)])
    true_shares, true_sigmas = (0.75, 0.25), (20.0, 8.0)
    successes = 0
    for seed in range(20):
        data = simulate_dataset(spec, typeset, true_shares, true_sigmas,
                                n_subjects=84, rounds=2, seed=seed)
        assert len(data) == 84 * 20
        fit = fit_mixture(data, typeset, n_starts=10, seed=seed, grid=spec.bid_grid)
        shares_ok = all(abs(f - t) <= 0.10 for f, t in zip(fit.shares, true_shares))
        sigmas_ok = all(abs(f - t) <= 0.20 * t for f, t in zip(fit.sigmas, true_sigmas))
        successes += shares_ok and sigmas_ok
    elapsed = time.time() - t0
    assert successes >= 18
    assert elapsed < 300.0
    _report(9, f"{successes}/20 replications recover shares within 0.10 and noise "
               f"within 20% ({elapsed:.0f}s < 5min)")


def test_criterion_10_oracle_equivalence_and_pure_equilibrium_absence():
    import itertools
    import random

    rng = random.Random(101)
    checked = 0
    for x, n in itertools.product(range(1, 7), (2, 3)):
        specs = [AuctionSpec(format=Format.ALL_PAY, n=n, x=x)]
        for p in (Fraction(1, 2), Fraction(1)):
            specs.append(AuctionSpec(format=Format.FIRST_PRICE, n=n, x=x, p=p))
        for spec in specs:
            strat = jump_to_strategy(spec, random_jump_vector(rng, spec.size, min(3, spec.x)))
            factor = spec.p if spec.format is Format.FIRST_PRICE else 1
            for v in spec.values:
                for b in spec.bid_grid:
                    assert oracle_expected_payoff(spec, strat, v, b) == \
                        factor * expected_payoff(spec, strat, v, b)
                    checked += 1
    for x in (3, 4, 5, 6):
        spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=x)
        assert oracle_no_pure_symmetric_eq(spec) is True
        result = solve_equilibrium(spec)
        assert result.verified and not result.strategy.is_pure()
    _report(10, f"enumeration matches analytic payoffs exactly on {checked} cells; "
                "small all-pay games have no pure symmetric equilibrium and solve mixed")


def test_criterion_11_invariant_suites():
    import random

    # jump <-> strategy roundtrip, 1000 random instances
    rng = random.Random(20260810)
    for _ in range(1000):
        size = rng.randint(2, 30)
        spec = AuctionSpec(format=Format.ALL_PAY, n=2, x=size - 1)
        jv = random_jump_vector(rng, size)
        assert strategy_to_jump(spec, jump_to_strategy(spec, jv)).jumps == jv.jumps

    # choice kernel: normalization plus both limits
    from auctionkit import BidderType

    grid = tuple(range(101))
    bt = BidderType("probe", tuple([23.0] * 101))
    assert abs(sum(choice_prob(b, 0, bt, 7.0, grid) for b in grid) - 1.0) < 1e-12
    flat = [choice_prob(b, 0, bt, 1e7, grid) for b in grid]
    assert max(flat) - min(flat) < 1e-9
    assert choice_prob(23, 0, bt, 1e-4, grid) > 1.0 - 1e-12

    # EM log-likelihood path is monotone
    spec = AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=Fraction(1, 2))
    typeset = TypeSet([equilibrium_type(spec), levelk_type(spec, 3)])
    data = simulate_dataset(spec, typeset, (0.6, 0.4), (15.0, 6.0),
                            n_subjects=30, seed=3)
    fit = fit_mixture(data, typeset, n_starts=5, seed=3, grid=spec.bid_grid)
    assert all(b >= a - 1e-7 for a, b in zip(fit.ll_path, fit.ll_path[1:]))

    # curvature exponent 1 reproduces the risk-neutral levels exactly
    neutral = iterate_levels(spec, Level0Spec.uniform(), 3)
    for k in (1, 2, 3):
        assert crra_levelk(spec, k) == neutral.by_level(k)

    _report(11, "roundtrip x1000, choice-kernel limits, monotone EM path, "
                "alpha=1 equals risk-neutral — all exact")
