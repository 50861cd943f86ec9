"""Level-k and cognitive-hierarchy bidding.

A level-0 anchor induces a bid distribution; level k best responds to level
k-1 treated as the symmetric opposing strategy.  Best responses are exact
full-grid argmax scans (no continuous shortcut), with ties broken to the
lowest optimal bid by default or to the highest as a robustness variant.
Because bidding functions live in a finite set, the sequence of levels
eventually cycles; the iteration records the first exact repetition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .core import AuctionSpec, Format, PureBidding, _as_fraction
from .errors import (
    CharacterizationBoundError,
    ParameterError,
    SpecValidationError,
    UnsupportedUtilityError,
)

__all__ = [
    "Level0Spec",
    "LevelPrediction",
    "best_response",
    "iterate_levels",
    "closed_form_allpay",
    "closed_form_firstprice",
    "ch_bidding",
    "check_l0_bound",
    "crra_levelk",
]

LOWEST = "low"
HIGHEST = "high"


class Level0Spec:
    """Anchor behaviour for the level hierarchy.

    ``uniform``  — every grid bid equally likely.
    ``truthful`` — bid equal to value, pushed down to the nearest grid bid
                   from above when the value is off-grid; on a step-1 grid
                   with uniform values this coincides with ``uniform``.
    ``custom``   — an explicit bid distribution over the grid.
    """

    __slots__ = ("kind", "_pmf")

    def __init__(self, kind: str, pmf: Mapping[int, Fraction] | None = None):
        if kind not in ("uniform", "truthful", "custom"):
            raise ParameterError(f"unknown level-0 kind {kind!r}")
        if (kind == "custom") != (pmf is not None):
            raise ParameterError("custom level-0 requires a bid pmf; the others take none")
        self.kind = kind
        self._pmf = dict(pmf) if pmf else None

    @classmethod
    def uniform(cls) -> "Level0Spec":
        return cls("uniform")

    @classmethod
    def truthful(cls) -> "Level0Spec":
        return cls("truthful")

    @classmethod
    def custom(cls, pmf: Mapping[int, object]) -> "Level0Spec":
        return cls("custom", {int(b): _as_fraction(q) for b, q in pmf.items()})

    @classmethod
    def from_cdf(cls, grid: tuple[int, ...], cdf: list) -> "Level0Spec":
        """Build a custom anchor from cumulative probabilities along the grid."""
        cum = [_as_fraction(c) for c in cdf]
        if len(cum) != len(grid) or cum[-1] != 1 or any(b < a for a, b in zip(cum, cum[1:])):
            raise ParameterError("cdf must be weakly increasing along the grid and reach 1")
        pmf = {}
        prev = Fraction(0)
        for b, c in zip(grid, cum):
            if c - prev > 0:
                pmf[b] = c - prev
            prev = c
        return cls("custom", pmf)

    def bid_pmf(self, spec: AuctionSpec) -> dict[int, Fraction]:
        if self.kind == "uniform":
            q = Fraction(1, len(spec.bid_grid))
            return {b: q for b in spec.bid_grid}
        if self.kind == "truthful":
            out: dict[int, Fraction] = {}
            for v in spec.values:
                qv = spec.value_pmf[v]
                if qv == 0:
                    continue
                b = max(g for g in spec.bid_grid if g <= v)
                out[b] = out.get(b, Fraction(0)) + qv
            return dict(sorted(out.items()))
        pmf = {b: q for b, q in self._pmf.items() if q > 0}
        for b in pmf:
            spec.grid_index(b)
        if sum(pmf.values(), Fraction(0)) != 1:
            raise ParameterError("custom level-0 pmf must sum to exactly 1")
        return dict(sorted(pmf.items()))


@dataclass(frozen=True)
class LevelPrediction:
    """Bidding functions for levels 1..K plus cycle metadata.

    ``cycle`` is (start_level, period): the function at ``start_level`` is the
    first one to reappear, ``period`` iterations later.
    """

    levels: tuple[PureBidding, ...]
    tiebreak: str
    cycle: tuple[int, int] | None

    def by_level(self, k: int) -> PureBidding:
        if not 1 <= k <= len(self.levels):
            raise ParameterError(f"level {k} not computed (have 1..{len(self.levels)})")
        return self.levels[k - 1]

    def max_bids(self) -> list[int]:
        return [bf.max_bid() for bf in self.levels]


def _cumulative_below(spec: AuctionSpec, opponent_pmf: Mapping[int, Fraction]):
    """F(b-) for each grid bid: chance a single opposing bid is strictly below."""
    total = sum(opponent_pmf.values(), Fraction(0))
    if total != 1:
        raise ParameterError("opponent bid pmf must sum to exactly 1")
    below = []
    cum = Fraction(0)
    for b in spec.bid_grid:
        below.append(cum)
        cum += opponent_pmf.get(b, Fraction(0))
    return below


def best_response(
    spec: AuctionSpec,
    opponent_pmf: Mapping[int, Fraction],
    tiebreak: str = LOWEST,
) -> PureBidding:
    """Exact best reply to opponents who all draw bids from ``opponent_pmf``.

    Scans the full grid for every value; among ties picks the lowest optimal
    bid (default) or the highest.  Integer arithmetic throughout: win factors
    are put over a common denominator so payoff comparisons never round.
    """
    if tiebreak not in (LOWEST, HIGHEST):
        raise ParameterError(f"tiebreak must be {LOWEST!r} or {HIGHEST!r}")
    if not spec.bid_grid:
        raise SpecValidationError("empty bid grid")
    if spec.alpha != 1:
        return _best_response_crra(spec, opponent_pmf, tiebreak)
    below = _cumulative_below(spec, opponent_pmf)
    win = [(1 - spec.p + spec.p * f) ** (spec.n - 1) for f in below]
    denom = math.lcm(*(w.denominator for w in win))
    wnum = [int(w * denom) for w in win]
    grid = spec.bid_grid
    all_pay = spec.format is Format.ALL_PAY
    take_high = tiebreak == HIGHEST

    bids = []
    for v in spec.values:
        best_b = grid[0]
        best_s = v * wnum[0] - grid[0] * denom if all_pay else (v - grid[0]) * wnum[0]
        for b, wn in zip(grid[1:], wnum[1:]):
            s = v * wn - b * denom if all_pay else (v - b) * wn
            if s > best_s or (take_high and s == best_s):
                best_s, best_b = s, b
        bids.append(best_b)
    return PureBidding(bids)


def _best_response_crra(spec, opponent_pmf, tiebreak):
    """Float-precision best reply under u(z) = z**alpha; ties are detected
    with a 1e-12 relative tolerance before the tiebreak applies."""
    below = _cumulative_below(spec, opponent_pmf)
    win = [float((1 - spec.p + spec.p * f) ** (spec.n - 1)) for f in below]
    grid = spec.bid_grid
    bids = []
    for v in spec.values:
        scores = [
            (float(v - b) ** spec.alpha * w if b <= v else -math.inf)
            for b, w in zip(grid, win)
        ]
        top = max(scores)
        tol = 1e-12 * max(1.0, abs(top))
        tied = [b for b, s in zip(grid, scores) if s >= top - tol]
        bids.append(tied[-1] if tiebreak == HIGHEST else tied[0])
    return PureBidding(bids)


def _induced_bid_pmf(spec: AuctionSpec, bidding: PureBidding) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for v in spec.values:
        qv = spec.value_pmf[v]
        if qv > 0:
            out[bidding(v)] = out.get(bidding(v), Fraction(0)) + qv
    return out


def iterate_levels(
    spec: AuctionSpec,
    l0: Level0Spec,
    K: int,
    tiebreak: str = LOWEST,
) -> LevelPrediction:
    """Levels 1..K by iterated exact best response, with cycle detection.

    Level 1 replies to the anchor's bid distribution; level k replies to
    level k-1's bidding function pushed through the value distribution.
    Once a bidding function reappears the tail repeats forever; the first
    repetition is recorded as (first_occurrence, period).
    """
    if K < 1:
        raise ParameterError("need K >= 1")
    opponent = l0.bid_pmf(spec)
    levels: list[PureBidding] = []
    first_seen: dict[tuple[int, ...], int] = {}
    cycle = None
    for k in range(1, K + 1):
        beta = best_response(spec, opponent, tiebreak)
        levels.append(beta)
        if cycle is None:
            if beta.bids in first_seen:
                start = first_seen[beta.bids]
                cycle = (start, k - start)
            else:
                first_seen[beta.bids] = k
        opponent = _induced_bid_pmf(spec, beta)
    return LevelPrediction(tuple(levels), tiebreak, cycle)


def closed_form_allpay(spec: AuctionSpec, k: int) -> PureBidding:
    """All-pay low-level characterization: bid k-1 at values v >= k, else 0.

    Valid for k <= (x+1)^((n-1)/n) + 1 on a step-1 grid with uniform values;
    the bound is tested exactly as (k-1)^n <= (x+1)^(n-1).
    """
    if spec.format is not Format.ALL_PAY:
        raise SpecValidationError("all-pay characterization requested for a non-all-pay auction")
    if spec.bid_grid != tuple(range(spec.x + 1)):
        raise CharacterizationBoundError("characterization requires the step-1 bid grid")
    if not spec.uniform_values:
        raise CharacterizationBoundError("characterization requires uniform values")
    if k < 1:
        raise ParameterError("need k >= 1")
    if (k - 1) ** spec.n > (spec.x + 1) ** (spec.n - 1):
        raise CharacterizationBoundError(
            f"level {k} exceeds the bound (x+1)^((n-1)/n) + 1; use iterate_levels"
        )
    return PureBidding([k - 1 if v >= k else 0 for v in spec.values])


def closed_form_firstprice(spec: AuctionSpec, k: int) -> PureBidding:
    """First-price characterization at p = 1/n: bid k-1 above the threshold
    v*(k) = (k-1) / (1 - (1-p)^(n-1)), else 0.

    Holds only when x is large enough relative to k; rather than assuming
    that, the result is cross-checked against the exact iteration and a
    mismatch raises.
    """
    if spec.format is not Format.FIRST_PRICE:
        raise SpecValidationError("first-price characterization requested for a non-first-price auction")
    if spec.p != Fraction(1, spec.n):
        raise ParameterError(f"characterization requires p = 1/n, got p = {spec.p}")
    if not spec.uniform_values or spec.bid_grid != tuple(range(spec.x + 1)):
        raise CharacterizationBoundError("characterization requires uniform values on the step-1 grid")
    if k < 1:
        raise ParameterError("need k >= 1")
    v_star = Fraction(k - 1) / (1 - (1 - spec.p) ** (spec.n - 1))
    bids = PureBidding([k - 1 if v > v_star else 0 for v in spec.values])
    iterated = iterate_levels(spec, Level0Spec.uniform(), k).by_level(k)
    if bids != iterated:
        raise CharacterizationBoundError(
            f"threshold form disagrees with exact iteration at level {k}; x is too small"
        )
    return bids


def ch_bidding(
    spec: AuctionSpec,
    tau,
    k: int,
    l0: Level0Spec | None = None,
    tiebreak: str = LOWEST,
) -> PureBidding:
    """Cognitive-hierarchy bid: best reply to levels 0..k-1 weighted by a
    Poisson(tau) distribution renormalized over that range (level 0 keeps
    its Poisson weight and bids per the anchor)."""
    tau = _as_fraction(tau)
    if tau <= 0:
        raise ParameterError("need tau > 0")
    if k < 1:
        raise ParameterError("need k >= 1")
    l0 = l0 or Level0Spec.uniform()
    weights = [tau**j / math.factorial(j) for j in range(k)]
    total = sum(weights, Fraction(0))
    pmfs = [l0.bid_pmf(spec)]
    if k > 1:
        prediction = iterate_levels(spec, l0, k - 1, tiebreak)
        pmfs.extend(_induced_bid_pmf(spec, prediction.by_level(j)) for j in range(1, k))
    mixed: dict[int, Fraction] = {}
    for w, pmf in zip(weights, pmfs):
        for b, q in pmf.items():
            mixed[b] = mixed.get(b, Fraction(0)) + (w / total) * q
    return best_response(spec, mixed, tiebreak)


def check_l0_bound(spec: AuctionSpec, l0) -> bool:
    """Sufficient condition on an anchor for the low-level characterizations
    to go through (it is not necessary).

    ``F(b)`` below is the chance an anchored bid falls strictly below b, the
    tie-breaking-relevant quantity.  All-pay: F(b) <= (b/(x+1))^(1/(n-1)) on
    the whole grid, tested exactly as F(b)^(n-1) * (x+1) <= b.  First-price:
    F(b) <= ((n-1)/n) * ((x/(x-b))^(n-1) - 1) for grid bids below x.
    """
    if isinstance(l0, Level0Spec):
        pmf = l0.bid_pmf(spec)
    else:
        pmf = {int(b): _as_fraction(q) for b, q in l0.items()}
    below = _cumulative_below(spec, pmf)
    if spec.format is Format.ALL_PAY:
        return all(
            f ** (spec.n - 1) * (spec.x + 1) <= b for b, f in zip(spec.bid_grid, below)
        )
    n, x = spec.n, spec.x
    for b, f in zip(spec.bid_grid, below):
        if b >= x:
            continue
        cap = Fraction(n - 1, n) * ((Fraction(x, x - b)) ** (n - 1) - 1)
        if f > cap:
            return False
    return True


def crra_levelk(spec: AuctionSpec, k: int, l0: Level0Spec | None = None, tiebreak: str = LOWEST) -> PureBidding:
    """Level-k bidding under curved utility u(z) = z**alpha (first-price only;
    the all-pay hierarchy is unchanged by curvature at the levels where the
    closed form applies, and is rejected here).

    With alpha == 1 this is byte-identical to the risk-neutral iteration.
    """
    if spec.format is not Format.FIRST_PRICE:
        raise UnsupportedUtilityError("curved-utility levels are supported for first-price only")
    l0 = l0 or Level0Spec.uniform()
    return iterate_levels(spec, l0, k, tiebreak).by_level(k)
