"""Domain types and payoff primitives for discrete auctions.

Everything here is exact: probabilities and payoffs are ``fractions.Fraction``
whenever the utility exponent is 1, so downstream equilibrium checks can test
equalities with zero tolerance.  Values live on {0, ..., x}; bids live on an
integer grid containing 0 (step 1 in the fine treatment, multiples of 5 in the
coarse one).  A bid only survives with pass-through probability ``p``; a
surviving bid wins iff it is strictly higher than every surviving opposing bid
(ties lose, including 0 vs 0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    InvalidBidError,
    InvalidJumpError,
    InvalidValueError,
    NonRepresentableStrategyError,
    PayoffDomainError,
    SpecValidationError,
    UnsupportedUtilityError,
)

__all__ = [
    "Format",
    "AuctionSpec",
    "JumpVector",
    "BehaviouralStrategy",
    "PureBidding",
    "win_probability",
    "expected_payoff",
    "jump_to_strategy",
    "strategy_to_jump",
]


class Format(str, enum.Enum):
    ALL_PAY = "all_pay"
    FIRST_PRICE = "first_price"


def _as_fraction(value) -> Fraction:
    """Coerce ints, strings and floats to Fraction; floats go through their
    decimal repr so that 0.5 means 1/2, not its binary expansion."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class AuctionSpec:
    """One auction game: format, bidder count, value set, bid grid,
    pass-through probability and utility curvature.

    Parameters
    ----------
    format : Format or str
    n : number of bidders, >= 2
    x : maximum valuation; the value set is {0, 1, ..., x}
    bid_grid : ascending integers containing 0 with max <= x
               (defaults to the full step-1 grid {0, ..., x})
    p : probability a submitted bid survives, in (0, 1]; all-pay requires 1
    alpha : utility exponent u(z) = z**alpha; all-pay requires 1
    value_pmf : probabilities over {0, ..., x} (defaults to uniform);
                pass exact rationals or decimal strings, not binary floats
    """

    format: Format
    n: int
    x: int
    bid_grid: tuple[int, ...] = None  # type: ignore[assignment]
    p: Fraction = Fraction(1)
    alpha: float = 1.0
    value_pmf: tuple[Fraction, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "format", Format(self.format))
        if not isinstance(self.n, int) or self.n < 2:
            raise SpecValidationError(f"need an integer n >= 2, got {self.n!r}")
        if not isinstance(self.x, int) or self.x < 0:
            raise SpecValidationError(f"need an integer x >= 0, got {self.x!r}")
        grid = self.bid_grid
        if grid is None:
            grid = tuple(range(self.x + 1))
        else:
            grid = tuple(int(b) for b in grid)
        if not grid or grid[0] != 0:
            raise SpecValidationError("bid grid must contain 0 as its minimum")
        if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
            raise SpecValidationError("bid grid must be strictly increasing")
        if grid[-1] > self.x:
            raise SpecValidationError("bid grid must not exceed the maximum valuation")
        object.__setattr__(self, "bid_grid", grid)

        p = _as_fraction(self.p)
        if not (0 < p <= 1):
            raise SpecValidationError(f"pass-through probability must be in (0, 1], got {p}")
        object.__setattr__(self, "p", p)

        if not self.alpha > 0:
            raise SpecValidationError(f"utility exponent must be positive, got {self.alpha}")
        if self.format is Format.ALL_PAY:
            if p != 1:
                raise SpecValidationError("all-pay auctions do not support bid cancellation (p must be 1)")
            if self.alpha != 1:
                raise UnsupportedUtilityError("all-pay auctions support risk-neutral utility only")

        pmf = self.value_pmf
        if pmf is None:
            pmf = tuple([Fraction(1, self.x + 1)] * (self.x + 1))
        else:
            pmf = tuple(_as_fraction(q) for q in pmf)
            if len(pmf) != self.x + 1:
                raise SpecValidationError(f"value pmf must have {self.x + 1} entries, got {len(pmf)}")
            if any(q < 0 for q in pmf):
                raise SpecValidationError("value pmf entries must be non-negative")
            if sum(pmf) != 1:
                raise SpecValidationError("value pmf must sum to exactly 1")
        object.__setattr__(self, "value_pmf", pmf)

    @property
    def size(self) -> int:
        """Number of possible valuations, x + 1."""
        return self.x + 1

    @property
    def values(self) -> range:
        return range(self.x + 1)

    @property
    def uniform_values(self) -> bool:
        return len(set(self.value_pmf)) == 1

    def grid_index(self, b: int) -> int:
        try:
            return self.bid_grid.index(b)
        except ValueError:
            raise InvalidBidError(f"bid {b} is not on the grid {self.bid_grid[:4]}...") from None

    def check_value(self, v: int) -> int:
        if not (isinstance(v, int) and 0 <= v <= self.x):
            raise InvalidValueError(f"value {v!r} outside {{0, ..., {self.x}}}")
        return v

    def value_cdf_below(self, v: int) -> Fraction:
        """P(valuation < v)."""
        return sum(self.value_pmf[:v], Fraction(0))


@dataclass(frozen=True)
class JumpVector:
    """Strictly increasing sequence (j_1, ..., j_m), one entry per bid-grid
    position that is played, with an implicit j_0 = 0.  Entry i encodes the
    lowest value at which grid bid i appears (its integer part) plus the
    probability that value bids below i (its fractional part)."""

    jumps: tuple[Fraction, ...]

    def __init__(self, jumps: Iterable) -> None:
        js = tuple(_as_fraction(j) for j in jumps)
        if any(j <= 0 for j in js):
            raise InvalidJumpError("jumps must be strictly positive")
        if any(b <= a for a, b in zip(js, js[1:])):
            raise InvalidJumpError("jumps must be strictly increasing")
        object.__setattr__(self, "jumps", js)

    def __len__(self) -> int:
        return len(self.jumps)

    def __iter__(self):
        return iter(self.jumps)

    def __getitem__(self, i):
        return self.jumps[i]


class PureBidding:
    """A deterministic bidding function: one grid bid per value."""

    __slots__ = ("bids",)

    def __init__(self, bids: Sequence[int]):
        self.bids = tuple(int(b) for b in bids)

    def __call__(self, v: int) -> int:
        return self.bids[v]

    def __eq__(self, other) -> bool:
        return isinstance(other, PureBidding) and self.bids == other.bids

    def __hash__(self) -> int:
        return hash(self.bids)

    def __repr__(self) -> str:
        return f"PureBidding({list(self.bids)!r})"

    def max_bid(self) -> int:
        return max(self.bids)

    def as_strategy(self, spec: AuctionSpec) -> "BehaviouralStrategy":
        for b in set(self.bids):
            spec.grid_index(b)
        return BehaviouralStrategy(spec, [{b: Fraction(1)} for b in self.bids])


class BehaviouralStrategy:
    """Per-value probability distributions over the bid grid.

    The per-value pmfs are exact rationals and must each sum to 1.  The class
    does not force monotone or gapless supports; those are equilibrium
    properties checked where needed (`strategy_to_jump`).
    """

    __slots__ = ("spec", "_pmfs")

    def __init__(self, spec: AuctionSpec, pmfs: Sequence[Mapping[int, Fraction]]):
        if len(pmfs) != spec.size:
            raise SpecValidationError(f"need one bid pmf per value ({spec.size}), got {len(pmfs)}")
        clean = []
        for v, pmf in enumerate(pmfs):
            entries = {}
            for b, q in pmf.items():
                spec.grid_index(b)
                q = _as_fraction(q)
                if q < 0:
                    raise SpecValidationError(f"negative probability at value {v}, bid {b}")
                if q > 0:
                    entries[int(b)] = q
            if sum(entries.values(), Fraction(0)) != 1:
                raise SpecValidationError(f"bid probabilities at value {v} must sum to exactly 1")
            clean.append(dict(sorted(entries.items())))
        self.spec = spec
        self._pmfs = tuple(clean)

    def pmf(self, v: int) -> Mapping[int, Fraction]:
        return dict(self._pmfs[v])

    def prob(self, v: int, b: int) -> Fraction:
        return self._pmfs[v].get(b, Fraction(0))

    def support(self, v: int) -> tuple[int, ...]:
        return tuple(self._pmfs[v])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BehaviouralStrategy)
            and self.spec == other.spec
            and self._pmfs == other._pmfs
        )

    def __repr__(self) -> str:
        mixed = sum(1 for p in self._pmfs if len(p) > 1)
        return f"BehaviouralStrategy(values={self.spec.size}, mixing_values={mixed})"

    def is_pure(self) -> bool:
        return all(len(p) == 1 for p in self._pmfs)

    def as_pure(self) -> PureBidding | None:
        if not self.is_pure():
            return None
        return PureBidding([next(iter(p)) for p in self._pmfs])

    def prob_value_bids_below(self, v: int, b: int) -> Fraction:
        """P(bid < b | value v)."""
        return sum((q for bb, q in self._pmfs[v].items() if bb < b), Fraction(0))

    def prob_bid_below(self, b: int) -> Fraction:
        """P(bid < b) for one bidder following this strategy, marginalised
        over the value distribution."""
        return sum(
            (self.spec.value_pmf[v] * self.prob_value_bids_below(v, b) for v in self.spec.values),
            Fraction(0),
        )

    def bid_pmf(self) -> dict[int, Fraction]:
        """Marginal bid distribution over the grid."""
        out: dict[int, Fraction] = {}
        for v in self.spec.values:
            qv = self.spec.value_pmf[v]
            if qv == 0:
                continue
            for b, q in self._pmfs[v].items():
                out[b] = out.get(b, Fraction(0)) + qv * q
        return dict(sorted(out.items()))

    def expected_bid(self, v: int) -> Fraction:
        return sum((Fraction(b) * q for b, q in self._pmfs[v].items()), Fraction(0))

    def mean_bid(self) -> Fraction:
        return sum(
            (self.spec.value_pmf[v] * self.expected_bid(v) for v in self.spec.values),
            Fraction(0),
        )


def win_probability(spec: AuctionSpec, opponents: BehaviouralStrategy, b: int) -> Fraction:
    """Probability that a surviving bid ``b`` beats all n-1 opponents.

    Equals (1 - p + p*F(b-))**(n-1) where F(b-) is the chance a single
    opponent's bid is strictly below b; a cancelled opposing bid can never
    win.  The bidder's own survival factor is deliberately left out: it is a
    positive constant across bids, so every argmax is unchanged.
    """
    spec.grid_index(b)
    below = opponents.prob_bid_below(b)
    return (1 - spec.p + spec.p * below) ** (spec.n - 1)


def expected_payoff(spec: AuctionSpec, opponents: BehaviouralStrategy, v: int, b: int):
    """Expected payoff of bidding ``b`` at value ``v`` against ``opponents``.

    All-pay: v * P(win|b) - b; the bid is paid win or lose.
    First-price: u(v - b) * P(win|b) with u(z) = z**alpha; own-survival
    factor omitted (argmax-invariant).  Exact Fraction when alpha == 1,
    float otherwise.
    """
    spec.check_value(v)
    w = win_probability(spec, opponents, b)
    if spec.format is Format.ALL_PAY:
        return Fraction(v) * w - b
    if spec.alpha == 1:
        return Fraction(v - b) * w
    if b > v:
        raise PayoffDomainError(
            f"bid {b} above value {v}: curved utility of a negative payoff is undefined"
        )
    return float(v - b) ** spec.alpha * float(w)


def jump_to_strategy(spec: AuctionSpec, j: JumpVector | Iterable) -> BehaviouralStrategy:
    """Build the unique monotone, gapless strategy with support {0} at value 0
    that is consistent with the jump vector ``j``.

    P(bid below grid position i | v) = clamp(j_i - v, 0, 1); the per-value
    pmfs fall out as consecutive differences.  An empty vector maps to
    "everyone bids 0".
    """
    if not isinstance(j, JumpVector):
        j = JumpVector(j)
    jumps = j.jumps
    size = Fraction(spec.size)
    if jumps:
        if jumps[0] < 1:
            raise InvalidJumpError(
                f"first jump {jumps[0]} < 1 would make value 0 mix; no valid strategy exists"
            )
        if jumps[-1] > size:
            raise InvalidJumpError(f"jump {jumps[-1]} exceeds the number of valuations {size}")
        if math.floor(jumps[-1]) > spec.x:
            raise InvalidJumpError("last jump has no value left to open its bid")
    if len(jumps) >= len(spec.bid_grid):
        raise InvalidJumpError(
            f"{len(jumps)} jumps but only {len(spec.bid_grid) - 1} positive grid bids"
        )
    m = len(jumps)
    pmfs = []
    for v in spec.values:
        prev = Fraction(0)
        pmf: dict[int, Fraction] = {}
        for i, ji in enumerate(jumps, start=1):
            below = min(max(ji - v, Fraction(0)), Fraction(1))
            q = below - prev
            if q > 0:
                pmf[spec.bid_grid[i - 1]] = q
            prev = below
        q = 1 - prev
        if q > 0:
            pmf[spec.bid_grid[m]] = q
        pmfs.append(pmf)
    return BehaviouralStrategy(spec, pmfs)


def strategy_to_jump(spec: AuctionSpec, strategy: BehaviouralStrategy) -> JumpVector:
    """Inverse of :func:`jump_to_strategy`.

    Requires support {0} at value 0, monotone supports and a gapless union of
    supports starting at grid position 0; raises
    ``NonRepresentableStrategyError`` otherwise.
    """
    if strategy.support(0) != (spec.bid_grid[0],):
        raise NonRepresentableStrategyError("support at value 0 must be exactly {0}")
    prev_max = 0
    used: set[int] = set()
    for v in spec.values:
        sup = strategy.support(v)
        idx = [spec.grid_index(b) for b in sup]
        if idx != sorted(idx) or any(i2 - i1 != 1 for i1, i2 in zip(idx, idx[1:])):
            raise NonRepresentableStrategyError(f"support at value {v} is not consecutive on the grid")
        if idx[0] < prev_max:
            raise NonRepresentableStrategyError(
                f"supports not monotone: value {v} bids below a lower value's bid"
            )
        prev_max = idx[-1]
        used.update(idx)
    if used != set(range(max(used) + 1)):
        raise NonRepresentableStrategyError("union of supports has a gap on the bid grid")

    m = max(used)
    jumps = []
    for i in range(1, m + 1):
        v_i = next(
            v for v in spec.values if strategy.prob(v, spec.bid_grid[i]) > 0
        )
        jumps.append(Fraction(v_i) + strategy.prob_value_bids_below(v_i, spec.bid_grid[i]))
    return JumpVector(jumps)
