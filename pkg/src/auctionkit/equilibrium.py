"""Symmetric-equilibrium computation for discrete auctions.

The solver walks the bid grid, fixing one jump at a time: jump i is the
minimum j in (j_{i-1}, S] at which the value floor(j) weakly prefers grid bid
i to grid bid i-1, given that opposing behaviour below bid i is already pinned
down by the earlier jumps.  For two bidders every cell equation is linear in
j, so the whole chain is exact rational arithmetic and the output can be
verified to have exactly zero regret.  For three or more bidders the cell
equations are higher-degree polynomials whose roots may be irrational; those
jumps are bracketed by exact-sign bisection and reported as approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .core import (
    AuctionSpec,
    BehaviouralStrategy,
    Format,
    JumpVector,
    jump_to_strategy,
)
from .errors import SpecValidationError, UnsupportedUtilityError

__all__ = [
    "EquilibriumResult",
    "solve_equilibrium",
    "verify_equilibrium",
    "continuous_equilibrium",
    "BISECTION_PRECISION",
]

# bracket width for irrational jumps (n >= 3): 2**-120 ~ 7.5e-37
BISECTION_PRECISION = Fraction(1, 2**120)


@dataclass(frozen=True)
class EquilibriumResult:
    """Solver output: jumps, the induced strategy, and its verification.

    ``verified`` is True only when ``max_regret`` is exactly zero, which
    requires the jump chain to be exact (always the case for n == 2).
    """

    jumps: JumpVector
    strategy: BehaviouralStrategy
    verified: bool
    max_regret: Fraction
    exact: bool = True
    notes: tuple[str, ...] = ()


def _win_factor(spec: AuctionSpec, below: Fraction) -> Fraction:
    """(1 - p + p*F)^(n-1) given F = P(single opposing bid strictly below)."""
    return (1 - spec.p + spec.p * below) ** (spec.n - 1)


def _payoff(spec: AuctionSpec, v: int, b: int, below: Fraction) -> Fraction:
    if spec.format is Format.ALL_PAY:
        return Fraction(v) * _win_factor(spec, below) - b
    return Fraction(v - b) * _win_factor(spec, below)


def _below_at(spec: AuctionSpec, j: Fraction) -> Fraction:
    """P(opposing bid < current grid bid) when the governing jump is j:
    all values strictly below floor(j), plus the mixing slice at floor(j)."""
    u = floor(j)
    return spec.value_cdf_below(u) + spec.value_pmf[u] * (j - u) if u <= spec.x else Fraction(1)

def _solve_linear_cell(g_lo, g_hi, lo, hi):
    """Exact root of the linear function through (lo, g_lo), (hi, g_hi)."""
    return lo + (hi - lo) * (-g_lo) / (g_hi - g_lo)


def solve_equilibrium(spec: AuctionSpec) -> EquilibriumResult:
    """Construct the symmetric equilibrium by the minimum-jump recursion.

    Returns the jumps, the induced behavioural strategy, and the outcome of
    an independent full-grid best-response check.  Two-bidder solves are
    exact and verify to zero regret; step-1 grids with n == 2 always come
    back ``verified``.  Coarse-grid or many-bidder outputs are never silently
    trusted: they carry ``verified=False`` plus a note whenever the check
    does not return exactly zero.
    """
    if spec.alpha != 1:
        raise UnsupportedUtilityError("equilibrium solving supports risk-neutral utility only")
    notes: list[str] = []
    if spec.format is Format.FIRST_PRICE and spec.p == 1:
        notes.append("pass-through probability 1: uniqueness is only guaranteed for p < 1")
    step = {spec.bid_grid[i + 1] - spec.bid_grid[i] for i in range(len(spec.bid_grid) - 1)}
    if step and step != {1}:
        notes.append("coarse bid grid: accepting the output only because verification passes")

    size = Fraction(spec.size)
    jumps: list[Fraction] = []
    exact = True
    j_prev = Fraction(0)
    for i in range(1, len(spec.bid_grid)):
        b_hi = spec.bid_grid[i]
        b_lo = spec.bid_grid[i - 1]
        below_prev = _below_at(spec, j_prev) if jumps else Fraction(0)
        pay_prev = lambda v: _payoff(spec, v, b_lo, below_prev)  # noqa: E731

        found: Fraction | None = None
        for u in range(max(floor(j_prev), 0), spec.x + 1):
            lo = max(Fraction(u), j_prev)
            hi = min(Fraction(u + 1), size)
            if lo >= hi:
                continue

            def g(j: Fraction, _u=u) -> Fraction:
                below = spec.value_cdf_below(_u) + spec.value_pmf[_u] * (j - _u)
                return _payoff(spec, _u, b_hi, below) - pay_prev(_u)

            g_lo = g(lo)
            if g_lo >= 0:
                if lo > j_prev:
                    found = lo
                    break
                # g is strictly negative at j_prev itself (same win odds, higher
                # bid), so equality here means the cell opens exactly at j_prev;
                # the true minimum lies beyond it.
                continue
            if spec.value_pmf[u] == 0:
                continue  # g constant on the cell and negative at its base
            g_hi = g(hi)
            if g_hi <= 0:
                continue  # root at or past the right edge belongs to later cells
            if spec.n == 2:
                found = _solve_linear_cell(g_lo, g_hi, lo, hi)
            else:
                a, b = lo, hi
                while b - a > BISECTION_PRECISION:
                    mid = (a + b) / 2
                    if g(mid) >= 0:
                        b = mid
                    else:
                        a = mid
                found = b
                exact = False
            break
        if found is None:
            break
        jumps.append(found)
        j_prev = found

    jv = JumpVector(jumps) if jumps else JumpVector(())
    strategy = jump_to_strategy(spec, jv)
    regret = verify_equilibrium(spec, strategy)
    verified = exact and regret == 0
    if not exact:
        notes.append(
            "jumps for n >= 3 may be irrational; bracketed to width 2^-120, regret is not exactly zero"
        )
    if regret > 0 and exact:
        notes.append("verification found positive regret; do not use this output as an equilibrium")
    return EquilibriumResult(
        jumps=jv,
        strategy=strategy,
        verified=verified,
        max_regret=regret,
        exact=exact,
        notes=tuple(notes),
    )


def verify_equilibrium(spec: AuctionSpec, strategy: BehaviouralStrategy) -> Fraction:
    """Largest best-response shortfall across values and supported bids.

    For every value with positive probability and every bid in its support,
    compares the payoff with the best payoff available anywhere on the grid;
    returns the maximum gap (exactly 0 iff the strategy is a symmetric
    equilibrium).  Independent of the solver: recomputes win odds from the
    strategy itself.
    """
    if spec.alpha != 1:
        raise UnsupportedUtilityError("verification supports risk-neutral utility only")
    win = {b: _win_factor(spec, strategy.prob_bid_below(b)) for b in spec.bid_grid}

    def pay(v: int, b: int) -> Fraction:
        if spec.format is Format.ALL_PAY:
            return Fraction(v) * win[b] - b
        return Fraction(v - b) * win[b]

    worst = Fraction(0)
    for v in spec.values:
        if spec.value_pmf[v] == 0:
            continue
        best = max(pay(v, b) for b in spec.bid_grid)
        for b in strategy.support(v):
            shortfall = best - pay(v, b)
            if shortfall > worst:
                worst = shortfall
    return worst


def continuous_equilibrium(spec: AuctionSpec, v: float) -> float:
    """Closed-form continuous-model equilibrium bid at value v.

    All-pay: ((n-1)/n) * v**n / x**(n-1).  First-price with pass-through p:
    ((n-1)/n)*v - (x(1-p)/(np)) * [1 - ((1-p)/(1-p+p v/x))**(n-1)], which
    reduces to v(n-1)/n at p = 1.
    """
    if not 0 <= v <= spec.x:
        raise SpecValidationError(f"value {v} outside [0, {spec.x}]")
    if spec.x == 0:
        return 0.0
    n, x, p = spec.n, float(spec.x), float(spec.p)
    if spec.format is Format.ALL_PAY:
        return (n - 1) / n * v**n / x ** (n - 1)
    if p == 1.0:
        return v * (n - 1) / n
    q = 1.0 - p
    return (n - 1) / n * v - x * q / (n * p) * (1.0 - (q / (q + p * v / x)) ** (n - 1))
