"""Stochastic choice model, finite-mixture likelihood and fitting.

Bidders of a given behavioural type submit noisy versions of their type's
predicted bid: the chance of bid b at value v is a discretized normal kernel
centred on the prediction and normalized over the whole bid grid.  A dataset
of (subject, round, value, bid) records is scored by mixing type likelihoods
with population shares, grouping either whole subjects or subject-rounds.
Fitting is EM with an inner one-dimensional noise update per type and
multiple random restarts; all randomness is seeded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .core import AuctionSpec, Format, PureBidding
from .equilibrium import solve_equilibrium
from .errors import (
    ConvergenceError,
    DataError,
    InvalidBidError,
    ParameterError,
)
from .levelk import Level0Spec, iterate_levels

__all__ = [
    "BidRecord",
    "BidderType",
    "TypeSet",
    "Grouping",
    "MixtureFit",
    "JackknifeSE",
    "equilibrium_type",
    "levelk_type",
    "choice_prob",
    "likelihood",
    "fit_mixture",
    "bic",
    "jackknife_se",
    "assign_levels",
    "correlate",
    "simulate_dataset",
    "crra_from_bret",
    "prediction_rmse",
]

SIGMA_MIN = 1e-3
SIGMA_MAX = 1e4


@dataclass(frozen=True)
class BidRecord:
    subject_id: str
    round: int
    treatment: str
    format: Format
    value: int
    bid: int


class Grouping(str, enum.Enum):
    SUBJECT = "subject"
    SUBJECT_ROUND = "round"


@dataclass(frozen=True)
class BidderType:
    """A behavioural type: a name, one predicted bid per value, and (for
    level-k types) the level it represents."""

    name: str
    predictions: tuple[float, ...]
    level: int | None = None

    def predict(self, v: int) -> float:
        return self.predictions[v]


class TypeSet:
    """Ordered collection of behavioural types sharing one value set."""

    def __init__(self, types: Sequence[BidderType]):
        if not types:
            raise ParameterError("need at least one behavioural type")
        sizes = {len(t.predictions) for t in types}
        if len(sizes) != 1:
            raise ParameterError("all types must predict over the same value set")
        self.types = tuple(types)

    def __len__(self) -> int:
        return len(self.types)

    def __iter__(self):
        return iter(self.types)

    def __getitem__(self, i) -> BidderType:
        return self.types[i]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.types)


def equilibrium_type(spec: AuctionSpec) -> BidderType:
    """Equilibrium as a stochastic-choice type; the predicted bid at each
    value is the mean of the (possibly mixed) equilibrium bid distribution."""
    result = solve_equilibrium(spec)
    preds = tuple(float(result.strategy.expected_bid(v)) for v in spec.values)
    return BidderType("equilibrium", preds, level=None)


def levelk_type(
    spec: AuctionSpec, k: int, l0: Level0Spec | None = None, tiebreak: str = "low"
) -> BidderType:
    l0 = l0 or Level0Spec.uniform()
    bids = iterate_levels(spec, l0, k, tiebreak).by_level(k)
    return BidderType(f"level{k}", tuple(float(b) for b in bids.bids), level=k)


def choice_prob(b: int, v: int, btype: BidderType, sigma: float, grid: Sequence[int]) -> float:
    """P(bid = b | value v, type, noise sigma): a normal kernel centred on the
    type's prediction, normalized over the grid.  Uniform as sigma grows,
    a point mass on the predicted bid as sigma shrinks."""
    if sigma <= 0:
        raise ParameterError(f"noise parameter must be positive, got {sigma}")
    garr = np.asarray(grid, dtype=float)
    if b not in set(int(g) for g in grid):
        raise InvalidBidError(f"bid {b} is not on the grid")
    pred = btype.predict(v)
    logk = -0.5 * ((garr - pred) / sigma) ** 2
    return float(np.exp(-0.5 * ((b - pred) / sigma) ** 2 - logsumexp(logk)))


def _log_choice_matrix(values, bids, predictions, sigma, grid):
    """Log choice probability per record, vectorized.

    values, bids: int arrays (records); predictions: per-value array.
    """
    garr = np.asarray(grid, dtype=float)
    preds = np.asarray(predictions, dtype=float)
    # log normalizer per value, then picked per record
    logz = logsumexp(-0.5 * ((garr[None, :] - preds[:, None]) / sigma) ** 2, axis=1)
    return -0.5 * ((bids - preds[values]) / sigma) ** 2 - logz[values]


class _Prepared:
    """Dataset unpacked into arrays plus the group index."""

    def __init__(self, dataset: Sequence[BidRecord], grouping: Grouping, n_values: int, grid):
        if not dataset:
            raise DataError("empty dataset")
        self.values = np.array([r.value for r in dataset], dtype=int)
        self.bids = np.array([r.bid for r in dataset], dtype=int)
        gridset = {int(g) for g in grid}
        for i, r in enumerate(dataset):
            if not 0 <= r.value < n_values:
                raise DataError(f"value {r.value} out of range", line=i + 1, field="value")
            if r.bid not in gridset:
                raise DataError(f"bid {r.bid} not on the bid grid", line=i + 1, field="bid")
        if grouping is Grouping.SUBJECT:
            keys = [r.subject_id for r in dataset]
        else:
            keys = [(r.subject_id, r.round) for r in dataset]
        order = sorted(set(keys), key=lambda k: str(k))
        index = {k: i for i, k in enumerate(order)}
        self.group_keys = order
        self.group_of = np.array([index[k] for k in keys], dtype=int)
        self.n_groups = len(order)
        self.grid = tuple(int(g) for g in grid)
        self.subject_of_group = [
            k if grouping is Grouping.SUBJECT else k[0] for k in order
        ]


def _group_type_loglik(prep: _Prepared, typeset: TypeSet, sigmas) -> np.ndarray:
    """Matrix L[g, k] = log P(group g's bids | type k, sigma_k)."""
    out = np.zeros((prep.n_groups, len(typeset)))
    for k, (bt, sig) in enumerate(zip(typeset, sigmas)):
        lp = _log_choice_matrix(prep.values, prep.bids, bt.predictions, sig, prep.grid)
        out[:, k] = np.bincount(prep.group_of, weights=lp, minlength=prep.n_groups)
    return out


def likelihood(
    dataset: Sequence[BidRecord],
    typeset: TypeSet,
    shares: Sequence[float],
    sigmas: Sequence[float],
    grouping: Grouping = Grouping.SUBJECT,
    grid: Sequence[int] | None = None,
) -> float:
    """Mixture log-likelihood: per group, type likelihoods are the product of
    per-bid choice probabilities; groups mix across types with the population
    shares and multiply across the sample."""
    shares = np.asarray(shares, dtype=float)
    if len(shares) != len(typeset) or len(sigmas) != len(typeset):
        raise ParameterError("need one share and one sigma per type")
    if abs(shares.sum() - 1.0) > 1e-9 or (shares < -1e-12).any():
        raise ParameterError("shares must be non-negative and sum to 1")
    if any(s <= 0 for s in sigmas):
        raise ParameterError("sigmas must be positive")
    n_values = len(typeset[0].predictions)
    prep = _Prepared(dataset, grouping, n_values, grid or _infer_grid(dataset, typeset))
    lmat = _group_type_loglik(prep, typeset, sigmas)
    with np.errstate(divide="ignore"):
        logshares = np.log(shares)
    return float(logsumexp(lmat + logshares[None, :], axis=1).sum())


def _infer_grid(dataset, typeset) -> tuple[int, ...]:
    """The observed-bid grid: prefer the step pattern in the data (exact grid
    knowledge lives with the caller via `fit_mixture(grid=...)`)."""
    bids = sorted({r.bid for r in dataset})
    maxpred = max(max(t.predictions) for t in typeset)
    top = max(bids[-1], int(math.ceil(maxpred)))
    positive = [b for b in bids if b > 0]
    step = math.gcd(*positive) if positive else 1
    return tuple(range(0, top + 1, step))


@dataclass(frozen=True)
class MixtureFit:
    """Fitted mixture: shares, per-type noise, log-likelihood and BIC.

    ``sigmas`` always has one entry per type; ``identified_sigmas`` masks the
    entries whose share is zero (the noise of an absent type is meaningless).
    """

    typeset_names: tuple[str, ...]
    shares: tuple[float, ...]
    sigmas: tuple[float, ...]
    ll: float
    bic: float
    n_obs: int
    q: int
    grouping: Grouping
    converged: bool
    n_iter: int
    ll_path: tuple[float, ...] = field(repr=False, default=())
    sigma_shared: bool = False

    @property
    def identified_sigmas(self) -> tuple[float | None, ...]:
        return tuple(
            s if p > 1e-9 else None for s, p in zip(self.sigmas, self.shares)
        )

    def to_dict(self) -> dict:
        return {
            "types": list(self.typeset_names),
            "shares": list(self.shares),
            "sigmas": [s for s in self.identified_sigmas],
            "ll": self.ll,
            "bic": self.bic,
            "n_obs": self.n_obs,
            "n_parameters": self.q,
            "grouping": self.grouping.value,
            "converged": self.converged,
        }


def bic(ll: float, q: int, n_obs: int) -> float:
    """q*ln(n_obs) - 2*ll with n_obs the number of bid observations."""
    if n_obs <= q:
        raise ParameterError(f"degenerate fit: {n_obs} observations for {q} parameters")
    return q * math.log(n_obs) - 2.0 * ll


def _best_sigma(prep, bt, weights, sigma0):
    """Maximize the weighted per-record log-likelihood of one type in sigma."""
    w = weights[prep.group_of]
    if w.sum() <= 1e-300:
        return sigma0  # type absent: keep the old noise, it is unidentified
    preds = np.asarray(bt.predictions)
    resid2 = (prep.bids - preds[prep.values]) ** 2
    ssr = float((w * resid2).sum())
    cnt = np.bincount(prep.values, weights=w, minlength=len(preds))
    garr = np.asarray(prep.grid, dtype=float)
    dev2 = (garr[None, :] - preds[:, None]) ** 2  # per value, per grid bid

    def neg(logsig):
        sig = math.exp(logsig)
        logz = logsumexp(-0.5 * dev2 / sig**2, axis=1)
        return 0.5 * ssr / sig**2 + float((cnt * logz).sum())

    res = minimize_scalar(
        neg, bounds=(math.log(SIGMA_MIN), math.log(SIGMA_MAX)), method="bounded",
        options={"xatol": 1e-10},
    )
    return math.exp(res.x)


def fit_mixture(
    dataset: Sequence[BidRecord],
    typeset: TypeSet,
    grouping: Grouping = Grouping.SUBJECT,
    n_starts: int = 10,
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-8,
    sigma_shared: bool = False,
    grid: Sequence[int] | None = None,
) -> MixtureFit:
    """Maximum-likelihood mixture fit by EM with random restarts.

    Each restart draws shares from a flat Dirichlet and noise levels log-
    uniformly, then alternates type posteriors with share and noise updates
    until the relative log-likelihood change drops below ``tol``.  The best
    converged restart wins; if no restart converges the error carries the
    best fit found so far.  Deterministic for a given seed.
    """
    K = len(typeset)
    n_values = len(typeset[0].predictions)
    prep = _Prepared(dataset, grouping, n_values, grid or _infer_grid(dataset, typeset))
    rng = np.random.default_rng(seed)
    n_obs = len(dataset)
    q = (K - 1) + (1 if sigma_shared else K)

    best = None
    best_unconverged = None
    for _ in range(n_starts):
        shares = rng.dirichlet(np.ones(K))
        sigmas = list(np.exp(rng.uniform(math.log(0.5), math.log(40.0), size=K)))
        if sigma_shared:
            sigmas = [sigmas[0]] * K
        ll_prev = -np.inf
        ll_path = []
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            lmat = _group_type_loglik(prep, typeset, sigmas)
            with np.errstate(divide="ignore"):
                joint = lmat + np.log(np.maximum(shares, 1e-300))[None, :]
            norm = logsumexp(joint, axis=1)
            ll = float(norm.sum())
            ll_path.append(ll)
            post = np.exp(joint - norm[:, None])
            shares = post.mean(axis=0)
            if sigma_shared:
                # one noise level across types: weight records by their
                # group's total posterior per type, then pool
                pooled = _pooled_sigma(prep, typeset, post, sigmas[0])
                sigmas = [pooled] * K
            else:
                sigmas = [
                    _best_sigma(prep, bt, post[:, k], sigmas[k])
                    for k, bt in enumerate(typeset)
                ]
            if ll - ll_prev < tol * (1.0 + abs(ll)) and it > 1:
                converged = True
                break
            ll_prev = ll
        # score the final parameters so the reported LL matches them
        lmat = _group_type_loglik(prep, typeset, sigmas)
        with np.errstate(divide="ignore"):
            joint = lmat + np.log(np.maximum(shares, 1e-300))[None, :]
        ll_path.append(float(logsumexp(joint, axis=1).sum()))
        fit = MixtureFit(
            typeset_names=typeset.names,
            shares=tuple(float(s) for s in shares),
            sigmas=tuple(float(s) for s in sigmas),
            ll=ll_path[-1],
            bic=bic(ll_path[-1], q, n_obs),
            n_obs=n_obs,
            q=q,
            grouping=grouping,
            converged=converged,
            n_iter=it,
            ll_path=tuple(ll_path),
            sigma_shared=sigma_shared,
        )
        if converged and (best is None or fit.ll > best.ll):
            best = fit
        if not converged and (best_unconverged is None or fit.ll > best_unconverged.ll):
            best_unconverged = fit
    if best is None:
        raise ConvergenceError(
            f"no EM restart converged within {max_iter} iterations",
            best_so_far=best_unconverged,
        )
    return best


def _pooled_sigma(prep, typeset, post, sigma0):
    parts_ssr = 0.0
    cnts = []
    preds_list = []
    for k, bt in enumerate(typeset):
        w = post[:, k][prep.group_of]
        preds = np.asarray(bt.predictions)
        parts_ssr += float((w * (prep.bids - preds[prep.values]) ** 2).sum())
        cnts.append(np.bincount(prep.values, weights=w, minlength=len(preds)))
        preds_list.append(preds)
    garr = np.asarray(prep.grid, dtype=float)

    def neg(logsig):
        sig = math.exp(logsig)
        total = 0.5 * parts_ssr / sig**2
        for cnt, preds in zip(cnts, preds_list):
            logz = logsumexp(-0.5 * ((garr[None, :] - preds[:, None]) / sig) ** 2, axis=1)
            total += float((cnt * logz).sum())
        return total

    res = minimize_scalar(
        neg, bounds=(math.log(SIGMA_MIN), math.log(SIGMA_MAX)), method="bounded",
        options={"xatol": 1e-10},
    )
    return math.exp(res.x)


@dataclass(frozen=True)
class JackknifeSE:
    shares_se: tuple[float, ...]
    sigmas_se: tuple[float, ...]
    n_subjects: int


def jackknife_se(
    dataset: Sequence[BidRecord],
    typeset: TypeSet,
    grouping: Grouping = Grouping.SUBJECT,
    seed: int = 0,
    n_starts: int = 3,
    sigma_shared: bool = False,
    grid: Sequence[int] | None = None,
) -> JackknifeSE:
    """Leave-one-subject-out standard errors.

    The resampling unit is the subject regardless of grouping.  Each refit is
    a fresh (seeded) EM; the usual pseudo-value formula
    sqrt((J-1)/J * sum (theta_j - theta_bar)^2) gives the SEs.
    """
    subjects = sorted({r.subject_id for r in dataset})
    if len(subjects) < 2:
        raise ParameterError("jack-knife needs at least two subjects")
    thetas = []
    for j, left_out in enumerate(subjects):
        reduced = [r for r in dataset if r.subject_id != left_out]
        fit = fit_mixture(
            reduced, typeset, grouping,
            n_starts=n_starts, seed=seed + 1000 + j,
            sigma_shared=sigma_shared, grid=grid,
        )
        thetas.append(list(fit.shares) + list(fit.sigmas))
    arr = np.asarray(thetas)
    J = len(subjects)
    se = np.sqrt((J - 1) / J * ((arr - arr.mean(axis=0)) ** 2).sum(axis=0))
    K = len(typeset)
    return JackknifeSE(tuple(se[:K]), tuple(se[K:]), J)


@dataclass(frozen=True)
class LevelAssignment:
    level: int
    sigma: float
    ll: float
    tied: bool


def assign_levels(
    dataset: Sequence[BidRecord],
    typeset: TypeSet,
    grid: Sequence[int] | None = None,
) -> dict[str, LevelAssignment]:
    """Per-subject maximum-likelihood level: for each subject, the (level,
    noise) pair maximizing the likelihood of their whole bid vector.  Exact
    likelihood ties across levels report the smallest level, flagged."""
    if any(t.level is None for t in typeset):
        raise ParameterError("per-subject level assignment needs a levels-only typeset")
    grid = tuple(grid) if grid else _infer_grid(dataset, typeset)
    by_subject: dict[str, list[BidRecord]] = {}
    for r in dataset:
        by_subject.setdefault(r.subject_id, []).append(r)
    out: dict[str, LevelAssignment] = {}
    for sid in sorted(by_subject):
        records = by_subject[sid]
        prep = _Prepared(records, Grouping.SUBJECT, len(typeset[0].predictions), grid)
        scored = []
        for bt in typeset:
            sig = _best_sigma(prep, bt, np.ones(1), 5.0)
            lmat = _group_type_loglik(prep, TypeSet([bt]), [sig])
            scored.append((float(lmat[0, 0]), bt.level, sig))
        best_ll = max(s[0] for s in scored)
        tied_levels = sorted(lvl for ll, lvl, _ in scored if ll >= best_ll - 1e-9)
        level = tied_levels[0]
        sig = next(s for ll, lvl, s in scored if lvl == level)
        out[sid] = LevelAssignment(level, sig, best_ll, tied=len(tied_levels) > 1)
    return out


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    ci_low: float
    ci_high: float
    n: int


def correlate(
    levels_a: Mapping[str, int],
    levels_b: Mapping[str, int],
    n_boot: int = 2000,
    seed: int = 0,
) -> CorrelationResult:
    """Pearson correlation of two per-subject level assignments, with a
    seeded bootstrap percentile confidence interval."""
    common = sorted(set(levels_a) & set(levels_b))
    if len(common) < 3:
        raise ParameterError("need at least three common subjects to correlate")
    a = np.array([levels_a[s] for s in common], dtype=float)
    b = np.array([levels_b[s] for s in common], dtype=float)

    def pearson(u, v):
        su, sv = u.std(), v.std()
        if su == 0 or sv == 0:
            return 0.0
        return float(((u - u.mean()) * (v - v.mean())).mean() / (su * sv))

    r = pearson(a, b)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, len(common), len(common))
        boots.append(pearson(a[idx], b[idx]))
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return CorrelationResult(r, float(lo), float(hi), len(common))


def simulate_dataset(
    spec: AuctionSpec,
    typeset: TypeSet,
    shares: Sequence[float],
    sigmas: Sequence[float],
    n_subjects: int,
    rounds: int = 2,
    seed: int = 0,
    grouping: Grouping = Grouping.SUBJECT,
    treatment: str = "T1",
    values_per_round: int = 10,
) -> list[BidRecord]:
    """Draw a synthetic bid dataset from the stochastic choice model.

    One type per subject (or per subject-round under round grouping), values
    uniform on the value set, bids from the noisy-choice kernel; sigma 0 is
    allowed and produces the grid bid nearest the prediction.  Deterministic
    for a given seed.
    """
    shares = np.asarray(shares, dtype=float)
    if abs(shares.sum() - 1.0) > 1e-9:
        raise ParameterError("shares must sum to 1")
    if len(shares) != len(typeset) or len(sigmas) != len(typeset):
        raise ParameterError("need one share and one sigma per type")
    rng = np.random.default_rng(seed)
    garr = np.asarray(spec.bid_grid, dtype=float)
    records = []
    for s in range(n_subjects):
        sid = f"S{s:03d}"
        type_idx = int(rng.choice(len(typeset), p=shares))
        for rd in range(1, rounds + 1):
            if grouping is Grouping.SUBJECT_ROUND:
                type_idx = int(rng.choice(len(typeset), p=shares))
            bt, sig = typeset[type_idx], float(sigmas[type_idx])
            values = rng.integers(0, spec.x + 1, size=values_per_round)
            for v in values:
                pred = bt.predict(int(v))
                if sig == 0.0:
                    b = int(garr[np.argmin(np.abs(garr - pred))])
                else:
                    logk = -0.5 * ((garr - pred) / sig) ** 2
                    pmf = np.exp(logk - logsumexp(logk))
                    pmf /= pmf.sum()
                    b = int(rng.choice(spec.bid_grid, p=pmf))
                records.append(
                    BidRecord(sid, rd, treatment, spec.format, int(v), b)
                )
    return records


def crra_from_bret(k_boxes: int, n_boxes: int) -> float:
    """Utility-curvature exponent implied by a bomb-task box count: the
    curvature for which collecting k of n boxes is optimal, alpha = k/(n-k).
    Collecting half the boxes is risk neutral (alpha = 1)."""
    if not (isinstance(k_boxes, int) and isinstance(n_boxes, int)):
        raise ParameterError("box counts must be integers")
    if not 0 < k_boxes < n_boxes:
        raise ParameterError(
            f"box count {k_boxes} of {n_boxes} outside (0, n); treat as an outlier"
        )
    return k_boxes / (n_boxes - k_boxes)


def _as_predictor(p) -> Callable[[int], float]:
    if isinstance(p, BidderType):
        return p.predict
    if isinstance(p, PureBidding):
        return lambda v: float(p(v))
    if callable(p):
        return p
    arr = list(p)
    return lambda v: float(arr[v])


def prediction_rmse(dataset: Sequence[BidRecord], predictors) -> float:
    """Root-mean-square prediction error over a dataset.

    ``predictors`` may be a single predictor (type, bidding function, callable
    or per-value array) or a list of them; with a list, each record is scored
    against the candidate that fits it best — the generous convention used
    for small level ranges."""
    if not dataset:
        raise DataError("empty dataset")
    if isinstance(predictors, (list, tuple)) and not isinstance(predictors, PureBidding):
        funcs = [_as_predictor(p) for p in predictors]
    else:
        funcs = [_as_predictor(predictors)]
    total = 0.0
    for r in dataset:
        err = min(abs(r.bid - f(r.value)) for f in funcs)
        total += err * err
    return math.sqrt(total / len(dataset))
