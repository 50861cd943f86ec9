"""File formats: auction-spec JSON, strategy CSV, bid-data CSV, fit JSON.

Probabilities in the strategy CSV are written as exact rational strings
("33/80", "1/101", "1") so a strategy survives a round trip bit-for-bit; the
reader also accepts decimal strings.  All writers are deterministic: same
inputs, same bytes.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .core import AuctionSpec, BehaviouralStrategy, Format
from .errors import DataError
from .estimation import BidRecord

__all__ = [
    "spec_to_dict",
    "spec_from_dict",
    "load_spec",
    "dump_spec",
    "write_strategy_csv",
    "read_strategy_csv",
    "write_bid_csv",
    "read_bid_csv",
    "write_json",
]

BID_CSV_HEADER = ["subject_id", "round", "treatment", "format", "value", "bid"]
STRATEGY_CSV_HEADER = ["value", "bid", "probability"]


def _fraction_str(q: Fraction) -> str:
    return str(q)


def spec_to_dict(spec: AuctionSpec) -> dict:
    out = {
        "format": spec.format.value,
        "n": spec.n,
        "x": spec.x,
        "p": _fraction_str(spec.p),
        "alpha": spec.alpha,
    }
    steps = {b2 - b1 for b1, b2 in zip(spec.bid_grid, spec.bid_grid[1:])}
    if len(steps) == 1 and spec.bid_grid[-1] + min(steps) > spec.x:
        out["bid_step"] = min(steps)
    elif len(spec.bid_grid) == 1:
        out["bid_step"] = 1
    else:
        out["grid"] = list(spec.bid_grid)
    if not spec.uniform_values:
        out["value_pmf"] = [_fraction_str(q) for q in spec.value_pmf]
    return out


def spec_from_dict(data: dict) -> AuctionSpec:
    try:
        fmt = Format(data["format"])
        n = int(data["n"])
        x = int(data["x"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"bad auction spec: {exc}") from exc
    if "grid" in data:
        grid = tuple(int(b) for b in data["grid"])
    else:
        step = int(data.get("bid_step", 1))
        grid = tuple(range(0, x + 1, step))
    p = data.get("p", 1)
    pmf = data.get("value_pmf")
    return AuctionSpec(
        format=fmt, n=n, x=x, bid_grid=grid, p=p,
        alpha=float(data.get("alpha", 1.0)),
        value_pmf=pmf,
    )


def load_spec(path) -> AuctionSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def dump_spec(spec: AuctionSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n")


def write_strategy_csv(path, spec: AuctionSpec, strategy: BehaviouralStrategy) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STRATEGY_CSV_HEADER)
        for v in spec.values:
            for b, q in strategy.pmf(v).items():
                writer.writerow([v, b, _fraction_str(q)])


def read_strategy_csv(path, spec: AuctionSpec) -> BehaviouralStrategy:
    pmfs: list[dict[int, Fraction]] = [dict() for _ in spec.values]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != STRATEGY_CSV_HEADER:
            raise DataError(f"expected header {','.join(STRATEGY_CSV_HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError("expected 3 columns", line=lineno)
            try:
                v = int(row[0])
                b = int(row[1])
                q = Fraction(row[2])
            except ValueError as exc:
                raise DataError(str(exc), line=lineno) from exc
            if not 0 <= v <= spec.x:
                raise DataError(f"value {v} out of range", line=lineno, field="value")
            if b not in spec.bid_grid:
                raise DataError(f"bid {b} not on the bid grid", line=lineno, field="bid")
            pmfs[v][b] = pmfs[v].get(b, Fraction(0)) + q
    return BehaviouralStrategy(spec, pmfs)


def write_bid_csv(path, records: Sequence[BidRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BID_CSV_HEADER)
        for r in records:
            writer.writerow(
                [r.subject_id, r.round, r.treatment, r.format.value, r.value, r.bid]
            )


def read_bid_csv(path, spec: AuctionSpec | None = None) -> list[BidRecord]:
    """Load bid records; with a spec, validate values and bids against it and
    report the first offending line."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != BID_CSV_HEADER:
            raise DataError(f"expected header {','.join(BID_CSV_HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise DataError("expected 6 columns", line=lineno)
            try:
                rec = BidRecord(
                    subject_id=row[0],
                    round=int(row[1]),
                    treatment=row[2],
                    format=Format(row[3]),
                    value=int(row[4]),
                    bid=int(row[5]),
                )
            except ValueError as exc:
                raise DataError(str(exc), line=lineno) from exc
            if spec is not None:
                if not 0 <= rec.value <= spec.x:
                    raise DataError(
                        f"value {rec.value} outside {{0..{spec.x}}}", line=lineno, field="value"
                    )
                if rec.bid not in spec.bid_grid:
                    raise DataError(
                        f"bid {rec.bid} not on the bid grid", line=lineno, field="bid"
                    )
            records.append(rec)
    return records


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
