"""Three-variant blocked experiment separating compute cost from feature value.

The base variant runs neither the new model nor the new feature, v1 pays
the model's computation (and its latency) without exposing any change, and
v2 pays the computation and shows the feature. The v1-base contrast prices
the slowdown, v2-v1 prices the feature itself.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._stats import two_proportion_ztest
from .errors import InputError, PreconditionError


class Variant(enum.Enum):
    BASE = "base"
    V1 = "v1"  # model computed, change hidden
    V2 = "v2"  # model computed, change shown


_VARIANTS = (Variant.BASE, Variant.V1, Variant.V2)


@dataclass(frozen=True)
class BlockedDesign:
    """Traffic allocation over (base, v1, v2); must sum to 1."""

    allocation: tuple[float, float, float] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    def __post_init__(self) -> None:
        if len(self.allocation) != 3 or any(a < 0.0 for a in self.allocation):
            raise PreconditionError("allocation needs three non-negative proportions")
        if abs(sum(self.allocation) - 1.0) > 1e-12:
            raise PreconditionError("allocation must sum to 1")


@dataclass(frozen=True)
class BlockedOutcome:
    variant: Variant
    converted: bool


class BlockedOutcomes(Sequence):
    """Columnar store of per-user outcomes; iterates as BlockedOutcome records."""

    def __init__(self, variants: np.ndarray, converted: np.ndarray):
        if variants.shape != converted.shape:
            raise PreconditionError("variant and conversion vectors must align")
        self._variants = variants.astype(np.uint8)
        self._converted = converted.astype(bool)

    @classmethod
    def from_records(cls, records: Iterable[BlockedOutcome]) -> "BlockedOutcomes":
        records = list(records)
        variants = np.array([_VARIANTS.index(r.variant) for r in records], dtype=np.uint8)
        converted = np.array([r.converted for r in records], dtype=bool)
        return cls(variants, converted)

    def __len__(self) -> int:
        return len(self._variants)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return BlockedOutcomes(self._variants[i], self._converted[i])
        return BlockedOutcome(_VARIANTS[self._variants[i]], bool(self._converted[i]))

    def __iter__(self) -> Iterator[BlockedOutcome]:
        for v, c in zip(self._variants, self._converted):
            yield BlockedOutcome(_VARIANTS[v], bool(c))

    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-variant (users, conversions) in (base, v1, v2) order."""
        users = np.bincount(self._variants, minlength=3)
        conversions = np.bincount(self._variants, weights=self._converted, minlength=3).astype(np.int64)
        return users, conversions


@dataclass(frozen=True)
class BlockedSimConfig:
    n_users: int
    base_cvr: float
    latency_penalty: float = 0.0  # additive delta applied to v1 and v2
    feature_effect: float = 0.0  # additive delta applied to v2 only
    design: BlockedDesign = field(default_factory=BlockedDesign)
    seed: int = 0


def simulate_blocked(config: BlockedSimConfig) -> BlockedOutcomes:
    """Seeded draw of variant assignments and Bernoulli conversions."""
    if config.n_users < 1:
        raise PreconditionError("need at least one user")
    rates = (
        config.base_cvr,
        config.base_cvr + config.latency_penalty,
        config.base_cvr + config.latency_penalty + config.feature_effect,
    )
    for variant, rate in zip(_VARIANTS, rates):
        if not 0.0 <= rate <= 1.0:
            raise PreconditionError(f"conversion rate for {variant.value} is {rate}, outside [0, 1]")
    rng = np.random.default_rng(config.seed)
    variants = rng.choice(3, size=config.n_users, p=config.design.allocation).astype(np.uint8)
    converted = rng.random(config.n_users) < np.asarray(rates)[variants]
    return BlockedOutcomes(variants, converted)


@dataclass(frozen=True)
class Contrast:
    effect: float
    ci_low: float
    ci_high: float
    degenerate: bool


@dataclass(frozen=True)
class BlockedAnalysis:
    """Per-variant rates and the two disentangled effects.

    ``total_effect`` is defined as perf_effect + feature_effect so the
    additivity identity holds exactly; it equals rate(v2) - rate(base) up
    to one floating-point rounding.
    """

    rates: dict
    users: dict
    conversions: dict
    perf_effect: float  # rate(v1) - rate(base): cost of computing the model
    feature_effect: float  # rate(v2) - rate(v1): value of showing the change
    total_effect: float
    contrasts: dict  # name -> Contrast, 95% unpooled normal CIs by default
    alpha: float


def analyze_blocked(outcomes, alpha: float = 0.05) -> BlockedAnalysis:
    """Estimate the slowdown cost and the feature value from outcome records.

    Accepts a BlockedOutcomes store or any iterable of BlockedOutcome.
    Order of the records never matters. Every variant must have at least
    one user.
    """
    if not isinstance(outcomes, BlockedOutcomes):
        outcomes = BlockedOutcomes.from_records(outcomes)
    if not 0.0 < alpha < 1.0:
        raise PreconditionError("alpha must lie strictly inside (0, 1)")
    users, conversions = outcomes.counts()
    for variant, n in zip(_VARIANTS, users):
        if n == 0:
            raise PreconditionError(f"variant {variant.value} has no users")
    rates = conversions / users
    perf = float(rates[1] - rates[0])
    feature = float(rates[2] - rates[1])
    pairs = {"perf": (0, 1), "feature": (1, 2), "total": (0, 2)}
    contrasts = {}
    for name, (i, j) in pairs.items():
        t = two_proportion_ztest(int(conversions[i]), int(users[i]), int(conversions[j]), int(users[j]), alpha)
        contrasts[name] = Contrast(t.effect, t.ci_low, t.ci_high, t.degenerate)
    return BlockedAnalysis(
        rates={v.value: float(r) for v, r in zip(_VARIANTS, rates)},
        users={v.value: int(n) for v, n in zip(_VARIANTS, users)},
        conversions={v.value: int(c) for v, c in zip(_VARIANTS, conversions)},
        perf_effect=perf,
        feature_effect=feature,
        total_effect=perf + feature,
        contrasts=contrasts,
        alpha=alpha,
    )


def write_blocked_csv(outcomes, path: str | Path) -> None:
    """Write outcomes as ``variant,converted`` rows."""
    if not isinstance(outcomes, BlockedOutcomes):
        outcomes = BlockedOutcomes.from_records(outcomes)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "converted"])
        for record in outcomes:
            writer.writerow([record.variant.value, int(record.converted)])


def read_blocked_csv(path: str | Path) -> BlockedOutcomes:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise InputError(f"{path}: empty file, expected a header row") from None
            rows = [row for row in reader if any(cell.strip() for cell in row)]
    except OSError as exc:
        raise InputError(f"cannot read outcomes CSV {path}: {exc}") from exc
    if header != ["variant", "converted"]:
        raise InputError(f"{path}: header must be variant,converted, got {','.join(header)}")
    by_value = {v.value: i for i, v in enumerate(_VARIANTS)}
    variants = np.empty(len(rows), dtype=np.uint8)
    converted = np.empty(len(rows), dtype=bool)
    for i, row in enumerate(rows):
        row_no = i + 2
        if len(row) != 2:
            raise InputError(f"row {row_no}: expected 2 fields, got {len(row)}")
        value = row[0].strip().lower()
        if value not in by_value:
            raise InputError(f"row {row_no}: unknown variant {row[0]!r}")
        variants[i] = by_value[value]
        flag = row[1].strip()
        if flag not in ("0", "1"):
            raise InputError(f"row {row_no}: converted must be 0 or 1, got {flag!r}")
        converted[i] = flag == "1"
    return BlockedOutcomes(variants, converted)
