"""Windowed chart monitoring over prediction streams.

Records are grouped per model into tumbling count-based windows; each
completed window gets its own chart and diagnosis, and is compared against
a reference chart for drift. Output overrides let testers force a model's
score for matching records to stage scenarios end to end.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import PreconditionError
from .ingest import ScoreRecord
from .rdc import DEFAULT_DIAGNOSIS, DiagnosisConfig, Rdc, RdcDiagnosis, RdcPattern, build_rdc, diagnose, rdc_distance


@dataclass(frozen=True)
class MonitorConfig:
    window_size: int = 1000
    bins: int = 100
    tv_threshold: float = 0.15
    reference: Rdc | None = None
    diagnosis: DiagnosisConfig = field(default_factory=lambda: DEFAULT_DIAGNOSIS)

    def __post_init__(self) -> None:
        floor = max(100, self.diagnosis.min_samples)
        if self.window_size < floor:
            raise PreconditionError(f"window_size must be >= {floor}")
        if not 0.0 <= self.tv_threshold <= 1.0:
            raise PreconditionError("tv_threshold must lie in [0, 1]")


class AlertKind(enum.Enum):
    PATTERN_CHANGE = "PATTERN_CHANGE"
    DRIFT = "DRIFT"
    PATHOLOGY = "PATHOLOGY"


@dataclass(frozen=True)
class AlertEvent:
    model_id: str
    window_index: int
    kind: AlertKind
    detail: dict


@dataclass(frozen=True)
class WindowResult:
    model_id: str
    window_index: int
    rdc: Rdc
    diagnosis: RdcDiagnosis
    partial: bool = False


def check_drift(
    current: Rdc,
    reference: Rdc,
    config: MonitorConfig,
    *,
    model_id: str = "",
    window_index: int = 0,
    current_diagnosis: RdcDiagnosis | None = None,
    reference_diagnosis: RdcDiagnosis | None = None,
) -> list[AlertEvent]:
    """Compare a window against its reference; zero to three alerts.

    One alert per kind at most, emitted in a fixed order: pattern change
    (the diagnoses differ), drift (total variation strictly above the
    threshold), pathology (the current pattern is anything but healthy
    bimodal).
    """
    distance = rdc_distance(current, reference)
    if current_diagnosis is None:
        current_diagnosis = diagnose(current, config.diagnosis)
    if reference_diagnosis is None:
        reference_diagnosis = diagnose(reference, config.diagnosis)
    alerts: list[AlertEvent] = []
    if current_diagnosis.pattern != reference_diagnosis.pattern:
        alerts.append(
            AlertEvent(
                model_id,
                window_index,
                AlertKind.PATTERN_CHANGE,
                {"prior": reference_diagnosis.pattern.value, "current": current_diagnosis.pattern.value},
            )
        )
    if distance > config.tv_threshold:
        alerts.append(
            AlertEvent(
                model_id,
                window_index,
                AlertKind.DRIFT,
                {"distance": distance, "threshold": config.tv_threshold},
            )
        )
    if current_diagnosis.pattern is not RdcPattern.HEALTHY_BIMODAL:
        alerts.append(
            AlertEvent(
                model_id,
                window_index,
                AlertKind.PATHOLOGY,
                {"pattern": current_diagnosis.pattern.value},
            )
        )
    return alerts


class WindowedMonitor:
    """Incremental per-model windowing; feed records, collect window results.

    Windows tumble every ``config.window_size`` records per model. On
    ``finish`` a trailing partial window is still emitted (flagged) when it
    reaches the diagnosis sample floor; smaller remainders are dropped and
    counted in ``dropped``.
    """

    def __init__(self, config: MonitorConfig | None = None):
        self.config = config or MonitorConfig()
        self._buffers: dict[str, list[float]] = {}
        self._window_counts: dict[str, int] = {}
        self.dropped: dict[str, int] = {}
        self._finished = False

    def _emit(self, model_id: str, scores: list[float], partial: bool) -> WindowResult:
        index = self._window_counts.get(model_id, 0)
        self._window_counts[model_id] = index + 1
        rdc = build_rdc(scores, self.config.bins)
        return WindowResult(model_id, index, rdc, diagnose(rdc, self.config.diagnosis), partial)

    def feed(self, record: ScoreRecord) -> list[WindowResult]:
        """Add one record; returns the windows it completed (0 or 1)."""
        if self._finished:
            raise PreconditionError("monitor already finished")
        buf = self._buffers.setdefault(record.model_id, [])
        buf.append(record.score)
        if len(buf) >= self.config.window_size:
            self._buffers[record.model_id] = []
            return [self._emit(record.model_id, buf, partial=False)]
        return []

    def finish(self) -> list[WindowResult]:
        """Flush trailing partial windows (sorted by model id for determinism)."""
        if self._finished:
            raise PreconditionError("monitor already finished")
        self._finished = True
        out: list[WindowResult] = []
        for model_id in sorted(self._buffers):
            buf = self._buffers[model_id]
            if not buf:
                continue
            if len(buf) >= self.config.diagnosis.min_samples:
                out.append(self._emit(model_id, buf, partial=True))
            else:
                self.dropped[model_id] = self.dropped.get(model_id, 0) + len(buf)
        self._buffers = {}
        return out


def windowed_rdcs(
    records: Iterable[ScoreRecord], config: MonitorConfig | None = None
) -> tuple[list[WindowResult], dict[str, int]]:
    """Window an entire record sequence in one pass.

    Returns the window results in completion order (trailing partials
    last) plus the per-model count of records too few to diagnose.
    """
    monitor = WindowedMonitor(config)
    results: list[WindowResult] = []
    for record in records:
        results.extend(monitor.feed(record))
    results.extend(monitor.finish())
    return results, monitor.dropped


@dataclass(frozen=True)
class OverrideRule:
    """Force the score of records matching on model and/or entity id."""

    forced_score: float
    model_id: str | None = None
    entity_id: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.forced_score <= 1.0:
            raise PreconditionError("forced_score must lie in [0, 1]")
        if self.model_id is None and self.entity_id is None:
            raise PreconditionError("a rule must match on model_id or entity_id")

    def matches(self, record: ScoreRecord) -> bool:
        if self.model_id is not None and record.model_id != self.model_id:
            return False
        if self.entity_id is not None and record.entity_id != self.entity_id:
            return False
        return True


def apply_overrides(
    records: Iterable[ScoreRecord], rules: Sequence[OverrideRule]
) -> tuple[list[ScoreRecord], int]:
    """Apply the first matching rule to each record; order and count preserved.

    Returns the transformed records and how many were overridden.
    """
    out: list[ScoreRecord] = []
    overridden = 0
    for record in records:
        for rule in rules:
            if rule.matches(record):
                out.append(replace(record, score=rule.forced_score))
                overridden += 1
                break
        else:
            out.append(record)
    return out, overridden
