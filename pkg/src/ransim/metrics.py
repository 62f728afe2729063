"""In-memory time-series store with a line-protocol text export.

Every KPI the simulator records lands here as a point: a measurement name,
sorted string tags, float fields, and a nanosecond timestamp derived from the
tick. The export renders one canonical line per point::

    sector_load,cell=c1,gnb=g1,sector=s1 load=65.0 0

Tags and fields are sorted, floats use at most 9 significant digits, and lines
are ordered by timestamp then series key, so exporting, parsing, and exporting
again yields identical text.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError, ValidationError

TICK_NS = 1_000_000_000

SECTOR_LOAD = "sector_load"
CELL_LOAD = "cell_load"
GNB_LOAD = "gnb_load"
NETWORK_LOAD = "network_load"
UE_KPIS = "ue_kpis"
HANDOVER = "handover"

OUTCOME_CODES = {"success": 1.0, "failed": 2.0, "rolled_back": 3.0}

_BARE = re.compile(r"^[^,= ]+$")


@dataclass(frozen=True)
class MetricPoint:
    measurement: str
    tags: tuple[tuple[str, str], ...]
    fields: tuple[tuple[str, float], ...]
    timestamp: int

    @staticmethod
    def make(measurement: str, tags: dict[str, str], fields: dict[str, float],
             timestamp: int) -> "MetricPoint":
        return MetricPoint(measurement=measurement,
                           tags=tuple(sorted(tags.items())),
                           fields=tuple(sorted(fields.items())),
                           timestamp=timestamp)

    def series_key(self) -> tuple:
        return (self.measurement, self.tags)

    def to_line(self) -> str:
        head = self.measurement
        if self.tags:
            head += "," + ",".join(f"{k}={v}" for k, v in self.tags)
        body = ",".join(f"{k}={format_float(v)}" for k, v in self.fields)
        return f"{head} {body} {self.timestamp}"


@dataclass
class MetricSeries:
    key: tuple
    points: list[MetricPoint] = field(default_factory=list)


class MetricStore:
    """Tick-granular KPI store: single writer, snapshot readers.

    ``epoch_ns`` anchors tick 0; a point at tick t carries timestamp
    epoch_ns + t * 1e9. ``retention_ticks`` optionally bounds memory by
    discarding points older than the newest tick minus the retention.
    """

    def __init__(self, epoch_ns: int = 0, retention_ticks: Optional[int] = None):
        self.epoch_ns = epoch_ns
        self.retention_ticks = retention_ticks
        self._series: dict[tuple, MetricSeries] = {}
        self._lock = threading.Lock()
        self._latest_ts: Optional[int] = None

    def timestamp_for(self, tick: int) -> int:
        return self.epoch_ns + tick * TICK_NS

    def tick_of(self, timestamp: int) -> int:
        return (timestamp - self.epoch_ns) // TICK_NS

    def record(self, point: MetricPoint) -> None:
        """Append a point to its series; timestamps must strictly increase
        within a series."""
        _validate_point(point)
        with self._lock:
            series = self._series.get(point.series_key())
            if series is None:
                series = MetricSeries(key=point.series_key())
                self._series[point.series_key()] = series
            if series.points and series.points[-1].timestamp >= point.timestamp:
                raise ValidationError(
                    f"out-of-order point for series {point.series_key()!r} "
                    f"at timestamp {point.timestamp}")
            series.points.append(point)
            if self._latest_ts is None or point.timestamp > self._latest_ts:
                self._latest_ts = point.timestamp
            if self.retention_ticks is not None:
                horizon = self._latest_ts - self.retention_ticks * TICK_NS
                for s in self._series.values():
                    while s.points and s.points[0].timestamp < horizon:
                        s.points.pop(0)

    def record_at(self, tick: int, measurement: str, tags: dict[str, str],
                  fields: dict[str, float]) -> None:
        self.record(MetricPoint.make(measurement, tags, fields,
                                     self.timestamp_for(tick)))

    def query(self, measurement: str, tags: Optional[dict[str, str]] = None,
              start_tick: Optional[int] = None,
              end_tick: Optional[int] = None) -> list[MetricPoint]:
        """Matching points in (timestamp, series key) order; ticks inclusive."""
        lo = None if start_tick is None else self.timestamp_for(start_tick)
        hi = None if end_tick is None else self.timestamp_for(end_tick)
        with self._lock:
            out = []
            for series in self._series.values():
                if series.key[0] != measurement:
                    continue
                if tags and not all((k, v) in series.key[1] for k, v in tags.items()):
                    continue
                for point in series.points:
                    if lo is not None and point.timestamp < lo:
                        continue
                    if hi is not None and point.timestamp > hi:
                        continue
                    out.append(point)
        out.sort(key=lambda p: (p.timestamp, p.series_key()))
        return out

    def all_points(self) -> list[MetricPoint]:
        with self._lock:
            out = [p for s in self._series.values() for p in s.points]
        out.sort(key=lambda p: (p.timestamp, p.series_key()))
        return out

    def export_line_protocol(self, start_tick: Optional[int] = None,
                             end_tick: Optional[int] = None) -> str:
        """Canonical text export; one line per point, trailing newline."""
        lo = None if start_tick is None else self.timestamp_for(start_tick)
        hi = None if end_tick is None else self.timestamp_for(end_tick)
        points = self.all_points()
        lines = [p.to_line() for p in points
                 if (lo is None or p.timestamp >= lo)
                 and (hi is None or p.timestamp <= hi)]
        return "".join(line + "\n" for line in lines)


def format_float(value: float) -> str:
    """Up to 9 significant digits, always recognizably a float."""
    text = f"{value:.9g}"
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def parse_line_protocol(text: str) -> list[MetricPoint]:
    """Parse canonical export text back into points."""
    points = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split(" ")
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 3 space-separated parts")
        head, body, ts_text = parts
        head_parts = head.split(",")
        measurement = head_parts[0]
        tags = {}
        for pair in head_parts[1:]:
            key, _, value = pair.partition("=")
            if not key or not value:
                raise ParseError(f"line {lineno}: malformed tag {pair!r}")
            tags[key] = value
        fields = {}
        for pair in body.split(","):
            key, _, value = pair.partition("=")
            if not key or not value:
                raise ParseError(f"line {lineno}: malformed field {pair!r}")
            try:
                fields[key] = float(value)
            except ValueError:
                raise ParseError(
                    f"line {lineno}: non-numeric field value {value!r}") from None
        if not fields:
            raise ParseError(f"line {lineno}: no fields")
        try:
            timestamp = int(ts_text)
        except ValueError:
            raise ParseError(f"line {lineno}: bad timestamp {ts_text!r}") from None
        points.append(MetricPoint.make(measurement, tags, fields, timestamp))
    return points


def _validate_point(point: MetricPoint) -> None:
    if not point.measurement or not _BARE.match(point.measurement):
        raise ValidationError(f"bad measurement name {point.measurement!r}")
    if not point.fields:
        raise ValidationError("a point needs at least one field")
    for key, value in point.tags:
        if not _BARE.match(key) or not _BARE.match(value):
            raise ValidationError(f"tag {key!r}={value!r} contains reserved characters")
    for key, _ in point.fields:
        if not _BARE.match(key):
            raise ValidationError(f"field name {key!r} contains reserved characters")
