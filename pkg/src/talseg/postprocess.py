"""Short-event filtering and the integer-second submission format.

A submission (and a ground-truth file) is plain text, one row per event::

    <video_id_numeric> <activity_id> <start> <end>\\n

with no header, rows sorted by (video, start, activity).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Mapping, Sequence

from .classifier import ACTIVITY_CLASSES, LabeledEvent
from .errors import SubmissionFormatError

log = logging.getLogger(__name__)

# float slack so an event of nominally exactly min_duration is kept
DURATION_EPS = 1e-9


@dataclass(frozen=True, order=True)
class SubmissionRow:
    video_id_numeric: int
    start: int
    activity_id: int
    end: int

    def __post_init__(self):
        if self.video_id_numeric < 1:
            raise ValueError(f"video id must be positive, got {self.video_id_numeric}")
        if self.activity_id not in ACTIVITY_CLASSES:
            raise ValueError(f"activity id {self.activity_id} outside 1..15")
        if self.end < self.start + 1:
            raise ValueError(f"row end {self.end} must be at least start + 1 ({self.start})")

    def format(self) -> str:
        return f"{self.video_id_numeric} {self.activity_id} {self.start} {self.end}\n"

    def to_event(self) -> LabeledEvent:
        return LabeledEvent(str(self.video_id_numeric), float(self.start), float(self.end), self.activity_id)


def filter_short(events: Iterable[LabeledEvent], min_duration: float = 1.0) -> List[LabeledEvent]:
    """Drop events strictly shorter than ``min_duration`` seconds."""
    return [e for e in events if e.end - e.start >= min_duration - DURATION_EPS]


def round_half_up(x: float) -> int:
    return int(Decimal(repr(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def build_id_map(video_ids: Iterable[str]) -> Dict[str, int]:
    ids = sorted(set(video_ids))
    if not ids:
        raise ValueError("cannot build an id map from an empty set of videos")
    return {vid: i for i, vid in enumerate(ids, 1)}


def to_submission(events: Iterable[LabeledEvent], id_map: Mapping[str, int]) -> List[SubmissionRow]:
    rows = []
    for ev in events:
        if ev.video_id not in id_map:
            raise KeyError(f"video {ev.video_id!r} has no numeric id")
        start, end = round_half_up(ev.start), round_half_up(ev.end)
        if end <= start:
            log.warning(
                "dropping event %r class %d [%.3f, %.3f): empty after rounding to %d..%d",
                ev.video_id, ev.activity, ev.start, ev.end, start, end,
            )
            continue
        rows.append(SubmissionRow(id_map[ev.video_id], start, ev.activity, end))
    rows.sort()
    return rows


def format_submission(rows: Sequence[SubmissionRow]) -> str:
    return "".join(r.format() for r in rows)


def parse_submission(stream) -> List[SubmissionRow]:
    """Read a submission or ground-truth file, preserving row order."""
    rows = []
    for lineno, raw in enumerate(stream, 1):
        if isinstance(raw, (bytes, bytearray)):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise SubmissionFormatError(f"expected 4 fields, got {len(parts)}", lineno)
        try:
            vid, act, start, end = (int(p) for p in parts)
            rows.append(SubmissionRow(vid, start, act, end))
        except ValueError as exc:
            raise SubmissionFormatError(str(exc), lineno) from None
    return rows
