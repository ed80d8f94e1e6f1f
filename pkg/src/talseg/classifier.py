"""Segment labelling from externally produced per-frame class scores.

Score files carry one record per frame::

    {"video_id": "a.mp4", "frame": 12, "scores": [s0, s1, ..., s15]}

Index 0 is normal driving; indices 1..15 follow :data:`ACTIVITY_CLASSES`.
A record may set ``"probabilities": true`` to have the vector checked as a
distribution.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import RecordFormatError, ScoreFormatError
from .segmenter import Segment

log = logging.getLogger(__name__)

NUM_SCORES = 16

ACTIVITY_CLASSES: Dict[int, str] = {
    1: "Drinking",
    2: "Phone Call(right)",
    3: "Phone Call(left)",
    4: "Eating",
    5: "Text (Right)",
    6: "Text (Left)",
    7: "Reaching behind",
    8: "Adjust control panel",
    9: "Pick up from floor (Driver)",
    10: "Pick up from floor (Passenger)",
    11: "Talk to passenger at the right",
    12: "Talk to passenger at backseat",
    13: "yawning",
    14: "Hand on head",
    15: "Singing or dancing with music",
}
NORMAL_DRIVING = 0


@dataclass(frozen=True)
class FrameScores:
    video_id: str
    frame: int
    scores: Tuple[float, ...]

    def __post_init__(self):
        if len(self.scores) != NUM_SCORES:
            raise ScoreFormatError(f"expected {NUM_SCORES} scores, got {len(self.scores)}")
        if not all(math.isfinite(s) for s in self.scores):
            raise ScoreFormatError("scores must be finite")


@dataclass(frozen=True, order=True)
class LabeledEvent:
    video_id: str
    start: float
    end: float
    activity: int

    def __post_init__(self):
        if self.activity not in ACTIVITY_CLASSES:
            raise ValueError(f"activity id {self.activity} outside 1..15")
        if not self.start < self.end:
            raise ValueError(f"event start {self.start} not before end {self.end}")

    @property
    def duration(self) -> float:
        return self.end - self.start

    def as_dict(self) -> dict:
        return {"video_id": self.video_id, "activity": self.activity, "start": self.start, "end": self.end}


def parse_scores(stream: Iterable) -> List[FrameScores]:
    out = []
    for lineno, raw in enumerate(stream, 1):
        if isinstance(raw, (bytes, bytearray)):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScoreFormatError(f"malformed record ({exc.msg})", lineno) from None
        if not isinstance(rec, dict) or not {"video_id", "frame", "scores"} <= set(rec):
            raise ScoreFormatError("record needs video_id, frame and scores", lineno)
        scores = rec["scores"]
        frame = rec["frame"]
        if not isinstance(frame, int) or isinstance(frame, bool) or frame < 0:
            raise ScoreFormatError(f"frame must be a nonnegative integer, got {frame!r}", lineno)
        if not isinstance(scores, list) or len(scores) != NUM_SCORES:
            n = len(scores) if isinstance(scores, list) else "non-list"
            raise ScoreFormatError(f"scores arity {n}, expected {NUM_SCORES}", lineno)
        if any(type(s) not in (int, float) for s in scores) or not all(map(math.isfinite, scores)):
            raise ScoreFormatError("scores must be finite numbers", lineno)
        if rec.get("probabilities"):
            if any(s < 0 or s > 1 for s in scores) or abs(sum(scores) - 1.0) > 1e-6:
                raise ScoreFormatError("declared probabilities do not form a distribution", lineno)
        out.append(FrameScores(str(rec["video_id"]), frame, tuple(float(s) for s in scores)))
    return out


def format_scores(fs: FrameScores) -> str:
    return json.dumps({"video_id": fs.video_id, "frame": fs.frame, "scores": list(fs.scores)}, separators=(",", ":"))


class ScoreTable:
    """Per-video score matrix with frame lookup; built once, queried per segment."""

    def __init__(self, scores: Sequence[FrameScores], fps: float):
        self.fps = fps
        self.frames = [s.frame for s in scores]
        if any(b <= a for a, b in zip(self.frames, self.frames[1:])):
            raise ScoreFormatError("score frames must be strictly increasing within a video")
        self.times = np.asarray(self.frames, dtype=float) / fps
        self.matrix = np.array([s.scores for s in scores], dtype=float).reshape(-1, NUM_SCORES)

    def rows_in(self, start: float, end: float) -> np.ndarray:
        """Score rows of frames with ``start <= frame / fps < end``."""
        lo = int(np.searchsorted(self.times, start, side="left"))
        hi = int(np.searchsorted(self.times, end, side="left"))
        return self.matrix[lo:hi]


def _argmax_activity(rows: np.ndarray) -> int:
    means = rows[:, 1:].mean(axis=0)
    # np.argmax returns the first maximum, i.e. the lowest class id
    return int(np.argmax(means)) + 1


def label_segment(segment: Segment, scores, fps: float) -> Optional[LabeledEvent]:
    """Label a segment by the class (1..15) with the highest mean score.

    ``scores`` is a frame-sorted sequence of :class:`FrameScores` for the
    segment's video, or a prebuilt :class:`ScoreTable`.  Returns None when
    no score frame falls inside ``[start, end)``.
    """
    table = scores if isinstance(scores, ScoreTable) else ScoreTable(scores, fps)
    rows = table.rows_in(segment.start, segment.end)
    if len(rows) == 0:
        log.warning(
            "no score frames inside segment [%.3f, %.3f) of %r; segment left unclassified",
            segment.start, segment.end, segment.video_id,
        )
        return None
    return LabeledEvent(segment.video_id, segment.start, segment.end, _argmax_activity(rows))


def group_scores(scores: Iterable[FrameScores]) -> Dict[str, List[FrameScores]]:
    grouped: Dict[str, List[FrameScores]] = {}
    for s in scores:
        grouped.setdefault(s.video_id, []).append(s)
    return grouped


def label_segments(segments: Sequence[Segment], scores: Sequence[FrameScores], fps: float) -> List[LabeledEvent]:
    """Label every segment of one video, dropping unclassified ones."""
    table = ScoreTable(scores, fps)
    events = []
    for seg in segments:
        ev = label_segment(seg, table, fps)
        if ev is not None:
            events.append(ev)
    return events


def parse_events(stream) -> List[LabeledEvent]:
    out = []
    for lineno, raw in enumerate(stream, 1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            out.append(LabeledEvent(str(rec["video_id"]), float(rec["start"]), float(rec["end"]), int(rec["activity"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise RecordFormatError(f"malformed event record ({exc})", lineno) from None
    return out


def format_event(ev: LabeledEvent) -> str:
    return json.dumps(ev.as_dict(), separators=(",", ":"))
