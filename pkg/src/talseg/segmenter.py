"""Per-frame anomaly labelling by angle thresholds, and run extraction."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from .errors import ConfigError, RecordFormatError
from .kinematics import AngleSample

# slack when comparing gap durations computed from float timestamps
TIME_EPS = 1e-9


class Label(enum.Enum):
    NORMAL = "NormalDriving"
    ANOMALY = "Anomaly"


@dataclass(frozen=True)
class SegmenterConfig:
    theta_head: float = 25.0
    theta_hand: float = 40.0
    gap_tolerance: float = 0.5
    carry_forward: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.theta_head) and self.theta_head > 0):
            raise ConfigError(f"theta_head must be > 0, got {self.theta_head}")
        if not math.isfinite(self.theta_hand):
            raise ConfigError(f"theta_hand must be finite, got {self.theta_hand}")
        if not (math.isfinite(self.gap_tolerance) and self.gap_tolerance >= 0):
            raise ConfigError(f"gap_tolerance must be >= 0, got {self.gap_tolerance}")


@dataclass(frozen=True)
class FrameLabel:
    frame: int
    t: float
    label: Label


@dataclass(frozen=True)
class Segment:
    video_id: str
    start: float
    end: float
    frames: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad segment interval [{self.start}, {self.end})")
        if self.frames < 1:
            raise ValueError("segment must span at least one frame")

    @property
    def duration(self) -> float:
        return self.end - self.start

    def as_dict(self) -> dict:
        return {"video_id": self.video_id, "start": self.start, "end": self.end, "frames": self.frames}


def classify_frame(
    sample: AngleSample, cfg: SegmenterConfig, prev: Optional[FrameLabel] = None
) -> FrameLabel:
    angles = (sample.head_angle, sample.left_hand_angle, sample.right_hand_angle)
    if all(a is None for a in angles) and cfg.carry_forward:
        label = prev.label if prev is not None else Label.NORMAL
        return FrameLabel(sample.frame, sample.t, label)

    head, left, right = angles
    anomalous = (
        (head is not None and head > cfg.theta_head)
        or (left is not None and left > cfg.theta_hand)
        or (right is not None and right > cfg.theta_hand)
    )
    return FrameLabel(sample.frame, sample.t, Label.ANOMALY if anomalous else Label.NORMAL)


def label_frames(samples: Iterable[AngleSample], cfg: SegmenterConfig) -> List[FrameLabel]:
    labels: List[FrameLabel] = []
    prev = None
    for s in samples:
        prev = classify_frame(s, cfg, prev)
        labels.append(prev)
    return labels


def extract_segments(
    labels: Sequence[FrameLabel], fps: float, cfg: SegmenterConfig, video_id: str = ""
) -> List[Segment]:
    """Group Anomaly runs into half-open segments.

    A run covers ``[t(first), t(last) + 1/fps)``.  Consecutive runs whose
    separating normal span lasts at most ``cfg.gap_tolerance`` seconds are
    merged.  ``Segment.frames`` counts every label position the segment
    spans, bridged normal frames included.
    """
    period = 1.0 / fps
    # (first index, last index) of each maximal Anomaly run
    runs = []
    start = None
    for i, fl in enumerate(labels):
        if fl.label is Label.ANOMALY:
            if start is None:
                start = i
        elif start is not None:
            runs.append([start, i - 1])
            start = None
    if start is not None:
        runs.append([start, len(labels) - 1])

    merged: List[List[int]] = []
    for run in runs:
        if merged:
            gap = labels[run[0]].t - (labels[merged[-1][1]].t + period)
            if gap <= cfg.gap_tolerance + TIME_EPS:
                merged[-1][1] = run[1]
                continue
        merged.append(run)

    return [
        Segment(video_id, labels[a].t, labels[b].t + period, b - a + 1)
        for a, b in merged
    ]


def format_segment(seg: Segment) -> str:
    return json.dumps(seg.as_dict(), separators=(",", ":"))


def parse_segments(stream) -> List[Segment]:
    """Read a segment dump (one JSON object per line)."""
    out = []
    for lineno, raw in enumerate(stream, 1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            out.append(Segment(str(rec["video_id"]), float(rec["start"]), float(rec["end"]), int(rec["frames"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise RecordFormatError(f"malformed segment record ({exc})", lineno) from None
    return out
