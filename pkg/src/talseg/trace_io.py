"""Reading, validating and normalizing per-frame keypoint traces.

A trace file is UTF-8 text with one JSON object per line::

    {"video_id": "a.mp4", "frame": 0, "width": 1280, "height": 720,
     "keypoints": {"nose": [640.0, 300.0, 0.98], ...}}

``t`` (seconds) and ``normalized`` (bool) are optional.  Records for one
video must be contiguous and in strictly increasing frame order.
"""

from __future__ import annotations

import json
import logging
import math
from math import isfinite
from dataclasses import dataclass, replace
from typing import Dict, Iterable, Iterator, List, Tuple

from .errors import TraceFormatError

log = logging.getLogger(__name__)

REQUIRED_KEYPOINTS = (
    "nose",
    "left_eye",
    "right_eye",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
)

_NUM = (int, float)
_FIELDS = {"video_id", "frame", "t", "width", "height", "normalized", "keypoints"}

Keypoint = Tuple[float, float, float]


@dataclass(frozen=True)
class KeypointFrame:
    video_id: str
    frame: int
    t: float
    width: int
    height: int
    keypoints: Dict[str, Keypoint]
    normalized: bool = False

    def get(self, name: str) -> Keypoint:
        """Return ``(x, y, conf)`` for ``name``; absent joints have conf 0."""
        return self.keypoints.get(name, (0.0, 0.0, 0.0))


@dataclass(frozen=True)
class VideoTrace:
    video_id: str
    fps: float
    frames: Tuple[KeypointFrame, ...] = ()
    # number of coordinates clamped into [0, 1] by normalization
    clamped: int = 0

    def __len__(self):
        return len(self.frames)

    @property
    def is_normalized(self) -> bool:
        return all(f.normalized for f in self.frames)


def _iter_lines(stream) -> Iterator[Tuple[int, str]]:
    for lineno, raw in enumerate(stream, 1):
        if isinstance(raw, (bytes, bytearray)):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise TraceFormatError(f"invalid UTF-8 ({exc})", lineno) from None
        line = raw.strip()
        if line:
            yield lineno, line


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def parse_record(line: str, fps: float, lineno: int | None = None) -> KeypointFrame:
    """Parse and validate one trace record."""
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"malformed record ({exc.msg})", lineno) from None
    if not isinstance(rec, dict):
        raise TraceFormatError("record is not an object", lineno)
    unknown = set(rec) - _FIELDS
    if unknown:
        raise TraceFormatError(f"unknown fields {sorted(unknown)}", lineno)
    for key in ("video_id", "frame", "width", "height", "keypoints"):
        if key not in rec:
            raise TraceFormatError(f"missing field {key!r}", lineno)

    video_id = rec["video_id"]
    if not isinstance(video_id, str) or not video_id:
        raise TraceFormatError("video_id must be a nonempty string", lineno)
    frame = rec["frame"]
    if not _is_int(frame) or frame < 0:
        raise TraceFormatError(f"frame must be a nonnegative integer, got {frame!r}", lineno)
    width, height = rec["width"], rec["height"]
    if not (_is_int(width) and width > 0 and _is_int(height) and height > 0):
        raise TraceFormatError(f"width/height must be positive integers, got {width!r}x{height!r}", lineno)
    normalized = rec.get("normalized", False)
    if not isinstance(normalized, bool):
        raise TraceFormatError("normalized must be a boolean", lineno)

    if rec.get("t") is None:
        t = frame / fps
    else:
        t = rec["t"]
        if not _is_number(t) or t < 0:
            raise TraceFormatError(f"t must be a nonnegative number, got {t!r}", lineno)
        t = float(t)

    raw_kps = rec["keypoints"]
    if not isinstance(raw_kps, dict):
        raise TraceFormatError("keypoints must be an object", lineno)
    keypoints = {}
    for name, value in raw_kps.items():
        try:
            x, y, conf = value
            if type(x) not in _NUM or type(y) not in _NUM or type(conf) not in _NUM:
                raise ValueError
            x, y, conf = float(x), float(y), float(conf)
            if not (isfinite(x) and isfinite(y)):
                raise ValueError
        except (TypeError, ValueError):
            raise TraceFormatError(f"keypoint {name!r} must be [x, y, conf] of finite numbers", lineno) from None
        if not 0.0 <= conf <= 1.0:
            raise TraceFormatError(f"keypoint {name!r} confidence {conf} outside [0, 1]", lineno)
        keypoints[name] = (x, y, conf)

    return KeypointFrame(video_id, frame, t, width, height, keypoints, normalized)


def _check_fps(fps):
    if not (_is_number(fps) and fps > 0):
        raise TraceFormatError(f"fps must be positive, got {fps!r}")


def iter_traces(stream: Iterable, fps: float) -> Iterator[VideoTrace]:
    """Yield one :class:`VideoTrace` per video, in file order.

    Only one video's frames are held in memory at a time, so records of a
    video must be contiguous.
    """
    _check_fps(fps)
    seen = set()
    current: List[KeypointFrame] = []

    def flush():
        trace = VideoTrace(current[0].video_id, float(fps), tuple(current))
        current.clear()
        return trace

    for lineno, line in _iter_lines(stream):
        rec = parse_record(line, fps, lineno)
        if current and rec.video_id != current[0].video_id:
            seen.add(current[0].video_id)
            yield flush()
        if not current and rec.video_id in seen:
            raise TraceFormatError(f"records for video {rec.video_id!r} are not contiguous", lineno)
        if current:
            prev = current[-1]
            if rec.frame == prev.frame:
                raise TraceFormatError(f"duplicate frame {rec.frame}", lineno)
            if rec.frame < prev.frame:
                raise TraceFormatError(f"frame {rec.frame} follows frame {prev.frame}", lineno)
            if rec.t < prev.t:
                raise TraceFormatError(f"t={rec.t} decreases at frame {rec.frame}", lineno)
        current.append(rec)
    if current:
        yield flush()


def parse_trace(stream: Iterable, fps: float, video_id: str | None = None) -> VideoTrace:
    """Parse a single-video trace.

    An empty stream gives an empty trace (with ``video_id`` or ``""``).
    """
    traces = list(iter_traces(stream, fps))
    if not traces:
        return VideoTrace(video_id or "", float(fps))
    if len(traces) > 1:
        raise TraceFormatError(
            f"expected one video, found {len(traces)}: {[t.video_id for t in traces]}"
        )
    return traces[0]


def _clamp(v: float) -> Tuple[float, bool]:
    if v < 0.0:
        return 0.0, True
    if v > 1.0:
        return 1.0, True
    return v, False


def normalize_frame(frame: KeypointFrame) -> Tuple[KeypointFrame, int]:
    """Map pixel coordinates into the unit square; returns (frame, clamp count)."""
    sx = 1 if frame.normalized else frame.width
    sy = 1 if frame.normalized else frame.height
    clamped = 0
    kps = {}
    for name, (x, y, conf) in frame.keypoints.items():
        nx, cx = _clamp(x / sx)
        ny, cy = _clamp(y / sy)
        clamped += cx + cy
        kps[name] = (nx, ny, conf)
    return replace(frame, keypoints=kps, normalized=True), clamped


def normalize_coordinates(trace: VideoTrace) -> VideoTrace:
    frames = []
    clamped = trace.clamped
    for f in trace.frames:
        nf, c = normalize_frame(f)
        frames.append(nf)
        clamped += c
    if clamped > trace.clamped:
        log.info("%s: clamped %d coordinates into [0, 1]", trace.video_id, clamped - trace.clamped)
    return replace(trace, frames=tuple(frames), clamped=clamped)


def format_record(frame: KeypointFrame) -> str:
    """Serialize a frame as one canonical JSON line (no trailing newline)."""
    rec = {
        "video_id": frame.video_id,
        "frame": frame.frame,
        "t": frame.t,
        "width": frame.width,
        "height": frame.height,
        "normalized": frame.normalized,
        "keypoints": {k: list(v) for k, v in frame.keypoints.items()},
    }
    return json.dumps(rec, separators=(",", ":"))


def write_trace(trace: VideoTrace, out) -> None:
    for f in trace.frames:
        out.write(format_record(f) + "\n")
