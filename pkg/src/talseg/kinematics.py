"""Per-frame head and forearm angles from normalized keypoints.

Head angle is the unsigned deviation, in degrees, of the eye-midpoint to
nose vector from the downward image vertical: 0 for a frontal neutral
pose, growing as the head turns or tilts.  Hand angle is the forearm
(elbow to wrist) elevation above horizontal, in [-90, 90].

Coordinates are in the unit square, so x differences are multiplied by
``width / height`` before any angle is taken (``aspect_correct``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import ConfigError
from .trace_io import VideoTrace

Point = Tuple[float, float, float]  # x, y, conf


@dataclass(frozen=True)
class KinematicsConfig:
    conf_threshold: float = 0.5
    aspect_correct: bool = True

    def __post_init__(self):
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ConfigError(f"conf_threshold must lie in [0, 1], got {self.conf_threshold}")


@dataclass(frozen=True)
class AngleSample:
    frame: int
    t: float
    head_angle: Optional[float]
    left_hand_angle: Optional[float]
    right_hand_angle: Optional[float]

    def as_dict(self, video_id: str) -> dict:
        return {
            "video_id": video_id,
            "frame": self.frame,
            "t": self.t,
            "head_angle": self.head_angle,
            "left_hand_angle": self.left_hand_angle,
            "right_hand_angle": self.right_hand_angle,
        }


def head_angle(
    left_eye: Point,
    right_eye: Point,
    nose: Point,
    conf_threshold: float = 0.5,
    x_scale: float = 1.0,
) -> Optional[float]:
    """Angle between (eye midpoint -> nose) and the image's downward vertical.

    ``x_scale`` is the aspect factor applied to x differences.  Returns None
    when any joint is below ``conf_threshold`` or the vector is zero.
    """
    if min(left_eye[2], right_eye[2], nose[2]) < conf_threshold:
        return None
    vx = (nose[0] - 0.5 * (left_eye[0] + right_eye[0])) * x_scale
    vy = nose[1] - 0.5 * (left_eye[1] + right_eye[1])
    if vx == 0.0 and vy == 0.0:
        return None
    return math.degrees(math.atan2(abs(vx), vy))


def hand_angle(
    elbow: Point,
    wrist: Point,
    conf_threshold: float = 0.5,
    x_scale: float = 1.0,
) -> Optional[float]:
    """Forearm elevation above horizontal; positive when the wrist is higher."""
    if min(elbow[2], wrist[2]) < conf_threshold:
        return None
    dx = (wrist[0] - elbow[0]) * x_scale
    dy = wrist[1] - elbow[1]
    if dx == 0.0 and dy == 0.0:
        return None
    # image y grows downward
    return math.degrees(math.atan2(-dy, abs(dx)))


def angle_series(trace: VideoTrace, cfg: KinematicsConfig = KinematicsConfig()) -> List[AngleSample]:
    """One :class:`AngleSample` per frame of a normalized trace."""
    out = []
    thr = cfg.conf_threshold
    for f in trace.frames:
        if not f.normalized:
            raise ValueError(f"frame {f.frame} of {f.video_id!r} is not normalized")
        x_scale = f.width / f.height if cfg.aspect_correct else 1.0
        kp = f.get
        out.append(
            AngleSample(
                frame=f.frame,
                t=f.t,
                head_angle=head_angle(kp("left_eye"), kp("right_eye"), kp("nose"), thr, x_scale),
                left_hand_angle=hand_angle(kp("left_elbow"), kp("left_wrist"), thr, x_scale),
                right_hand_angle=hand_angle(kp("right_elbow"), kp("right_wrist"), thr, x_scale),
            )
        )
    return out


def format_angles(samples, video_id: str) -> str:
    """Diagnostic dump: one JSON line per sample, ``null`` for undefined angles."""
    return "".join(json.dumps(s.as_dict(video_id), separators=(",", ":")) + "\n" for s in samples)
