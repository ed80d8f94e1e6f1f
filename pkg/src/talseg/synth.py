"""Synthetic keypoint traces, score files and ground truth from an event script.

Poses are built in an isotropic plane measured in units of frame height, so
that after unit-square normalization and aspect correction the kinematics
module recovers exactly the angles that were requested.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from .classifier import ACTIVITY_CLASSES, NUM_SCORES, LabeledEvent
from .errors import ScriptError
from .postprocess import build_id_map, format_submission, to_submission
from .segmenter import SegmenterConfig
from .trace_io import REQUIRED_KEYPOINTS

DRIVERS = ("head", "left_hand", "right_hand")

# neutral geometry, in frame-height units (y downward, x centred on the body)
EYE_Y = 0.30
EYE_HALF_SPAN = 0.06
NOSE_OFFSET = 0.12
SHOULDER_Y = 0.60
SHOULDER_HALF_SPAN = 0.22
ELBOW_Y = 0.78
ELBOW_HALF_SPAN = 0.30
FOREARM = 0.16


@dataclass(frozen=True)
class ScriptEvent:
    activity: int
    start: float
    end: float
    driver: str
    magnitude: float


@dataclass(frozen=True)
class EventScript:
    video_id: str
    fps: float = 30.0
    duration: float = 60.0
    events: Tuple[ScriptEvent, ...] = ()
    noise_sigma: float = 0.0
    seed: int = 0
    width: int = 1280
    height: int = 720
    score_noise: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "EventScript":
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - allowed
        if unknown:
            raise ScriptError(f"unknown script fields {sorted(unknown)}")
        d = dict(d)
        try:
            d["events"] = tuple(ScriptEvent(**e) for e in d.get("events", ()))
        except TypeError as exc:
            raise ScriptError(f"bad event entry: {exc}") from None
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["events"] = [asdict(e) for e in self.events]
        return d


def validate_script(script: EventScript, thresholds: SegmenterConfig = SegmenterConfig()) -> None:
    if not script.video_id:
        raise ScriptError("video_id must be nonempty")
    if not script.fps > 0:
        raise ScriptError(f"fps must be positive, got {script.fps}")
    if not script.duration > 0:
        raise ScriptError(f"duration must be positive, got {script.duration}")
    if script.noise_sigma < 0:
        raise ScriptError("noise_sigma must be >= 0")
    if not 0 <= script.score_noise <= 1:
        raise ScriptError("score_noise must lie in [0, 1]")
    evs = sorted(script.events, key=lambda e: e.start)
    for e in evs:
        if e.activity not in ACTIVITY_CLASSES:
            raise ScriptError(f"activity {e.activity} outside 1..15")
        if not 0 <= e.start < e.end <= script.duration:
            raise ScriptError(f"event [{e.start}, {e.end}) outside [0, {script.duration}]")
        if e.driver not in DRIVERS:
            raise ScriptError(f"unknown driver {e.driver!r}; expected one of {DRIVERS}")
        if e.driver == "head":
            if not thresholds.theta_head < e.magnitude <= 180:
                raise ScriptError(f"head magnitude {e.magnitude} must exceed theta_head={thresholds.theta_head}")
        elif not thresholds.theta_hand < e.magnitude <= 90:
            raise ScriptError(f"hand magnitude {e.magnitude} must exceed theta_hand={thresholds.theta_hand}")
    for a, b in zip(evs, evs[1:]):
        if b.start < a.end:
            raise ScriptError(f"events [{a.start}, {a.end}) and [{b.start}, {b.end}) overlap")


def inverse_pose(
    head_angle: float,
    left_elev: float,
    right_elev: float,
    width: int = 1280,
    height: int = 720,
) -> Dict[str, Tuple[float, float]]:
    """Unit-square joint positions that realize the requested angles.

    Angles are recovered by the kinematics module with aspect correction on
    for the given frame size.
    """
    if not 0 <= head_angle <= 180:
        raise ValueError(f"head angle {head_angle} outside [0, 180]")
    for e in (left_elev, right_elev):
        if not -90 <= e <= 90:
            raise ValueError(f"hand elevation {e} outside [-90, 90]")

    a = math.radians(head_angle)
    iso = {
        "left_eye": (EYE_HALF_SPAN, EYE_Y),
        "right_eye": (-EYE_HALF_SPAN, EYE_Y),
        "nose": (NOSE_OFFSET * math.sin(a), EYE_Y + NOSE_OFFSET * math.cos(a)),
        "left_shoulder": (SHOULDER_HALF_SPAN, SHOULDER_Y),
        "right_shoulder": (-SHOULDER_HALF_SPAN, SHOULDER_Y),
    }
    for side, sign, elev in (("left", 1.0, left_elev), ("right", -1.0, right_elev)):
        e = math.radians(elev)
        ex, ey = sign * ELBOW_HALF_SPAN, ELBOW_Y
        # forearm points inward, toward the body midline
        iso[f"{side}_elbow"] = (ex, ey)
        iso[f"{side}_wrist"] = (ex - sign * FOREARM * math.cos(e), ey - FOREARM * math.sin(e))

    # iso x is in height units; unit-square x = 0.5 + x * height / width
    r = height / width
    return {name: (0.5 + x * r, y) for name, (x, y) in iso.items()}


@dataclass
class SynthVideo:
    script: EventScript
    trace_lines: List[str] = field(default_factory=list)
    score_lines: List[str] = field(default_factory=list)
    events: List[LabeledEvent] = field(default_factory=list)
    # per-frame (head, left, right) angles written into the trace
    angles: List[Tuple[float, float, float]] = field(default_factory=list)


def _frame_angles(script: EventScript, n_frames: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per-frame angle triples and activity ids (0 outside events)."""
    angles = np.zeros((n_frames, 3))
    activity = np.zeros(n_frames, dtype=int)
    t = np.arange(n_frames) / script.fps
    for e in script.events:
        inside = (t >= e.start) & (t < e.end)
        angles[inside, DRIVERS.index(e.driver)] = e.magnitude
        activity[inside] = e.activity
    return angles, activity


def generate(script: EventScript, thresholds: SegmenterConfig = SegmenterConfig()) -> SynthVideo:
    """Build trace records, score records and ground-truth events for one video."""
    validate_script(script, thresholds)
    n_frames = int(math.ceil(script.duration * script.fps - 1e-9))
    angles, activity = _frame_angles(script, n_frames)

    rng = np.random.default_rng(script.seed)
    names = REQUIRED_KEYPOINTS
    if script.noise_sigma > 0:
        noise = rng.normal(0.0, script.noise_sigma, size=(n_frames, len(names), 2))
    else:
        noise = np.zeros((n_frames, len(names), 2))
    if script.score_noise > 0:
        uniform = rng.uniform(size=(n_frames, NUM_SCORES))
        uniform /= uniform.sum(axis=1, keepdims=True)

    w, h = script.width, script.height
    out = SynthVideo(script)
    pose_cache: Dict[Tuple[float, float, float], Dict[str, Tuple[float, float]]] = {}
    for i in range(n_frames):
        key = tuple(float(a) for a in angles[i])
        if key not in pose_cache:
            pose_cache[key] = inverse_pose(*key, width=w, height=h)
        pose = pose_cache[key]
        kps = {}
        for k, name in enumerate(names):
            x, y = pose[name]
            x = min(max(x + noise[i, k, 0], 0.0), 1.0)
            y = min(max(y + noise[i, k, 1], 0.0), 1.0)
            kps[name] = [x * w, y * h, 1.0]
        out.trace_lines.append(
            json.dumps(
                {"video_id": script.video_id, "frame": i, "width": w, "height": h, "keypoints": kps},
                separators=(",", ":"),
            )
        )
        scores = np.zeros(NUM_SCORES)
        scores[activity[i]] = 1.0
        if script.score_noise > 0:
            scores = (1 - script.score_noise) * scores + script.score_noise * uniform[i]
        out.score_lines.append(
            json.dumps({"video_id": script.video_id, "frame": i, "scores": scores.tolist()}, separators=(",", ":"))
        )
        out.angles.append(key)

    out.events = [
        LabeledEvent(script.video_id, float(e.start), float(e.end), e.activity)
        for e in sorted(script.events, key=lambda e: e.start)
    ]
    return out


def iter_generate(scripts: Sequence[EventScript], thresholds: SegmenterConfig = SegmenterConfig()) -> Iterator[SynthVideo]:
    for s in sorted(scripts, key=lambda s: s.video_id):
        yield generate(s, thresholds)


def load_scripts(path) -> List[EventScript]:
    """Read a script file: one script object, or ``{"videos": [...]}``."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScriptError(f"{path}: malformed script ({exc})") from None
    if isinstance(doc, dict) and "videos" in doc:
        if set(doc) != {"videos"}:
            raise ScriptError(f"unknown top-level script fields {sorted(set(doc) - {'videos'})}")
        items = doc["videos"]
    else:
        items = [doc]
    scripts = [EventScript.from_dict(d) for d in items]
    ids = [s.video_id for s in scripts]
    if len(set(ids)) != len(ids):
        raise ScriptError("duplicate video ids in script")
    return scripts


TRACE_FILE = "trace.jsonl"
SCORES_FILE = "scores.jsonl"
GT_FILE = "gt.txt"


def write_bundle(scripts: Sequence[EventScript], out_dir, thresholds: SegmenterConfig = SegmenterConfig()) -> Dict[str, Path]:
    """Write trace, score and ground-truth files for all scripts into ``out_dir``."""
    for s in scripts:
        validate_script(s, thresholds)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"trace": out_dir / TRACE_FILE, "scores": out_dir / SCORES_FILE, "gt": out_dir / GT_FILE}
    id_map = build_id_map(s.video_id for s in scripts)
    events = []
    with open(paths["trace"], "w", encoding="utf-8", newline="\n") as tf, \
            open(paths["scores"], "w", encoding="utf-8", newline="\n") as sf:
        for video in iter_generate(scripts, thresholds):
            for line in video.trace_lines:
                tf.write(line + "\n")
            for line in video.score_lines:
                sf.write(line + "\n")
            events.extend(video.events)
    with open(paths["gt"], "w", encoding="utf-8", newline="\n") as gf:
        gf.write(format_submission(to_submission(events, id_map)))
    return paths


def random_scripts(
    n_videos: int = 10,
    seed: int = 0,
    noise_sigma: float = 0.0,
    fps: float = 30.0,
    repeats: int = 1,
) -> List[EventScript]:
    """Scripts with every class once plus ``repeats`` extra events per video.

    Events last 3..12 s, separated by 2..6 s of normal driving, and start and
    end on whole seconds.  Drivers and magnitudes are drawn at random, well
    above the default thresholds.
    """
    rng = np.random.default_rng(seed)
    scripts = []
    for v in range(n_videos):
        classes = list(range(1, 16)) + [int(c) for c in rng.integers(1, 16, size=repeats)]
        rng.shuffle(classes)
        t = int(rng.integers(2, 7))
        events = []
        for c in classes:
            length = int(rng.integers(3, 13))
            driver = DRIVERS[int(rng.integers(0, 3))]
            magnitude = float(rng.uniform(45, 75)) if driver == "head" else float(rng.uniform(60, 85))
            events.append(ScriptEvent(c, float(t), float(t + length), driver, round(magnitude, 3)))
            t += length + int(rng.integers(2, 7))
        scripts.append(
            EventScript(
                video_id=f"video_{v:03d}.mp4",
                fps=fps,
                duration=float(t),
                events=tuple(events),
                noise_sigma=noise_sigma,
                seed=seed * 1000 + v,
            )
        )
    return scripts
