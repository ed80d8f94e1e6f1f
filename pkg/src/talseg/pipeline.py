"""End-to-end composition of the stages, per video and over whole files."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .classifier import FrameScores, LabeledEvent, group_scores, label_segments, parse_scores
from .errors import ConfigError
from .kinematics import KinematicsConfig, angle_series
from .postprocess import SubmissionRow, build_id_map, filter_short, to_submission
from .scorer import MODES
from .segmenter import Segment, SegmenterConfig, extract_segments, label_frames
from .trace_io import VideoTrace, iter_traces, normalize_coordinates

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    fps: float = 30.0
    conf_threshold: float = 0.5
    aspect_correct: bool = True
    theta_head: float = 25.0
    theta_hand: float = 40.0
    gap_tolerance: float = 0.5
    carry_forward: bool = True
    min_duration: float = 1.0
    matching: str = "greedy"
    jobs: int = 1

    def __post_init__(self):
        if not (isinstance(self.fps, (int, float)) and math.isfinite(self.fps) and self.fps > 0):
            raise ConfigError(f"fps must be positive, got {self.fps!r}")
        if not (isinstance(self.min_duration, (int, float)) and self.min_duration >= 0):
            raise ConfigError(f"min_duration must be >= 0, got {self.min_duration!r}")
        if self.matching not in MODES:
            raise ConfigError(f"matching must be one of {MODES}, got {self.matching!r}")
        if not (isinstance(self.jobs, int) and self.jobs >= 1):
            raise ConfigError(f"jobs must be a positive integer, got {self.jobs!r}")
        # range checks owned by the stage configs
        self.kinematics
        self.segmenter

    @property
    def kinematics(self) -> KinematicsConfig:
        return KinematicsConfig(self.conf_threshold, self.aspect_correct)

    @property
    def segmenter(self) -> SegmenterConfig:
        return SegmenterConfig(self.theta_head, self.theta_hand, self.gap_tolerance, self.carry_forward)

    @classmethod
    def from_mapping(cls, values: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def segment_trace(trace: VideoTrace, cfg: PipelineConfig, angle_sink=None) -> List[Segment]:
    """Normalize, measure angles, label frames and extract segments.

    ``angle_sink``, if given, receives the video's angle samples.
    """
    trace = normalize_coordinates(trace)
    samples = angle_series(trace, cfg.kinematics)
    if angle_sink is not None:
        angle_sink(trace.video_id, samples)
    labels = label_frames(samples, cfg.segmenter)
    return extract_segments(labels, trace.fps, cfg.segmenter, trace.video_id)


def process_video(
    trace: VideoTrace, scores: Optional[Sequence[FrameScores]], cfg: PipelineConfig
) -> Tuple[str, List[Segment], List[LabeledEvent]]:
    """Segment one video and, if ``scores`` is given, label its segments."""
    segments = segment_trace(trace, cfg)
    events = label_segments(segments, scores or (), trace.fps) if scores is not None else []
    return trace.video_id, segments, events


def _run(tasks: Iterable[tuple], func: Callable, jobs: int) -> Iterator:
    """Apply ``func`` to each argument tuple with at most ``2 * jobs`` in flight.

    Results come back in submission order.
    """
    if jobs <= 1:
        for args in tasks:
            yield func(*args)
        return
    pending = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for args in tasks:
            pending.append(pool.submit(func, *args))
            if len(pending) >= 2 * jobs:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def segment_stream(trace_stream, cfg: PipelineConfig) -> Tuple[List[str], List[Segment]]:
    """Segment every video in a trace file; returns (video ids, segments sorted by video)."""
    tasks = ((t, None, cfg) for t in iter_traces(trace_stream, cfg.fps))
    results = sorted(_run(tasks, process_video, cfg.jobs), key=lambda r: r[0])
    video_ids = [vid for vid, _, _ in results]
    return video_ids, [s for _, segs, _ in results for s in segs]


def _scores_for(scores: Dict[str, List[FrameScores]], video_id: str) -> List[FrameScores]:
    if video_id not in scores:
        log.warning("no scores for video %r; its segments will be dropped", video_id)
    return scores.get(video_id, [])


def run_pipeline(trace_stream, scores_stream, cfg: PipelineConfig) -> List[SubmissionRow]:
    """Trace and score files in, submission rows out."""
    scores = group_scores(parse_scores(scores_stream))
    # videos absent from the score file still get an empty score list, so
    # their segments are reported as unclassified and dropped
    tasks = ((t, _scores_for(scores, t.video_id), cfg) for t in iter_traces(trace_stream, cfg.fps))
    results = sorted(_run(tasks, process_video, cfg.jobs), key=lambda r: r[0])
    if not results:
        return []
    id_map = build_id_map(vid for vid, _, _ in results)
    events = [e for _, _, evs in results for e in evs]
    return to_submission(filter_short(events, cfg.min_duration), id_map)


def classify_segments(
    segments: Sequence[Segment], scores_stream, cfg: PipelineConfig
) -> Dict[str, List[LabeledEvent]]:
    """Label already-extracted segments; keyed by video id."""
    scores = group_scores(parse_scores(scores_stream))
    by_video: Dict[str, List[Segment]] = {}
    for seg in segments:
        by_video.setdefault(seg.video_id, []).append(seg)
    return {vid: label_segments(segs, _scores_for(scores, vid), cfg.fps) for vid, segs in sorted(by_video.items())}
