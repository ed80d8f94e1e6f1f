"""Temporal localization of anomalous driver activity from keypoint traces.

Stages, in pipeline order: :mod:`~talseg.trace_io`, :mod:`~talseg.kinematics`,
:mod:`~talseg.segmenter`, :mod:`~talseg.classifier`, :mod:`~talseg.postprocess`;
:mod:`~talseg.scorer` evaluates submissions and :mod:`~talseg.synth` builds
synthetic test data.
"""

from .classifier import ACTIVITY_CLASSES, FrameScores, LabeledEvent, label_segment, parse_scores
from .kinematics import AngleSample, KinematicsConfig, angle_series, hand_angle, head_angle
from .pipeline import PipelineConfig, run_pipeline, segment_trace
from .postprocess import SubmissionRow, build_id_map, filter_short, parse_submission, to_submission
from .scorer import ScoreReport, enumerate_candidates, match, overlap_score, score
from .segmenter import FrameLabel, Label, Segment, SegmenterConfig, classify_frame, extract_segments
from .synth import EventScript, ScriptEvent, generate, inverse_pose
from .trace_io import KeypointFrame, VideoTrace, normalize_coordinates, parse_trace

__version__ = "0.1.0"
