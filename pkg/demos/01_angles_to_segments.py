"""
From keypoints to anomaly segments
==================================

A driver who looks away from the road or lifts a hand off the wheel shows
up in pose keypoints as a large head angle or a raised forearm.  This demo
builds a short trace by hand, prints the per-frame angles, and shows how
thresholding plus gap merging turns them into time segments.
"""

from talseg import synth
from talseg.kinematics import angle_series
from talseg.segmenter import Label, SegmenterConfig, extract_segments, label_frames
from talseg.trace_io import normalize_coordinates, parse_trace

###############################################################################
# A ten second clip at 10 fps.  The driver turns their head 50 degrees from
# t=2 to t=4, glances back for two frames, then keeps looking away until t=5.
# A brief 0.2 s return is well under the 0.5 s gap tolerance, so it should be
# bridged.

script = synth.EventScript(
    "demo.mp4",
    fps=10.0,
    duration=10.0,
    events=(
        synth.ScriptEvent(4, 2.0, 4.0, "head", 50.0),
        synth.ScriptEvent(4, 4.2, 5.0, "head", 50.0),
        synth.ScriptEvent(11, 7.0, 8.5, "left_hand", 65.0),
    ),
)
video = synth.generate(script)
trace = parse_trace(video.trace_lines, fps=10.0)
print(f"{trace.video_id}: {len(trace.frames)} frames at {trace.fps} fps")

###############################################################################
# Angles.  Coordinates arrive in pixels; they are normalized to the unit
# square first and the x axis is rescaled by width/height so angles are
# measured in a square pixel geometry.

samples = angle_series(normalize_coordinates(trace))
for s in samples[18:24]:
    print(f"  t={s.t:4.1f}  head={s.head_angle:6.2f}  left={s.left_hand_angle:6.2f}  right={s.right_hand_angle:6.2f}")

###############################################################################
# Frame labels and segments.  A frame is anomalous when any angle strictly
# exceeds its threshold; consecutive anomalous runs separated by at most
# ``gap_tolerance`` seconds are merged.

cfg = SegmenterConfig(theta_head=25.0, theta_hand=40.0, gap_tolerance=0.5)
labels = label_frames(samples, cfg)
print("".join("#" if lab.label is Label.ANOMALY else "." for lab in labels))
for seg in extract_segments(labels, trace.fps, cfg, trace.video_id):
    print(f"  segment [{seg.start:.2f}, {seg.end:.2f})  {seg.frames} frames")

###############################################################################
# With no gap tolerance the head event splits in two.

strict = SegmenterConfig(gap_tolerance=0.0)
for seg in extract_segments(label_frames(samples, strict), trace.fps, strict, trace.video_id):
    print(f"  strict [{seg.start:.2f}, {seg.end:.2f})")
