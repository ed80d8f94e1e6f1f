import math

import numpy as np
import pytest

from talseg.kinematics import KinematicsConfig, angle_series, hand_angle, head_angle
from talseg.trace_io import KeypointFrame, VideoTrace, normalize_coordinates
from talseg.errors import ConfigError

EYES = ((0.45, 0.40, 1.0), (0.55, 0.40, 1.0))


def test_head_frontal_is_zero():
    assert head_angle(*EYES, (0.50, 0.45, 1.0)) == 0.0


def test_head_diagonal_is_45():
    assert head_angle(*EYES, (0.55, 0.45, 1.0)) == pytest.approx(45.0, abs=1e-12)


def test_head_low_confidence_undefined():
    assert head_angle(*EYES, (0.50, 0.45, 0.2), conf_threshold=0.5) is None


def test_head_zero_vector_undefined():
    assert head_angle(*EYES, (0.50, 0.40, 1.0)) is None


def test_hand_horizontal():
    assert hand_angle((0.6, 0.6, 1.0), (0.8, 0.6, 1.0)) == 0.0


def test_hand_straight_up():
    assert hand_angle((0.6, 0.6, 1.0), (0.6, 0.4, 1.0)) == pytest.approx(90.0, abs=1e-12)


def test_hand_pointing_down_is_negative():
    assert hand_angle((0.6, 0.6, 1.0), (0.6, 0.8, 1.0)) == pytest.approx(-90.0, abs=1e-12)


def test_hand_low_confidence_undefined():
    assert hand_angle((0.6, 0.6, 1.0), (0.8, 0.6, 0.0)) is None


def test_aspect_correction_widens_x():
    # on a 2:1 frame a unit-square offset of (0.1, 0.2) is (0.2, 0.2) in pixels
    nose = (0.60, 0.60, 1.0)
    eyes = ((0.45, 0.40, 1.0), (0.55, 0.40, 1.0))
    assert head_angle(*eyes, nose, x_scale=2.0) == pytest.approx(45.0, abs=1e-12)
    assert head_angle(*eyes, nose) == pytest.approx(math.degrees(math.atan(0.5)), abs=1e-12)


def test_head_monotone_in_lateral_offset():
    values = [head_angle(*EYES, (0.5 + dx, 0.45, 1.0)) for dx in np.linspace(0, 0.3, 31)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_config_validation():
    with pytest.raises(ConfigError):
        KinematicsConfig(conf_threshold=1.5)


def _frame(kps, frame=0, width=1280, height=720):
    return KeypointFrame("v", frame, frame / 30, width, height, kps)


def test_angle_series_empty_and_single():
    assert angle_series(VideoTrace("v", 30.0)) == []
    kps = {
        "nose": (640, 330, 1.0), "left_eye": (610, 300, 1.0), "right_eye": (670, 300, 1.0),
        "left_elbow": (500, 600, 1.0), "left_wrist": (600, 600, 1.0),
        "right_elbow": (800, 600, 1.0), "right_wrist": (700, 550, 1.0),
    }
    trace = normalize_coordinates(VideoTrace("v", 30.0, (_frame(kps),)))
    (s,) = angle_series(trace)
    assert s.head_angle == pytest.approx(0.0, abs=1e-9)
    assert s.left_hand_angle == pytest.approx(0.0, abs=1e-9)
    # 100 px across, 50 px up, on isotropic pixels
    assert s.right_hand_angle == pytest.approx(math.degrees(math.atan2(50, 100)), abs=1e-9)


def test_angle_series_requires_normalized():
    with pytest.raises(ValueError, match="not normalized"):
        angle_series(VideoTrace("v", 30.0, (_frame({}),)))


def test_angle_series_matches_synth_script():
    from talseg.synth import EventScript, ScriptEvent, generate
    from talseg.trace_io import parse_trace

    script = EventScript(
        "v", fps=30, duration=100 / 30,
        events=(ScriptEvent(3, 0.5, 1.5, "head", 40.0), ScriptEvent(4, 2.0, 3.0, "right_hand", 70.0)),
    )
    video = generate(script)
    trace = normalize_coordinates(parse_trace(video.trace_lines, 30))
    series = angle_series(trace)
    assert len(series) == 100
    got = np.array([(s.head_angle, s.left_hand_angle, s.right_hand_angle) for s in series])
    np.testing.assert_allclose(got, np.array(video.angles), rtol=0, atol=1e-9)
