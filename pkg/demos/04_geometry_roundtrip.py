"""
Pose geometry round trip
========================

The synthetic generator builds a pose whose angles are known exactly.
Measuring it back recovers those angles to floating point precision, on
any frame aspect ratio.
"""

from talseg.kinematics import hand_angle, head_angle
from talseg.synth import inverse_pose

###############################################################################
# ``inverse_pose`` returns unit-square keypoints for a target head angle and
# two forearm elevations.  Measuring them with the aspect factor width/height
# gives the targets back.  Joints need a confidence to be measured.


def joints(width, height, head, left, right):
    return {k: (x, y, 1.0) for k, (x, y) in inverse_pose(head, left, right, width, height).items()}


for width, height in [(1280, 720), (640, 480), (720, 1280)]:
    kp = joints(width, height, 35.0, 55.0, -20.0)
    xs = width / height
    got = (
        head_angle(kp["left_eye"], kp["right_eye"], kp["nose"], x_scale=xs),
        hand_angle(kp["left_elbow"], kp["left_wrist"], x_scale=xs),
        hand_angle(kp["right_elbow"], kp["right_wrist"], x_scale=xs),
    )
    print(f"{width}x{height}: head={got[0]:.9f} left={got[1]:.9f} right={got[2]:.9f}")

###############################################################################
# Without the aspect correction the head angle is distorted on wide frames.

kp = joints(1280, 720, 35.0, 0.0, 0.0)
print(f"uncorrected head angle: {head_angle(kp['left_eye'], kp['right_eye'], kp['nose']):.3f}")
