"""
Scoring predicted events
========================

Predictions are scored against ground truth with a temporal overlap score
and one-to-one matching.  This demo walks through the overlap score, the
candidate gates, and the difference between greedy and optimal matching.
"""

from talseg.classifier import LabeledEvent
from talseg.scorer import enumerate_candidates, match, overlap_score, score

###############################################################################
# Overlap score: intersection over the union of the two intervals.  Touching
# or disjoint intervals score 0.

print(overlap_score((0, 10), (5, 15)))  # 5 / 15
print(overlap_score((0, 10), (0, 10)))  # 1.0
print(overlap_score((0, 10), (10, 20)))  # 0.0

###############################################################################
# A prediction is only a candidate for a ground-truth event of the same video
# and class whose start and end both lie within 10 seconds of its own.

gts = [LabeledEvent("v", 20.0, 30.0, 3), LabeledEvent("v", 50.0, 60.0, 5)]
preds = [
    LabeledEvent("v", 22.0, 31.0, 3),   # good match
    LabeledEvent("v", 5.0, 28.0, 3),    # overlaps, but start is 15 s off
    LabeledEvent("v", 50.0, 60.0, 6),   # right time, wrong class
]
for c in enumerate_candidates(preds, gts):
    print(f"  pred {c.pred} -> gt {c.gt}  os={c.os:.3f}")

report = score(preds, gts)
print(f"aggregate={report.aggregate:.4f}  unmatched gt={report.unmatched_gt}  unmatched pred={report.unmatched_pred}")

###############################################################################
# Greedy versus optimal.  Greedy takes the single best pair first, which can
# block two decent pairs; optimal maximizes the total.

gts = [LabeledEvent("v", 0.0, 6.0, 1), LabeledEvent("v", 3.0, 9.0, 1)]
preds = [LabeledEvent("v", 0.0, 12.0, 1), LabeledEvent("v", 0.0, 3.0, 1)]
cands = enumerate_candidates(preds, gts)
for mode in ("greedy", "optimal"):
    pairs = match(cands, mode)
    print(f"  {mode:7s} pairs={[(c.pred, c.gt) for c in pairs]}  sum os={sum(c.os for c in pairs):.3f}")

report = score(preds, gts, mode="greedy")
print(f"greedy aggregate={report.aggregate:.4f}  gap to optimal={report.mode_gap:.4f}")
