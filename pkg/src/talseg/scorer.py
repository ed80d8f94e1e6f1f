"""Activity-overlap scoring of predicted events against ground truth.

A prediction may match a ground-truth event only when both are in the same
video and class and both endpoint deltas are within ``window`` seconds
(inclusive).  Matching is one-to-one.  The aggregate is

    sum(os of matched pairs) / (number of ground truths + unmatched predictions)

so missed ground truths count as zero and spurious predictions enlarge the
denominator.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .classifier import LabeledEvent
from .errors import MatchingSizeError

WINDOW = 10.0
OPTIMAL_CAP = 12
MODES = ("greedy", "optimal")


def overlap_score(p: Tuple[float, float], g: Tuple[float, float]) -> float:
    """Temporal intersection over union of two intervals."""
    ps, pe = p
    gs, ge = g
    if not ps < pe:
        raise ValueError(f"degenerate prediction interval ({ps}, {pe})")
    if not gs < ge:
        raise ValueError(f"degenerate ground-truth interval ({gs}, {ge})")
    inter = max(min(ge, pe) - max(gs, ps), 0.0)
    return inter / (max(ge, pe) - min(gs, ps))


@dataclass(frozen=True)
class MatchCandidate:
    pred: int
    gt: int
    os: float


def enumerate_candidates(
    preds: Sequence[LabeledEvent], gts: Sequence[LabeledEvent], window: float = WINDOW
) -> List[MatchCandidate]:
    """All gate-passing (prediction, ground truth) pairs.

    Sorted by descending os, then ground-truth start, then prediction start;
    indices break any remaining ties.
    """
    by_key = defaultdict(list)
    for j, g in enumerate(gts):
        by_key[(g.video_id, g.activity)].append(j)

    keyed = []
    for i, p in enumerate(preds):
        for j in by_key.get((p.video_id, p.activity), ()):
            g = gts[j]
            if abs(p.start - g.start) <= window and abs(p.end - g.end) <= window:
                os_ = overlap_score((p.start, p.end), (g.start, g.end))
                keyed.append(((-os_, g.start, p.start, i, j), MatchCandidate(i, j, os_)))
    keyed.sort(key=lambda kc: kc[0])
    return [c for _, c in keyed]


def _match_greedy(candidates: Sequence[MatchCandidate]) -> List[MatchCandidate]:
    used_p, used_g = set(), set()
    out = []
    for c in candidates:
        if c.pred in used_p or c.gt in used_g:
            continue
        used_p.add(c.pred)
        used_g.add(c.gt)
        out.append(c)
    return out


def _match_optimal(candidates: Sequence[MatchCandidate]) -> List[MatchCandidate]:
    """Maximum-total-os one-to-one assignment by exhaustive search over gt subsets."""
    preds = sorted({c.pred for c in candidates})
    gts = sorted({c.gt for c in candidates})
    if len(preds) > OPTIMAL_CAP or len(gts) > OPTIMAL_CAP:
        raise MatchingSizeError(
            f"optimal matching is limited to {OPTIMAL_CAP}x{OPTIMAL_CAP}, "
            f"got {len(preds)} predictions x {len(gts)} ground truths"
        )
    gt_bit = {g: 1 << k for k, g in enumerate(gts)}
    options: Dict[int, List[MatchCandidate]] = defaultdict(list)
    for c in candidates:
        options[c.pred].append(c)

    # best[mask] = (total, chosen pairs) over predictions processed so far,
    # where mask marks ground truths already taken
    best: Dict[int, Tuple[float, Tuple[MatchCandidate, ...]]] = {0: (0.0, ())}
    for p in preds:
        nxt = dict(best)
        for mask, (total, chosen) in best.items():
            for c in options[p]:
                bit = gt_bit[c.gt]
                if mask & bit:
                    continue
                key = mask | bit
                cand = (total + c.os, chosen + (c,))
                if key not in nxt or cand[0] > nxt[key][0]:
                    nxt[key] = cand
        best = nxt
    total, chosen = max(best.values(), key=lambda v: v[0])
    return list(chosen)


def match(candidates: Sequence[MatchCandidate], mode: str = "greedy") -> List[MatchCandidate]:
    """One-to-one matching of candidates.

    ``greedy`` accepts candidates in their given order when neither side is
    taken yet.  ``optimal`` maximizes total os exactly and refuses inputs
    with more than 12 predictions or ground truths.
    """
    if mode == "greedy":
        return _match_greedy(candidates)
    if mode == "optimal":
        return _match_optimal(candidates)
    raise ValueError(f"unknown matching mode {mode!r}; expected one of {MODES}")


def _components(candidates: Sequence[MatchCandidate]) -> List[List[MatchCandidate]]:
    """Split the bipartite candidate graph into connected components."""
    parent: Dict[Tuple[str, int], Tuple[str, int]] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in candidates:
        a, b = find(("p", c.pred)), find(("g", c.gt))
        if a != b:
            parent[a] = b
    groups: Dict[Tuple[str, int], List[MatchCandidate]] = defaultdict(list)
    for c in candidates:
        groups[find(("p", c.pred))].append(c)
    return list(groups.values())


def match_all(candidates: Sequence[MatchCandidate], mode: str = "greedy") -> List[MatchCandidate]:
    """Like :func:`match`, but optimal mode runs per connected component.

    Components are independent, so the result is globally optimal; the size
    cap then applies to each component rather than to the whole file.
    """
    if mode != "optimal":
        return match(candidates, mode)
    out = []
    for comp in _components(candidates):
        out.extend(match(comp, "optimal"))
    out.sort(key=lambda c: (c.pred, c.gt))
    return out


@dataclass
class ClassScore:
    gt: int = 0
    pred: int = 0
    matched: int = 0
    os_sum: float = 0.0

    @property
    def score(self) -> float:
        return _aggregate(self.os_sum, self.gt, self.pred - self.matched)

    def as_dict(self) -> dict:
        return {"gt": self.gt, "pred": self.pred, "matched": self.matched, "os_sum": self.os_sum, "score": self.score}


def _aggregate(os_sum: float, n_gt: int, unmatched_pred: int) -> float:
    denom = n_gt + unmatched_pred
    if denom == 0:
        return 1.0
    return os_sum / denom


@dataclass
class ScoreReport:
    pairs: List[MatchCandidate]
    n_gt: int
    n_pred: int
    mode: str
    per_class: Dict[int, ClassScore] = field(default_factory=dict)
    # optimal total minus greedy total, when both modes were computable
    mode_gap: float | None = None

    @property
    def os_sum(self) -> float:
        return sum(c.os for c in self.pairs)

    @property
    def unmatched_gt(self) -> int:
        return self.n_gt - len(self.pairs)

    @property
    def unmatched_pred(self) -> int:
        return self.n_pred - len(self.pairs)

    @property
    def aggregate(self) -> float:
        return _aggregate(self.os_sum, self.n_gt, self.unmatched_pred)

    @property
    def modes_diverge(self) -> bool | None:
        if self.mode_gap is None:
            return None
        return self.mode_gap > 1e-12

    def as_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "mode": self.mode,
            "n_gt": self.n_gt,
            "n_pred": self.n_pred,
            "unmatched_gt": self.unmatched_gt,
            "unmatched_pred": self.unmatched_pred,
            "os_sum": self.os_sum,
            "modes_diverge": self.modes_diverge,
            "mode_gap": self.mode_gap,
            "pairs": [{"pred": c.pred, "gt": c.gt, "os": c.os} for c in self.pairs],
            "per_class": {str(k): v.as_dict() for k, v in sorted(self.per_class.items())},
        }


def score(
    preds: Sequence[LabeledEvent],
    gts: Sequence[LabeledEvent],
    mode: str = "greedy",
    window: float = WINDOW,
) -> ScoreReport:
    candidates = enumerate_candidates(preds, gts, window)
    pairs = match_all(candidates, mode)

    other = "optimal" if mode == "greedy" else "greedy"
    try:
        other_pairs = match_all(candidates, other)
    except MatchingSizeError:
        gap = None
    else:
        totals = {mode: sum(c.os for c in pairs), other: sum(c.os for c in other_pairs)}
        gap = totals["optimal"] - totals["greedy"]

    per_class: Dict[int, ClassScore] = defaultdict(ClassScore)
    for g in gts:
        per_class[g.activity].gt += 1
    for p in preds:
        per_class[p.activity].pred += 1
    for c in pairs:
        cs = per_class[gts[c.gt].activity]
        cs.matched += 1
        cs.os_sum += c.os

    return ScoreReport(pairs, len(gts), len(preds), mode, dict(per_class), gap)


def score_submissions(pred_rows, gt_rows, mode: str = "greedy") -> ScoreReport:
    """Score two parsed submission files (see :mod:`talseg.postprocess`)."""
    return score([r.to_event() for r in pred_rows], [r.to_event() for r in gt_rows], mode)
