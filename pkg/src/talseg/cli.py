"""Command-line entry point: ``talseg {segment,classify,pipeline,score,synth}``.

Settings resolve as command-line flag, then ``--config`` file (JSON), then
built-in default.  When ``--out`` names a file, the effective settings are
written next to it as ``<out>.config.json``.  ``TALSEG_LOG`` sets the log
level (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .classifier import format_event
from .errors import ConfigError, TalsegError
from .kinematics import format_angles
from .pipeline import PipelineConfig, classify_segments, run_pipeline, segment_stream, segment_trace
from .postprocess import build_id_map, filter_short, format_submission, parse_submission, to_submission
from .scorer import MODES, score_submissions
from .segmenter import format_segment, parse_segments
from .synth import load_scripts, write_bundle
from .trace_io import iter_traces

log = logging.getLogger("talseg")

# flag dest -> PipelineConfig field
_CONFIG_FLAGS = {
    "fps": "fps",
    "conf_threshold": "conf_threshold",
    "theta_head": "theta_head",
    "theta_hand": "theta_hand",
    "gap_tolerance": "gap_tolerance",
    "min_duration": "min_duration",
    "matching": "matching",
    "jobs": "jobs",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings (flags override it)")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--fps", type=float, help="frames per second of the traces (default 30)")
    common.add_argument("--conf-threshold", type=float, help="minimum joint confidence (default 0.5)")
    common.add_argument("--theta-head", type=float, help="head angle threshold, degrees (default 25)")
    common.add_argument("--theta-hand", type=float, help="forearm elevation threshold, degrees (default 40)")
    common.add_argument("--gap-tolerance", type=float, help="longest normal gap merged into a segment, s (default 0.5)")
    common.add_argument("--min-duration", type=float, help="shortest event kept, s (default 1.0)")
    common.add_argument("--matching", choices=MODES, help="matching strategy for scoring (default greedy)")
    common.add_argument("--jobs", type=int, help="worker processes (default 1)")

    parser = argparse.ArgumentParser(prog="talseg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[common], help="extract anomaly segments from a keypoint trace")
    p.add_argument("trace")
    p.add_argument("--angles", help="also write per-frame angles (diagnostic dump) to this path")

    p = sub.add_parser("classify", parents=[common], help="label a segment dump with per-frame scores")
    p.add_argument("segments")
    p.add_argument("scores")
    p.add_argument("--trace", help="trace file whose video ids define the numeric id map")
    p.add_argument("--events", action="store_true", help="emit labelled events instead of a submission")

    p = sub.add_parser("pipeline", parents=[common], help="trace + scores to submission file")
    p.add_argument("trace")
    p.add_argument("scores")

    p = sub.add_parser("score", parents=[common], help="score a submission against ground truth")
    p.add_argument("pred")
    p.add_argument("gt")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic trace/scores/ground-truth bundle")
    p.add_argument("script")
    return parser


def resolve_config(args) -> PipelineConfig:
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: malformed config ({exc})") from None
        if not isinstance(values, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
    cfg = PipelineConfig.from_mapping(values)
    overrides = {field: getattr(args, dest) for dest, field in _CONFIG_FLAGS.items() if getattr(args, dest) is not None}
    try:
        return replace(cfg, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_sidecar(out, cfg: PipelineConfig, command: str) -> None:
    if not out:
        return
    doc = {"command": command, **asdict(cfg)}
    Path(f"{out}.config.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_segment(args, cfg):
    if args.angles:
        # single-process pass so the dump streams in file order
        with open(args.trace, "rb") as fh, open(args.angles, "w", encoding="utf-8", newline="\n") as dump:
            segments = []
            for trace in iter_traces(fh, cfg.fps):
                segments.extend(segment_trace(trace, cfg, lambda vid, s: dump.write(format_angles(s, vid))))
        segments.sort(key=lambda s: s.video_id)
    else:
        with open(args.trace, "rb") as fh:
            _, segments = segment_stream(fh, cfg)
    _emit("".join(format_segment(s) + "\n" for s in segments), args.out)


def cmd_classify(args, cfg):
    with open(args.segments, "rb") as fh:
        segments = parse_segments(fh)
    with open(args.scores, "rb") as fh:
        labelled = classify_segments(segments, fh, cfg)
    events = [e for evs in labelled.values() for e in evs]
    if args.events:
        _emit("".join(format_event(e) + "\n" for e in events), args.out)
        return
    if args.trace:
        with open(args.trace, "rb") as fh:
            video_ids = [t.video_id for t in iter_traces(fh, cfg.fps)]
    else:
        video_ids = [s.video_id for s in segments]
    rows = to_submission(filter_short(events, cfg.min_duration), build_id_map(video_ids)) if video_ids else []
    _emit(format_submission(rows), args.out)


def cmd_pipeline(args, cfg):
    with open(args.trace, "rb") as tf, open(args.scores, "rb") as sf:
        rows = run_pipeline(tf, sf, cfg)
    _emit(format_submission(rows), args.out)


def cmd_score(args, cfg):
    with open(args.pred, "rb") as fh:
        preds = parse_submission(fh)
    with open(args.gt, "rb") as fh:
        gts = parse_submission(fh)
    report = score_submissions(preds, gts, cfg.matching)
    if args.out:
        _emit(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n", args.out)
    sys.stdout.write(f"aggregate {report.aggregate:.6f}\n")


def cmd_synth(args, cfg):
    if not args.out:
        raise ConfigError("synth needs --out <directory>")
    scripts = load_scripts(args.script)
    write_bundle(scripts, args.out, cfg.segmenter)


COMMANDS = {
    "segment": cmd_segment,
    "classify": cmd_classify,
    "pipeline": cmd_pipeline,
    "score": cmd_score,
    "synth": cmd_synth,
}


def _setup_logging():
    level = os.environ.get("TALSEG_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="talseg: %(name)s: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](args, cfg)
        if args.command != "synth":
            _write_sidecar(args.out, cfg, args.command)
        else:
            _write_sidecar(Path(args.out) / "bundle", cfg, args.command)
    except TalsegError as exc:
        sys.stderr.write(f"talseg: {exc.module}: error: {exc}\n")
        return 2
    except (OSError, KeyError, ValueError) as exc:
        sys.stderr.write(f"talseg: {args.command}: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
