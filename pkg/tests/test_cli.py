import json

import pytest

from talseg.cli import main
from talseg.synth import EventScript, ScriptEvent


@pytest.fixture
def bundle(tmp_path):
    scripts = [
        EventScript("cam_b.mp4", duration=30.0, events=(
            ScriptEvent(4, 3.0, 9.0, "head", 50.0), ScriptEvent(11, 15.0, 22.0, "right_hand", 70.0))),
        EventScript("cam_a.mp4", duration=25.0, events=(ScriptEvent(7, 10.0, 20.0, "left_hand", 65.0),)),
    ]
    script = tmp_path / "script.json"
    script.write_text(json.dumps({"videos": [s.to_dict() for s in scripts]}))
    out = tmp_path / "bundle"
    assert main(["synth", str(script), "--out", str(out)]) == 0
    return out


def test_synth_creates_three_files(bundle):
    for name in ("trace.jsonl", "scores.jsonl", "gt.txt"):
        assert (bundle / name).is_file()
    assert (bundle / "gt.txt").read_text() == "1 7 10 20\n2 4 3 9\n2 11 15 22\n"


def test_synth_rejects_overlap(tmp_path, capsys):
    s = EventScript("v", duration=20.0, events=(ScriptEvent(1, 1, 5, "head", 50), ScriptEvent(2, 4, 8, "head", 50)))
    path = tmp_path / "s.json"
    path.write_text(json.dumps(s.to_dict()))
    assert main(["synth", str(path), "--out", str(tmp_path / "o")]) != 0
    assert "overlap" in capsys.readouterr().err


def test_segment_matches_script(bundle, tmp_path):
    out = tmp_path / "segs.jsonl"
    assert main(["segment", str(bundle / "trace.jsonl"), "--out", str(out)]) == 0
    segs = [json.loads(line) for line in out.read_text().splitlines()]
    got = [(s["video_id"], s["start"], round(s["end"], 9)) for s in segs]
    assert got == [("cam_a.mp4", 10.0, 20.0), ("cam_b.mp4", 3.0, 9.0), ("cam_b.mp4", 15.0, 22.0)]
    sidecar = json.loads((tmp_path / "segs.jsonl.config.json").read_text())
    assert sidecar["command"] == "segment" and sidecar["theta_head"] == 25.0


def test_segment_empty_trace(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["segment", str(empty)]) == 0
    assert capsys.readouterr().out == ""


def test_segment_malformed_line(bundle, tmp_path, capsys):
    lines = (bundle / "trace.jsonl").read_text().splitlines()[:6] + ["{oops"]
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["segment", str(bad)]) != 0
    err = capsys.readouterr().err
    assert "trace_io" in err and "line 7" in err


def test_pipeline_recovers_ground_truth(bundle, tmp_path):
    out = tmp_path / "pred.txt"
    assert main(["pipeline", str(bundle / "trace.jsonl"), str(bundle / "scores.jsonl"), "--out", str(out)]) == 0
    assert out.read_text() == (bundle / "gt.txt").read_text()


def test_pipeline_missing_scores_drops_with_warning(bundle, tmp_path, capsys, caplog):
    scores = tmp_path / "partial.jsonl"
    keep = [line for line in (bundle / "scores.jsonl").read_text().splitlines() if "cam_a" in line]
    scores.write_text("\n".join(keep) + "\n")
    assert main(["pipeline", str(bundle / "trace.jsonl"), str(scores)]) == 0
    captured = capsys.readouterr()
    assert captured.out == "1 7 10 20\n"
    assert "no scores for video 'cam_b.mp4'" in caplog.text
    assert "unclassified" in caplog.text


def test_pipeline_rejects_bad_threshold(bundle, capsys):
    assert main(["pipeline", str(bundle / "trace.jsonl"), str(bundle / "scores.jsonl"), "--theta-head", "-5"]) != 0
    captured = capsys.readouterr()
    assert "theta_head" in captured.err and captured.out == ""


def test_pipeline_equals_composition(bundle, tmp_path):
    trace, scores = str(bundle / "trace.jsonl"), str(bundle / "scores.jsonl")
    direct, segs, composed = tmp_path / "d.txt", tmp_path / "s.jsonl", tmp_path / "c.txt"
    assert main(["pipeline", trace, scores, "--out", str(direct)]) == 0
    assert main(["segment", trace, "--out", str(segs)]) == 0
    assert main(["classify", str(segs), scores, "--trace", trace, "--out", str(composed)]) == 0
    assert direct.read_bytes() == composed.read_bytes()


def test_classify_events_output(bundle, tmp_path, capsys):
    segs = tmp_path / "s.jsonl"
    main(["segment", str(bundle / "trace.jsonl"), "--out", str(segs)])
    assert main(["classify", str(segs), str(bundle / "scores.jsonl"), "--events"]) == 0
    events = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [e["activity"] for e in events] == [7, 4, 11]


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_score_identical(tmp_path, capsys):
    f = _write(tmp_path / "a.txt", "1 3 10 20\n2 5 0 4\n")
    assert main(["score", f, f]) == 0
    assert capsys.readouterr().out == "aggregate 1.000000\n"


def test_score_worked_example(tmp_path, capsys):
    pred = _write(tmp_path / "p.txt", "1 3 5 15\n")
    gt = _write(tmp_path / "g.txt", "1 3 10 20\n")
    report = tmp_path / "r.json"
    assert main(["score", pred, gt, "--out", str(report)]) == 0
    assert capsys.readouterr().out == "aggregate 0.333333\n"
    doc = json.loads(report.read_text())
    assert doc["aggregate"] == pytest.approx(1 / 3, abs=1e-15)
    assert doc["pairs"] == [{"pred": 0, "gt": 0, "os": 1 / 3}]


def test_score_optimal_over_cap(tmp_path, capsys):
    rows = "".join(f"1 3 {i} {i + 20}\n" for i in range(13))
    f = _write(tmp_path / "a.txt", rows)
    assert main(["score", f, f, "--matching", "optimal"]) != 0
    err = capsys.readouterr().err
    assert "scorer" in err and "13" in err and "12x12" in err


def test_config_file_and_precedence(bundle, tmp_path):
    cfg = _write(tmp_path / "c.json", json.dumps({"theta_head": 60.0, "gap_tolerance": 0.2}))
    out = tmp_path / "segs.jsonl"
    # theta_head=60 hides the 50 degree head event; the flag restores it
    assert main(["segment", str(bundle / "trace.jsonl"), "--config", cfg, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2
    assert main(["segment", str(bundle / "trace.jsonl"), "--config", cfg, "--theta-head", "25",
                 "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3
    sidecar = json.loads((tmp_path / "segs.jsonl.config.json").read_text())
    assert sidecar["theta_head"] == 25.0 and sidecar["gap_tolerance"] == 0.2


def test_config_unknown_key(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", json.dumps({"theta_heed": 3}))
    empty = _write(tmp_path / "e.jsonl", "")
    assert main(["segment", empty, "--config", cfg]) != 0
    assert "unknown config keys" in capsys.readouterr().err


@pytest.mark.parametrize("command", ["segment", "classify", "pipeline", "score", "synth"])
def test_subcommands_deterministic_with_jobs(command, bundle, tmp_path):
    trace, scores, gt = str(bundle / "trace.jsonl"), str(bundle / "scores.jsonl"), str(bundle / "gt.txt")
    segs = tmp_path / "segs.jsonl"
    main(["segment", trace, "--out", str(segs)])
    script = tmp_path / "script.json"
    script.write_text(json.dumps(EventScript("v", duration=6.0, noise_sigma=0.01, seed=3,
                                             events=(ScriptEvent(1, 1, 4, "head", 50),)).to_dict()))
    args = {
        "segment": [trace],
        "classify": [str(segs), scores, "--trace", trace],
        "pipeline": [trace, scores],
        "score": [gt, gt],
        "synth": [str(script)],
    }[command]
    outputs = []
    for i, jobs in enumerate(["1", "8", "8"]):
        out = tmp_path / f"run{i}"
        assert main([command, *args, "--jobs", jobs, "--out", str(out)]) == 0
        if out.is_dir():
            outputs.append(b"".join((out / n).read_bytes() for n in ("trace.jsonl", "scores.jsonl", "gt.txt")))
        else:
            outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_segment_angle_dump(bundle, tmp_path):
    plain, dumped, angles = tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "angles.jsonl"
    assert main(["segment", str(bundle / "trace.jsonl"), "--out", str(plain)]) == 0
    assert main(["segment", str(bundle / "trace.jsonl"), "--out", str(dumped), "--angles", str(angles)]) == 0
    assert plain.read_bytes() == dumped.read_bytes()
    recs = [json.loads(line) for line in angles.read_text().splitlines()]
    assert len(recs) == 55 * 30
    assert set(recs[0]) == {"video_id", "frame", "t", "head_angle", "left_hand_angle", "right_hand_angle"}
    first_b = next(r for r in recs if r["video_id"] == "cam_b.mp4")
    assert first_b["frame"] == 0 and abs(first_b["head_angle"]) < 1e-9
    in_event = next(r for r in recs if r["video_id"] == "cam_b.mp4" and r["frame"] == 150)
    assert in_event["head_angle"] == pytest.approx(50.0, abs=1e-9)


def test_angle_dump_null_for_undefined(tmp_path):
    trace = tmp_path / "t.jsonl"
    trace.write_text(json.dumps({"video_id": "v", "frame": 0, "width": 100, "height": 100, "keypoints": {}}) + "\n")
    angles = tmp_path / "angles.jsonl"
    assert main(["segment", str(trace), "--angles", str(angles)]) == 0
    rec = json.loads(angles.read_text())
    assert rec["head_angle"] is None and rec["left_hand_angle"] is None and rec["right_hand_angle"] is None
