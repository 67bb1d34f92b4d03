"""Command-line workflows: corpus generation, extraction, evaluation."""
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from scenario_miner.cli import main
from scenario_miner.evaluation import synthetic_corpus, write_labels_csv

from conftest import CUT_IN_TEXT


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def corpus_dir(tmp_path):
    csv_text, labels = synthetic_corpus(7, {"cut-in": 3}, distractors=10)
    (tmp_path / "tracks.csv").write_text(csv_text)
    (tmp_path / "labels.csv").write_text(write_labels_csv(labels))
    return tmp_path


def run_extract(runner, corpus_dir, out, *extra):
    return runner.invoke(main, [
        "extract",
        "--tracks", str(corpus_dir / "tracks.csv"),
        "--query-text", CUT_IN_TEXT,
        "--out", str(out),
        *extra,
    ])


def test_extract_cut_in_with_ttc_filter(runner, corpus_dir, tmp_path):
    out = tmp_path / "out"
    result = run_extract(
        runner, corpus_dir, out,
        "--metric", "TTC", "--threshold", "10", "--format", "xosc",
    )
    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["matches"]) == 3
    xosc_files = sorted(out.glob("*.xosc"))
    assert len(xosc_files) == 3
    assert (out / "run.log").exists()
    # fully resolved configuration is materialized for reproducibility
    cfg = manifest["config"]
    assert cfg["frame_rate"] == 25.0
    assert cfg["detection"]["a_lon_threshold"] == 0.2
    assert cfg["criticality"] == {
        "metric": "TTC", "threshold": 10.0, "comparison": "le"
    }


def test_extract_empty_pool_is_success(runner, corpus_dir, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(main, [
        "extract",
        "--tracks", str(corpus_dir / "tracks.csv"),
        "--query-text",
        "The ego vehicle decelerates and follows the lane. Target vehicle "
        "#1 drives behind the ego vehicle and accelerates.",
        "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["counts"]["pool"] == 0


def test_extract_both_query_sources_usage_error(runner, corpus_dir, tmp_path):
    result = runner.invoke(main, [
        "extract",
        "--tracks", str(corpus_dir / "tracks.csv"),
        "--query-text", "x", "--query-json", str(corpus_dir / "labels.csv"),
        "--out", str(tmp_path / "out"),
    ])
    assert result.exit_code == 2


def test_extract_ttc_ge_zero_all_pass(runner, corpus_dir, tmp_path):
    out = tmp_path / "out"
    result = run_extract(
        runner, corpus_dir, out,
        "--metric", "TTC", "--threshold", "0", "--cmp", "ge",
    )
    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["counts"]["rejected"] == 0
    assert all(m["passes"] for m in manifest["matches"])


def test_extract_schema_error_exit_code(runner, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("frame,id\n0,1\n")
    result = runner.invoke(main, [
        "extract", "--tracks", str(bad),
        "--query-text", CUT_IN_TEXT, "--out", str(tmp_path / "out"),
    ])
    assert result.exit_code == 3


def test_extract_interpretation_error_exit_code(runner, corpus_dir, tmp_path):
    result = runner.invoke(main, [
        "extract", "--tracks", str(corpus_dir / "tracks.csv"),
        "--query-text", "The ego vehicle decelerates.",
        "--out", str(tmp_path / "out"),
    ])
    assert result.exit_code == 4


def test_extract_query_json_source(runner, corpus_dir, tmp_path):
    query = {
        "ego": {"longitudinal": "keep velocity", "lateral": "follow lane"},
        "targets": [{
            "start": {"group": "adjacent lane",
                      "member": "left adjacent lane"},
            "end": {"group": "same lane", "member": "front"},
            "longitudinal": "acceleration",
            "lateral": "lane change right",
        }],
    }
    qpath = tmp_path / "query.json"
    qpath.write_text(json.dumps(query))
    out = tmp_path / "out"
    result = runner.invoke(main, [
        "extract", "--tracks", str(corpus_dir / "tracks.csv"),
        "--query-json", str(qpath), "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["matches"]) == 3


def test_evaluate_perfect_pipeline(runner, corpus_dir, tmp_path):
    out = tmp_path / "out"
    assert run_extract(runner, corpus_dir, out).exit_code == 0
    result = runner.invoke(main, [
        "evaluate",
        "--predictions", str(out / "manifest.json"),
        "--truth", str(corpus_dir / "labels.csv"),
    ])
    assert result.exit_code == 0, result.output
    body = json.loads(result.output)
    assert body["metrics"]["precision"] == 1.0
    assert body["metrics"]["recall"] == 1.0


def test_evaluate_iou_out_of_range(runner, corpus_dir, tmp_path):
    out = tmp_path / "out"
    assert run_extract(runner, corpus_dir, out).exit_code == 0
    result = runner.invoke(main, [
        "evaluate",
        "--predictions", str(out / "manifest.json"),
        "--truth", str(corpus_dir / "labels.csv"),
        "--iou", "1.1",
    ])
    assert result.exit_code == 2


def test_evaluate_empty_truth(runner, corpus_dir, tmp_path):
    out = tmp_path / "out"
    assert run_extract(runner, corpus_dir, out).exit_code == 0
    empty = tmp_path / "empty.csv"
    empty.write_text("category,egoId,targetId,frameStart,frameEnd\n")
    result = runner.invoke(main, [
        "evaluate",
        "--predictions", str(out / "manifest.json"),
        "--truth", str(empty),
    ])
    body = json.loads(result.output)
    assert body["counts"] == {"tp": 0, "fp": 3, "fn": 0}
    assert body["metrics"]["recall"] is None


def test_make_corpus_command(runner, tmp_path):
    out = tmp_path / "corpus"
    result = runner.invoke(main, [
        "make-corpus", "--seed", "7", "--cut-in", "2",
        "--distractors", "4", "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    assert (out / "tracks.csv").exists()
    assert (out / "labels.csv").exists()


def test_cli_matches_library_pipeline(runner, corpus_dir, tmp_path):
    import io

    from scenario_miner.evaluation import match_instances
    from scenario_miner.search import SearchParams, find_matches
    from scenario_miner.trajectory_store import (
        RecordingConfig,
        parse_tracks_csv,
    )
    from scenario_miner.understanding import interpret_offline

    out = tmp_path / "out"
    assert run_extract(runner, corpus_dir, out).exit_code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    cli_instances = [
        (m["ego_id"], t["target_id"], t["window"][0], t["window"][1])
        for m in manifest["matches"] for t in m["targets"]
    ]

    store = parse_tracks_csv(
        io.StringIO((corpus_dir / "tracks.csv").read_text()),
        RecordingConfig(recording_id="tracks"),
    )
    direct = find_matches(store, interpret_offline(CUT_IN_TEXT), SearchParams())
    assert cli_instances == match_instances(direct)
