"""Batch pipeline: one command from tracks CSV + description to exports.

Exit codes: 0 success (an empty pool is still success), 2 usage error,
3 dataset schema/parse error, 4 interpretation error, 5 provider error,
6 export error.
"""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .activities import DetectionParams
from .criticality import (
    CriticalityConfig,
    MetricKind,
    MetricParams,
    filter_pool,
)
from .errors import (
    CredentialError,
    InterpretationError,
    ProviderError,
    ScenarioMinerError,
    VocabularyError,
)
from .evaluation import (
    classification_metrics,
    match_predictions,
    read_labels_csv,
    synthetic_corpus,
    write_labels_csv,
)
from .exporters import (
    ExportConfig,
    emit_ego_path,
    to_carmaker_text,
    to_openscenario,
)
from .schema import query_from_json, query_to_json, validate_query
from .search import SearchParams, find_matches
from .trajectory_store import RecordingConfig, parse_tracks_csv
from .understanding import ProviderConfig, interpret_offline, interpret_remote

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_INTERPRETATION = 4
EXIT_PROVIDER = 5
EXIT_EXPORT = 6

MANIFEST_VERSION = 1


@click.group()
@click.version_option(version=__version__, prog_name="scenario-miner")
def main():
    """Mine driving scenarios from trajectory recordings."""


@main.command()
@click.option("--tracks", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--query-text", default=None, help="Natural-language description.")
@click.option("--query-json", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Canonical query JSON file.")
@click.option("--provider", type=click.Choice(["offline", "remote"]),
              default="offline", show_default=True)
@click.option("--metric", "metric_name",
              type=click.Choice([k.value for k in MetricKind]), default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--cmp", "comparison", type=click.Choice(["le", "ge"]), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--format", "formats", default="xosc,cmtxt", show_default=True,
              help="Comma-separated export formats (xosc, cmtxt).")
@click.option("--frame-rate", type=float, default=25.0, show_default=True)
@click.option("--recording-id", default=None)
@click.option("--a-lon-threshold", type=float, default=0.2, show_default=True)
@click.option("--min-activity-duration", type=float, default=1.0, show_default=True)
@click.option("--lane-change-half-window", type=float, default=2.0, show_default=True)
@click.option("--end-position-grace", type=float, default=2.0, show_default=True)
@click.option("--min-window-duration", type=float, default=1.0, show_default=True)
def extract(tracks, query_text, query_json, provider, metric_name, threshold,
            comparison, out_dir, formats, frame_rate, recording_id,
            a_lon_threshold, min_activity_duration, lane_change_half_window,
            end_position_grace, min_window_duration):
    """Search a recording and write exports, a pool manifest and a run log."""
    if (query_text is None) == (query_json is None):
        click.echo("error: exactly one of --query-text / --query-json", err=True)
        sys.exit(EXIT_USAGE)
    if (metric_name is None) != (threshold is None):
        click.echo("error: --metric and --threshold go together", err=True)
        sys.exit(EXIT_USAGE)
    format_list = [f.strip() for f in formats.split(",") if f.strip()]
    unknown = set(format_list) - {"xosc", "cmtxt"}
    if unknown:
        click.echo(f"error: unknown formats: {sorted(unknown)}", err=True)
        sys.exit(EXIT_USAGE)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_lines: list[str] = []

    def log(message: str) -> None:
        log_lines.append(message)
        click.echo(message)

    rid = recording_id or Path(tracks).stem
    config = RecordingConfig(frame_rate=frame_rate, recording_id=rid)
    try:
        with open(tracks, "rb") as fh:
            store = parse_tracks_csv(fh, config)
    except ScenarioMinerError as exc:
        click.echo(f"dataset error: {exc}", err=True)
        sys.exit(EXIT_SCHEMA)
    log(f"loaded {len(store)} tracks, {store.total_samples} samples from {tracks}")

    try:
        if query_text is not None:
            if provider == "offline":
                query = interpret_offline(query_text)
            else:
                provider_config = ProviderConfig(
                    api_key=os.environ.get("SCENARIO_MINER_API_KEY", ""),
                )
                query = interpret_remote(query_text, provider_config)
        else:
            with open(query_json, "r", encoding="utf-8") as fh:
                query = query_from_json(json.load(fh))
    except (ProviderError, CredentialError) as exc:
        click.echo(f"provider error: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)
    except (InterpretationError, VocabularyError, ScenarioMinerError) as exc:
        click.echo(f"interpretation error: {exc}", err=True)
        sys.exit(EXIT_INTERPRETATION)

    violations = validate_query(query)
    if violations:
        click.echo(f"invalid query: {'; '.join(violations)}", err=True)
        sys.exit(EXIT_INTERPRETATION)
    log(f"query: {json.dumps(query_to_json(query))}")

    params = SearchParams(
        detection=DetectionParams(
            a_lon_threshold=a_lon_threshold,
            min_activity_duration=min_activity_duration,
            lane_change_half_window=lane_change_half_window,
        ),
        end_position_grace=end_position_grace,
        min_window_duration=min_window_duration,
    )
    matches = find_matches(store, query, params)
    log(f"found {len(matches)} matches")

    criticality_config = None
    if metric_name is not None:
        criticality_config = CriticalityConfig(
            kind=MetricKind(metric_name),
            threshold=threshold,
            comparison=comparison,
        )
        selected, rejected = filter_pool(matches, store, criticality_config)
        log(
            f"criticality {metric_name} threshold {threshold}: "
            f"{len(selected)} selected, {len(rejected)} rejected"
        )
    else:
        from .criticality import ScoredMatch
        selected = [
            ScoredMatch(match=m, reports=(), passes=True) for m in matches
        ]
        rejected = []

    export_config = ExportConfig()
    manifest_matches = []
    try:
        for index, scored in enumerate(selected, start=1):
            match = scored.match
            stem = f"scenario_{index:04d}"
            files = {}
            if "xosc" in format_list:
                path = out / f"{stem}.xosc"
                path.write_text(
                    to_openscenario(match, store, export_config),
                    encoding="utf-8",
                )
                files["xosc"] = path.name
            if "cmtxt" in format_list:
                path = out / f"{stem}.txt"
                path.write_text(
                    to_carmaker_text(match, store, export_config),
                    encoding="utf-8",
                )
                files["cmtxt"] = path.name
            ego_path = out / f"{stem}_ego_path.txt"
            ego_path.write_text(
                emit_ego_path(match, store, export_config), encoding="utf-8"
            )
            files["ego_path"] = ego_path.name
            manifest_matches.append(_match_entry(scored, files))
    except ScenarioMinerError as exc:
        click.echo(f"export error: {exc}", err=True)
        sys.exit(EXIT_EXPORT)

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "tool_version": __version__,
        "recording_id": rid,
        "config": {
            "frame_rate": frame_rate,
            "detection": {
                "a_lon_threshold": a_lon_threshold,
                "min_activity_duration": min_activity_duration,
                "lane_change_half_window": lane_change_half_window,
            },
            "search": {
                "end_position_grace": end_position_grace,
                "min_window_duration": min_window_duration,
            },
            "criticality": (
                {
                    "metric": metric_name,
                    "threshold": threshold,
                    "comparison": (
                        criticality_config.effective_comparison
                        if criticality_config else None
                    ),
                }
                if metric_name else None
            ),
            "formats": format_list,
            "provider": provider if query_text is not None else None,
        },
        "query": query_to_json(query),
        "matches": manifest_matches,
        "rejected": [_match_entry(s, {}) for s in rejected],
        "counts": {
            "pool": len(matches),
            "selected": len(selected),
            "rejected": len(rejected),
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    (out / "run.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    log(f"wrote manifest with {len(manifest_matches)} selected matches to {out}")
    sys.exit(EXIT_OK)


def _match_entry(scored, files: dict) -> dict:
    match = scored.match
    entry = {
        "ego_id": match.ego_id,
        "targets": [
            {
                "target_id": tw.target_id,
                "window": [tw.frame_start, tw.frame_end],
            }
            for tw in match.targets
        ],
        "scenario_window": list(match.scenario_window),
        "passes": scored.passes,
        "reports": [
            {
                "kind": r.kind.value,
                "aggregate": r.aggregate,
                "threshold": r.threshold,
                "comparison": r.comparison,
                "passes_threshold": r.passes_threshold,
            }
            for r in scored.reports
        ],
    }
    if files:
        entry["files"] = files
    return entry


@main.command()
@click.option("--predictions", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Manifest JSON produced by extract.")
@click.option("--truth", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Ground-truth labels CSV.")
@click.option("--mode", type=click.Choice(["instance", "frame"]),
              default="instance", show_default=True)
@click.option("--iou", type=float, default=0.5, show_default=True)
def evaluate(predictions, truth, mode, iou):
    """Score a manifest against ground-truth labels; metrics JSON on stdout."""
    if mode == "instance" and not (0 < iou <= 1):
        click.echo("error: --iou must be in (0, 1]", err=True)
        sys.exit(EXIT_USAGE)
    with open(predictions, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    instances = [
        (m["ego_id"], t["target_id"], t["window"][0], t["window"][1])
        for m in manifest.get("matches", [])
        for t in m["targets"]
    ]
    with open(truth, "r", encoding="utf-8") as fh:
        labels = read_labels_csv(fh.read())
    counts = match_predictions(
        instances, labels,
        mode="instance_iou" if mode == "instance" else "frame_level",
        iou_threshold=iou,
    )
    metrics = classification_metrics(counts)
    click.echo(json.dumps({
        "counts": {"tp": counts.tp, "fp": counts.fp, "fn": counts.fn},
        "metrics": metrics,
    }, indent=2))
    sys.exit(EXIT_OK)


@main.command("make-corpus")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--following", type=int, default=0)
@click.option("--cut-in", "cut_in", type=int, default=0)
@click.option("--cut-out", "cut_out", type=int, default=0)
@click.option("--distractors", type=int, default=20, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def make_corpus(seed, following, cut_in, cut_out, distractors, out_dir):
    """Write a deterministic synthetic recording plus ground-truth labels."""
    spec = {}
    if following:
        spec["following"] = following
    if cut_in:
        spec["cut-in"] = cut_in
    if cut_out:
        spec["cut-out"] = cut_out
    if not spec:
        click.echo("error: request at least one episode", err=True)
        sys.exit(EXIT_USAGE)
    csv_text, labels = synthetic_corpus(seed, spec, distractors=distractors)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tracks.csv").write_text(csv_text, encoding="utf-8")
    (out / "labels.csv").write_text(write_labels_csv(labels), encoding="utf-8")
    click.echo(f"wrote {out / 'tracks.csv'} and {out / 'labels.csv'}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service for the web UI."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
