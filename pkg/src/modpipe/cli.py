"""Operator CLI: one verb per pipeline operation, JSON/CSV on stdout.

Verbs wrap the library directly (the service and the CLI build pipelines
through the same config resolution, so `modpipe moderate` and
POST /v1/moderate agree on every verdict field). Exit status is nonzero on
any error.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import dataset as dataset_mod
from . import feedback as feedback_mod
from . import metrics as metrics_mod
from .config import ConfigError, ServiceConfig, resolve_config
from .rules import RuleError, compile_rules_file
from .service import build_pipeline


def _load_config(**flags) -> ServiceConfig:
    config_file = flags.pop("config", None)
    try:
        return resolve_config(flags=flags, config_file=config_file)
    except (ConfigError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc


def _pipeline_options(fn):
    fn = click.option("--rules", "rules_path", type=click.Path(path_type=Path), default=None, help="Rules TSV file.")(fn)
    fn = click.option("--model", "model_path", type=click.Path(path_type=Path), default=None, help="Exported model directory.")(fn)
    fn = click.option("--threshold", type=float, default=None, help="Allow/block threshold (default 0.40).")(fn)
    fn = click.option("--fail-policy", "fail_policy", type=click.Choice(["fail_open_allow", "fail_closed_block"]), default=None)(fn)
    fn = click.option("--config", type=click.Path(path_type=Path, exists=True), default=None, help="JSON config file.")(fn)
    return fn


@click.group()
def main():
    """Three-layer text moderation pipeline."""


@main.command()
@click.argument("text", nargs=-1)
@click.option("--file", "file_path", type=click.Path(path_type=Path, exists=True), default=None, help="Moderate each line of this file.")
@_pipeline_options
def moderate(text, file_path, **flags):
    """Moderate TEXT arguments (or --file lines); one JSON verdict per line."""
    config = _load_config(**flags)
    try:
        pipeline = build_pipeline(config)
    except Exception as exc:
        raise click.ClickException(f"cannot build pipeline: {exc}") from exc
    if file_path is not None:
        inputs = [line for line in file_path.read_text("utf-8").splitlines() if line.strip()]
    else:
        inputs = list(text)
    if not inputs:
        raise click.ClickException("nothing to moderate: pass TEXT or --file")
    for raw in inputs:
        verdict = pipeline.decide(raw)
        click.echo(
            json.dumps(
                {
                    "text": raw,
                    "action": verdict.action.value,
                    "hate_score": verdict.score,
                    "layer": verdict.layer.value,
                    "rule_hits": list(verdict.rule_hits),
                    "scorer_version": verdict.scorer_version,
                }
            )
        )


@main.command("eval")
@click.option("--dataset", "dataset_path", type=click.Path(path_type=Path, exists=True), required=True)
@_pipeline_options
def eval_cmd(dataset_path, **flags):
    """Evaluate the pipeline on a labeled CSV; prints the report."""
    config = _load_config(**flags)
    try:
        samples = dataset_mod.ingest_csv(dataset_path)
        pipeline = build_pipeline(config)
        report = metrics_mod.evaluate(pipeline, samples)
    except (dataset_mod.DatasetError, RuleError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(report.to_text(), nl=False)


@main.command()
@click.option("--dataset", "dataset_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--seed", type=int, required=True)
@click.option("--fractions", default=None, help="Comma-separated train,val,test fractions.")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def split(dataset_path, seed, fractions, out_dir):
    """Stratified train/val/test split with a manifest."""
    if fractions is None:
        parts = dataset_mod.DEFAULT_FRACTIONS
    else:
        try:
            parts = tuple(float(p) for p in fractions.split(","))
        except ValueError as exc:
            raise click.ClickException(f"bad --fractions: {exc}") from exc
        if len(parts) != 3:
            raise click.ClickException("--fractions needs exactly three comma-separated values")
    try:
        spec = dataset_mod.SplitSpec(*parts, seed=seed)
        samples = dataset_mod.ingest_csv(dataset_path)
        train, val, test = dataset_mod.stratified_split(samples, spec)
        manifest_path = dataset_mod.write_split(out_dir, train, val, test, spec)
    except (dataset_mod.DatasetError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {len(train)}/{len(val)}/{len(test)} samples; manifest at {manifest_path}")


@main.command()
@click.argument("csvs", nargs=-1, required=True, type=click.Path(path_type=Path, exists=True))
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def unify(csvs, out_path):
    """Merge corpora: normalize, drop overlength, deduplicate."""
    try:
        corpora = [dataset_mod.ingest_csv(p) for p in csvs]
        result = dataset_mod.unify(corpora)
    except dataset_mod.DatasetError as exc:
        raise click.ClickException(str(exc)) from exc
    dataset_mod.write_csv(out_path, result.samples)
    stats = dataset_mod.corpus_stats(
        result.samples,
        duplicate_count=result.duplicate_count,
        dropped_overlength=result.dropped_overlength,
    )
    payload = stats.to_dict()
    payload["label_conflicts"] = result.label_conflicts
    payload["dropped_empty"] = result.dropped_empty
    click.echo(json.dumps(payload, indent=2))


@main.group()
def rules():
    """Rule-file operations."""


@rules.command("check")
@click.argument("path", type=click.Path(path_type=Path))
def rules_check(path):
    """Compile a rules file; nonzero exit with diagnostics on failure."""
    try:
        ruleset = compile_rules_file(path)
    except (RuleError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"ok: {len(ruleset.rules)} rules, version {ruleset.version}")


@main.group()
def feedback():
    """Feedback-store operations."""


@feedback.command("export")
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None, help="Feedback DB (default from config/env).")
@click.option("--disagreements-only", is_flag=True, default=False)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None, help="Output CSV (default stdout).")
@click.option("--config", type=click.Path(path_type=Path, exists=True), default=None)
def feedback_export(store_path, disagreements_only, out_path, config):
    """Export reviewer labels as a training CSV."""
    service_config = _load_config(config=config, feedback_store_path=store_path)
    db_path = service_config.feedback_store_path
    if not Path(db_path).exists():
        raise click.ClickException(f"feedback store not found: {db_path}")
    with feedback_mod.FeedbackStore(db_path) as store:
        batch = feedback_mod.export_training_batch(
            store, agreement=False if disagreements_only else None
        )
    target = open(out_path, "w", newline="", encoding="utf-8") if out_path else sys.stdout
    try:
        writer = csv.writer(target)
        writer.writerow(dataset_mod.CSV_HEADER)
        for sample in batch:
            writer.writerow([sample.text, sample.label, sample.source])
    finally:
        if out_path:
            target.close()


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None)
@click.option("--feedback-db", "feedback_store_path", type=click.Path(path_type=Path), default=None)
@_pipeline_options
def serve(host, **flags):
    """Run the moderation HTTP service."""
    config = _load_config(**flags)
    if not Path(config.rules_path).is_file():
        click.echo(f"error: rules file not found: {config.rules_path}", err=True)
        sys.exit(2)
    if config.model_path is not None and not Path(config.model_path).is_dir():
        click.echo(f"error: model directory not found: {config.model_path}", err=True)
        sys.exit(2)
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(config), host=host, port=config.port)


if __name__ == "__main__":
    main()
