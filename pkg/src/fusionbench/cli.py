"""Command-line interface.

Exit codes: 0 success, 1 validation error (bad input, bad usage),
2 runtime or training error. With ``--json-errors`` the failure is also
written to standard error as one JSON line.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from fusionbench import __version__
from fusionbench.core import ClassMap, LabelSpace, PrevalenceReport, build_cm, collapse, collapse_preds, dataset_summary
from fusionbench.errors import FusionbenchError, ParseError, ValidationError
from fusionbench.io._text import fmt, join_row, read_text, write_text
from fusionbench.io.cmfile import format_cm, read_cm, write_cm
from fusionbench.io.predictions import format_predictions, read_predictions, write_predictions
from fusionbench.io.report import read_report, write_curve_csv, write_report
from fusionbench.metrics import METRIC_LABELS, METRIC_ORDER, per_class_table, pooled_hexagon
from fusionbench.results import ScenarioResult


def _error_payload(exc: BaseException, code: int) -> str:
    doc = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
    if isinstance(exc, ParseError):
        doc.update(file=exc.path, line=exc.line, reason=exc.reason)
    return json.dumps(doc)


class _Cli(click.Group):
    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        argv = list(sys.argv[1:] if args is None else args)
        json_errors = "--json-errors" in argv
        code = 0
        try:
            rv = super().main(argv, prog_name or "fusionbench", complete_var, standalone_mode=False, **extra)
            if isinstance(rv, int):
                code = rv
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = 1
        except click.ClickException as e:
            e.show()
            code = 1
            if json_errors:
                click.echo(_error_payload(e, code), err=True)
        except FusionbenchError as e:
            code = 1 if isinstance(e, ValidationError) else 2
            click.echo(f"error: {e}", err=True)
            if json_errors:
                click.echo(_error_payload(e, code), err=True)
        except OSError as e:
            code = 2
            click.echo(f"error: {e}", err=True)
            if json_errors:
                click.echo(_error_payload(e, code), err=True)
        sys.exit(code)


@click.group(cls=_Cli)
@click.option("--json-errors", is_flag=True, help="Also report failures as one JSON line on stderr.")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
@click.version_option(__version__, prog_name="fusionbench")
def cli(json_errors, verbose):
    """Classifier evaluation, late fusion and cross-dataset experiments."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


def _load_outcome(cm_path, pred_path):
    if (cm_path is None) == (pred_path is None):
        raise click.UsageError("give exactly one of --cm or --predictions")
    if cm_path is not None:
        return read_cm(cm_path), Path(cm_path).name
    return read_predictions(pred_path), Path(pred_path).name


def _class_map(space: LabelSpace, positive, rest, groups_file) -> ClassMap:
    if groups_file is not None:
        try:
            groups = json.loads(read_text(groups_file))
        except json.JSONDecodeError as e:
            raise ParseError(groups_file, e.lineno, f"invalid JSON: {e.msg}") from None
        return ClassMap.from_groups(space, groups)
    if positive is not None:
        return ClassMap.one_vs_rest(space, positive, rest)
    return ClassMap.identity(space)


@cli.command()
@click.option("--cm", "cm_path", type=click.Path(dir_okay=False), help="Confusion-matrix file.")
@click.option("--predictions", "pred_path", type=click.Path(dir_okay=False), help="Prediction CSV.")
@click.option("--aggregate", type=click.Choice(["pooled", "macro"]), default="pooled", show_default=True)
@click.option("--per-class", is_flag=True, help="Also print one-vs-rest metrics per class.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Write a JSON report here.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write a CSV report here.")
def metrics(cm_path, pred_path, aggregate, per_class, report_path, csv_path):
    """Six-metric hexagon plus Rk for a confusion matrix or prediction file."""
    outcome, name = _load_outcome(cm_path, pred_path)
    cm = outcome if cm_path else build_cm(outcome)
    hexagon = pooled_hexagon(cm, aggregate)
    table = per_class_table(cm)
    click.echo("metric,value")
    for label, key in zip(METRIC_LABELS, METRIC_ORDER):
        click.echo(f"{label},{fmt(getattr(hexagon, key))}")
    click.echo(f"RK,{fmt(hexagon.rk)}")
    if hexagon.undefined:
        click.echo(f"# undefined: {','.join(sorted(hexagon.undefined))}")
    if per_class:
        click.echo("")
        click.echo(join_row(["class", *METRIC_LABELS]))
        for cls, h in table:
            click.echo(join_row([cls, *(fmt(v) for v in h.values())]))
    if report_path or csv_path:
        result = ScenarioResult(
            name="metrics", model="precomputed", train=(), test=name, map="identity",
            labels=cm.space.names, confusion=tuple(tuple(int(v) for v in r) for r in cm.counts),
            hexagon=hexagon, per_class=tuple(table), aggregation=aggregate,
        )
        write_report([result], report_path or Path(csv_path).with_suffix(".json"), csv_path)


@cli.command("collapse")
@click.option("--cm", "cm_path", type=click.Path(dir_okay=False))
@click.option("--predictions", "pred_path", type=click.Path(dir_okay=False))
@click.option("--positive", help="Keep this class; merge all others.")
@click.option("--rest", help="Name of the merged class (default non-<positive>).")
@click.option("--groups", "groups_file", type=click.Path(dir_okay=False), help="JSON {target: [source classes]}.")
@click.option("--out", type=click.Path(dir_okay=False), help="Output file (default stdout).")
def collapse_cmd(cm_path, pred_path, positive, rest, groups_file, out):
    """Map a confusion matrix or prediction file onto a coarser label space."""
    outcome, _ = _load_outcome(cm_path, pred_path)
    cmap = _class_map(outcome.space, positive, rest, groups_file)
    if cm_path:
        text = format_cm(collapse(outcome, cmap))
    else:
        if outcome.has_probs:
            text = format_predictions(collapse_preds(outcome, cmap))
        else:
            cm = collapse(build_cm(outcome), cmap)
            text = format_cm(cm)
    if out:
        write_text(out, text)
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option("--predictions", "pred_path", required=True, type=click.Path(dir_okay=False))
@click.option("--positive", required=True, help="Class whose probability is the score.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--format", "fig_format", type=click.Choice(["svg", "png", "pdf"]), default="svg", show_default=True)
def curves(pred_path, positive, out_dir, fig_format):
    """ROC and PRC curves (CSV + figure) for one positive class."""
    from fusionbench.curves import prc, roc, scored_items
    from fusionbench.plotting import plot_curves

    preds = read_predictions(pred_path)
    k = preds.space.index(positive)
    items = scored_items(preds, k)
    out = Path(out_dir)
    stem = Path(pred_path).stem
    click.echo("curve,auc,baseline,csv,figure")
    for c in (roc(items), prc(items)):
        csv_file = out / f"{stem}__{c.kind}.csv"
        fig_file = out / f"{stem}__{c.kind}.{fig_format}"
        write_curve_csv(c, csv_file)
        plot_curves([(stem, c)], fig_file, title=f"{c.kind.upper()} ({positive})")
        click.echo(join_row([c.kind, fmt(c.auc), fmt(c.baseline), csv_file, fig_file]))


@cli.command()
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--min", "min_axis", type=float, default=0.0, show_default=True, help="Value at the hexagon centre.")
@click.option("--scenario", "names", multiple=True, help="Only these scenario names (repeatable).")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def hexagon(report_path, min_axis, names, out):
    """Render the hexagons of a report as an SVG overlay."""
    from fusionbench.io.hexagon import render_hexagon

    results, _ = read_report(report_path)
    if names:
        results = [r for r in results if r.name in names]
    if not results:
        raise ValidationError("no scenarios selected for the hexagon plot")
    render_hexagon([(r.key, r.hexagon) for r in results], min_axis, out)
    click.echo(out)


@cli.group()
def fuse():
    """Late fusion of member prediction files."""


def _members(paths):
    from fusionbench.fusion import fusion_inputs

    if len(paths) < 2:
        raise click.UsageError("give at least two --member files")
    sets = [read_predictions(p) for p in paths]
    return sets[0].space, fusion_inputs(sets)


def _fused_output(space, ids, probs, labels, out):
    from fusionbench.core import PredictionRecord, PredictionSet

    preds = PredictionSet(space, tuple(PredictionRecord(i, int(t), tuple(p)) for i, t, p in zip(ids, labels, probs)))
    write_predictions(preds, out)
    cm = build_cm(preds)
    click.echo(f"items,{len(preds)}")
    click.echo(f"correct,{cm.trace}")


@fuse.command("average")
@click.option("--member", "members", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def fuse_average(members, out):
    """Average the members' probability vectors."""
    from fusionbench.fusion import average_fuse

    space, (ids, inputs, labels) = _members(members)
    _fused_output(space, ids, [average_fuse(x) for x in inputs], labels, out)


@fuse.command("train")
@click.option("--member", "members", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Head JSON file.")
@click.option("--hidden", multiple=True, type=int, help="Hidden layer widths (default: input width).")
@click.option("--epochs", type=int, default=200, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--momentum", type=float, default=0.9, show_default=True)
@click.option("--batch-size", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--weighted", is_flag=True, help="Inverse-frequency class-weighted cross-entropy.")
def fuse_train(members, out, hidden, epochs, lr, momentum, batch_size, seed, weighted):
    """Train an MLP head on concatenated member probabilities."""
    from fusionbench.fusion import FusionHead, LossConfig, TrainConfig, class_weights, head_train

    space, (ids, inputs, labels) = _members(members)
    width = inputs[0].width
    dims = (width, *(hidden or (width,)), space.size)
    head = FusionHead.init(dims, TrainConfig(lr, momentum, epochs, batch_size, seed))
    cfg = LossConfig("weighted", class_weights(np.bincount(labels, minlength=space.size))) if weighted else LossConfig()
    trained, trace = head_train(head, list(zip(inputs, labels)), cfg)
    write_text(out, trained.to_json())
    click.echo("epoch,mean_loss")
    for i, v in enumerate(trace, start=1):
        click.echo(f"{i},{fmt(v)}")


@fuse.command("apply")
@click.option("--head", "head_path", required=True, type=click.Path(dir_okay=False))
@click.option("--member", "members", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def fuse_apply(head_path, members, out):
    """Apply a trained head to member prediction files."""
    from fusionbench.fusion import FusionHead, head_predict_proba

    head = FusionHead.from_json(read_text(head_path))
    space, (ids, inputs, labels) = _members(members)
    if head.n_classes != space.size:
        raise ValidationError(f"head emits {head.n_classes} classes but members use {space.size}")
    _fused_output(space, ids, [head_predict_proba(head, x) for x in inputs], labels, out)


@fuse.command("select")
@click.option("--member", "members", multiple=True, required=True, type=click.Path(dir_okay=False))
def fuse_select(members):
    """List which members differ enough (CM diagonal or correct items) to merge."""
    from fusionbench.fusion import select_diverse

    sets = [read_predictions(p) for p in members]
    kept = select_diverse([(build_cm(s), s) for s in sets])
    click.echo("member,selected")
    for i, p in enumerate(members):
        click.echo(f"{p},{'yes' if i in kept else 'no'}")


@cli.group("boost")
def boost_group():
    """LogitBoost with single-attribute linear regressors."""


@boost_group.command("train")
@click.option("--arff", "arff_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Model JSON file.")
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--patience", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--class-attribute", help="Nominal class attribute (default: last nominal).")
def boost_train(arff_path, out, max_iter, folds, patience, seed, class_attribute):
    """Fit on an ARFF file, choosing the iteration count by cross-validation."""
    from fusionbench.boost import fit
    from fusionbench.io.arff import read_arff

    ds = read_arff(arff_path, class_attribute)
    model = fit(ds, max_iter=max_iter, folds=folds, seed=seed, patience=patience)
    write_text(out, model.to_json())
    click.echo(f"iterations,{model.n_iterations}")


@boost_group.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False))
@click.option("--arff", "arff_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--class-attribute")
def boost_predict(model_path, arff_path, out, class_attribute):
    """Write class posteriors for every ARFF row as a prediction CSV."""
    from fusionbench.boost import AdditiveModel, predict_set
    from fusionbench.io.arff import read_arff

    model = AdditiveModel.from_json(read_text(model_path))
    preds = predict_set(model, read_arff(arff_path, class_attribute))
    write_predictions(preds, out)
    click.echo(f"items,{len(preds)}")
    click.echo(f"correct,{build_cm(preds).trace}")


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="fusionbench-out", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Scenarios run in parallel.")
def matrix(manifest_path, seed, out_dir, jobs):
    """Run every scenario of a manifest; writes report.json, report.csv and figures."""
    from fusionbench.harness import run_matrix
    from fusionbench.io.manifest import load_manifest
    from fusionbench.io.report import report_csv

    manifest = load_manifest(manifest_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_matrix(manifest, seed, out, jobs)
    write_report(results, out / "report.json", out / "report.csv", seed=seed)
    click.echo(report_csv(results), nl=False)


def _parse_counts(spec: str) -> tuple[str, PrevalenceReport]:
    try:
        name, _, nums = spec.partition("=")
        pos, neg = (int(v) for v in nums.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected NAME=POSITIVES:NEGATIVES, got {spec!r}") from None
    if pos < 0 or neg < 0 or pos + neg == 0:
        raise click.BadParameter(f"counts must be non-negative and not both zero: {spec!r}")
    return name, PrevalenceReport("positive", pos, neg)


@cli.command()
@click.option("--predictions", "pred_paths", multiple=True, type=click.Path(dir_okay=False))
@click.option("--positive", help="Positive class for prediction files.")
@click.option("--counts", "count_specs", multiple=True, help="NAME=POSITIVES:NEGATIVES (repeatable).")
@click.option("--figure", type=click.Path(dir_okay=False), help="Write a ratio bar chart here.")
def summary(pred_paths, positive, count_specs, figure):
    """Positive/negative counts and prevalence (the PRC baseline) per dataset."""
    rows = []
    for p in pred_paths:
        if positive is None:
            raise click.UsageError("--positive is required with --predictions")
        preds = read_predictions(p)
        cmap = ClassMap.one_vs_rest(preds.space, positive)
        rows.append((Path(p).stem, dataset_summary(preds, 0, cmap)))
    for spec in count_specs:
        name, rep = _parse_counts(spec)
        rows.append((name, PrevalenceReport(positive or "positive", rep.positives, rep.negatives)))
    if not rows:
        raise click.UsageError("give --predictions and/or --counts")
    click.echo("dataset,positive_class,positives,negatives,total,prevalence")
    for name, r in rows:
        click.echo(join_row([name, r.positive_class, r.positives, r.negatives, r.total, fmt(r.prevalence)]))
    if figure:
        from fusionbench.plotting import plot_dataset_ratios

        plot_dataset_ratios(rows, figure)


def main():
    cli.main()


if __name__ == "__main__":
    main()
