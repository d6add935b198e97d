"""Batch front door: feature extraction, grader training and prediction,
offline scoring, prediction ensembling, and serving the competition API.

Exit codes form a closed set:

    0  success
    2  unusable input (missing/empty/unparseable files or directories)
    3  model or schema problem (missing grade class, feature mismatch)
    4  epoch-id mismatch between input files

Every output file is written to a temporary sibling and renamed into
place, so an interrupted run never leaves a truncated file behind.
"""

from __future__ import annotations

import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import click
import numpy as np

from . import api as api_module
from .eeg_io import load_epoch_dir, load_label_rows
from .errors import (
    ConfigError,
    LabelError,
    MetricError,
    NeurogradeError,
    ParseError,
    PredictError,
    TrainError,
)
from .features import NEURAL_FEATURE_NAMES, extract_neural_vector
from .grader import (
    CascadeConfig,
    cascade_predict_many,
    cascade_train,
    load_cascade,
    save_cascade,
)
from .metrics import (
    REPORT_METRICS,
    confusion,
    evaluate,
    majority_grade,
    mcc,
    prf_accuracy,
    weighted_cm,
)

EXIT_INPUT = 2
EXIT_SCHEMA = 3
EXIT_MISMATCH = 4

MONTAGE_NAMES = ("bipolar4", "bipolar8", "gasf3")


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _format(value: float) -> str:
    return repr(float(value))


def _read_features(path):
    """Parse a features CSV into (feature names, {epoch_id: row array})."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        _fail(EXIT_INPUT, f"cannot read {path}: {exc}")
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "epoch_id" or len(header) < 2:
            _fail(EXIT_INPUT, f"{path.name}: expected header epoch_id,<features>")
        names = tuple(cell.strip() for cell in header[1:])
        if len(set(names)) != len(names):
            _fail(EXIT_INPUT, f"{path.name}: duplicate feature columns")
        rows: dict[str, np.ndarray] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names) + 1:
                _fail(EXIT_INPUT,
                      f"{path.name} line {lineno}: expected {len(names) + 1} "
                      f"fields, got {len(row)}")
            epoch_id = row[0].strip()
            if epoch_id in rows:
                _fail(EXIT_INPUT,
                      f"{path.name} line {lineno}: duplicate epoch_id {epoch_id!r}")
            try:
                rows[epoch_id] = np.array([float(cell) for cell in row[1:]])
            except ValueError:
                _fail(EXIT_INPUT,
                      f"{path.name} line {lineno}: non-numeric feature value")
        if not rows:
            _fail(EXIT_INPUT, f"{path.name} contains no feature rows")
    return names, rows


def _read_predictions(path):
    """Parse a submission-format CSV into {epoch_id: (grade, probability)}."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        _fail(EXIT_INPUT, f"cannot read {path}: {exc}")
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != [
            "epoch_id", "grade", "probability",
        ]:
            _fail(EXIT_INPUT,
                  f"{path.name}: expected header epoch_id,grade,probability")
        rows: dict[str, tuple[int, float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                _fail(EXIT_INPUT,
                      f"{path.name} line {lineno}: expected 3 fields")
            epoch_id, grade_text, prob_text = (cell.strip() for cell in row)
            if epoch_id in rows:
                _fail(EXIT_INPUT,
                      f"{path.name} line {lineno}: duplicate epoch_id {epoch_id!r}")
            try:
                grade = int(grade_text)
                probability = float(prob_text)
            except ValueError:
                _fail(EXIT_INPUT, f"{path.name} line {lineno}: bad grade or "
                                  f"probability")
            if grade not in (1, 2, 3, 4):
                _fail(EXIT_INPUT,
                      f"{path.name} line {lineno}: grade {grade} outside 1-4")
            rows[epoch_id] = (grade, probability)
        if not rows:
            _fail(EXIT_INPUT, f"{path.name} contains no prediction rows")
    return rows


def _write_predictions(path, rows: dict[str, tuple[int, float]]) -> None:
    lines = ["epoch_id,grade,probability"]
    for epoch_id in sorted(rows):
        grade, probability = rows[epoch_id]
        lines.append(f"{epoch_id},{grade},{_format(probability)}")
    _atomic_write(path, "\n".join(lines) + "\n")


@click.group()
def main():
    """Neonatal EEG background grading toolkit.

    Exit codes: 0 success, 2 unusable input, 3 model/schema problem,
    4 epoch-id mismatch between files.
    """


# --- extract-features ------------------------------------------------------------


def _extract_one(epoch, montage):
    try:
        vector = extract_neural_vector(epoch, montage=montage)
        return epoch.epoch_id, vector.values, None
    except NeurogradeError as exc:
        return epoch.epoch_id, None, str(exc)


@main.command("extract-features")
@click.argument("epochs_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--montage", type=click.Choice(MONTAGE_NAMES), default=None,
              help="Derive this montage first; omit when channels are "
                   "already derived.")
@click.option("--labels", "labels_path", type=click.Path(exists=True,
              dir_okay=False), default=None,
              help="Label CSV (epoch_id,subject_id,grade) for subject ids.")
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Features CSV to write.")
@click.option("--jobs", type=int, default=None,
              help="Parallel workers (default: all cores).")
def extract_features(epochs_dir, montage, labels_path, output, jobs):
    """Compute the full quantitative feature vector for every epoch.

    Writes one row per epoch, ordered by epoch id, with an epoch_id
    column followed by the canonical feature columns.
    """
    try:
        epochs = load_epoch_dir(epochs_dir, labels_path)
    except NeurogradeError as exc:
        _fail(EXIT_INPUT, str(exc))
    if not epochs:
        _fail(EXIT_INPUT, f"no epochs found in {epochs_dir}")
    epochs = sorted(epochs, key=lambda e: e.epoch_id)
    worker = partial(_extract_one, montage=montage)
    jobs = jobs or os.cpu_count() or 1
    jobs = max(1, min(jobs, len(epochs)))
    if jobs == 1:
        results = [worker(epoch) for epoch in epochs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, epochs))
    failures = [(eid, message) for eid, _, message in results if message]
    if failures:
        for eid, message in failures:
            click.echo(f"error: {eid}: {message}", err=True)
        _fail(EXIT_INPUT, f"{len(failures)} of {len(results)} epochs failed; "
                          "no output written")
    lines = ["epoch_id," + ",".join(NEURAL_FEATURE_NAMES)]
    for eid, values, _ in results:
        cells = ",".join(_format(values[name]) for name in NEURAL_FEATURE_NAMES)
        lines.append(f"{eid},{cells}")
    _atomic_write(output, "\n".join(lines) + "\n")
    click.echo(f"wrote {len(results)} epochs x {len(NEURAL_FEATURE_NAMES)} "
               f"features to {output}")


# --- train-svm ---------------------------------------------------------------


@main.command("train-svm")
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("labels_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Model JSON to write.")
@click.option("--svm-c", "svm_c", type=float, default=1.0, show_default=True,
              help="Soft-margin penalty.")
@click.option("--tol", type=float, default=1e-3, show_default=True,
              help="Optimality tolerance.")
@click.option("--max-passes", type=int, default=100, show_default=True,
              help="Training budget in passes over the data.")
def train_svm(features_csv, labels_csv, output, svm_c, tol, max_passes):
    """Train the three-stage grading cascade and save it as JSON."""
    names, feature_rows = _read_features(features_csv)
    try:
        labels = {row.epoch_id: row.grade for row in load_label_rows(labels_csv)}
    except LabelError as exc:
        _fail(EXIT_INPUT, str(exc))
    unlabeled = sorted(set(feature_rows) - set(labels))
    if unlabeled:
        _fail(EXIT_MISMATCH,
              f"epochs without labels: {', '.join(unlabeled[:10])}"
              + (" ..." if len(unlabeled) > 10 else ""))
    ids = sorted(feature_rows)
    matrix = np.vstack([feature_rows[eid] for eid in ids])
    grades = [labels[eid] for eid in ids]
    config = CascadeConfig(C=svm_c, tol=tol, max_passes=max_passes)
    try:
        model = cascade_train(matrix, grades, config=config, feature_names=names)
    except TrainError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    tmp = Path(output).with_name(f".{Path(output).name}.{os.getpid()}.tmp")
    save_cascade(model, tmp)
    os.replace(tmp, output)
    click.echo(f"trained on {len(ids)} epochs, saved model to {output}")


# --- grade --------------------------------------------------------------------


@main.command("grade")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Predictions CSV to write (submission format).")
def grade(model_json, features_csv, output):
    """Grade feature rows with a saved model; output is submission-ready."""
    try:
        model = load_cascade(model_json)
    except ParseError as exc:
        _fail(EXIT_INPUT, str(exc))
    names, feature_rows = _read_features(features_csv)
    missing = [n for n in model.feature_names if n not in names]
    if missing:
        _fail(EXIT_SCHEMA,
              f"model features missing from {Path(features_csv).name}: "
              + ", ".join(missing))
    column = {name: k for k, name in enumerate(names)}
    order = [column[name] for name in model.feature_names]
    ids = sorted(feature_rows)
    matrix = np.vstack([feature_rows[eid][order] for eid in ids])
    try:
        predictions = cascade_predict_many(model, matrix, epoch_ids=ids)
    except PredictError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    _write_predictions(
        output,
        {p.epoch_id: (p.grade, p.probability) for p in predictions},
    )
    click.echo(f"graded {len(ids)} epochs to {output}")


# --- score --------------------------------------------------------------------


@main.command("score")
@click.argument("preds_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("truth_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--bootstrap", type=int, default=1000, show_default=True,
              help="Bootstrap resamples for the 95% intervals; 0 skips "
                   "the intervals (needed below 10 epochs).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Bootstrap RNG seed.")
def score(preds_csv, truth_csv, bootstrap, seed):
    """Score predictions against expert labels.

    Prints one line per metric — wmcc, accuracy, f1, precision, recall —
    as `metric,value,ci95_low,ci95_high`.
    """
    predictions = _read_predictions(preds_csv)
    try:
        truth_rows = load_label_rows(truth_csv)
    except LabelError as exc:
        _fail(EXIT_INPUT, str(exc))
    truth = {row.epoch_id: row.grade for row in truth_rows}
    subject = {row.epoch_id: row.subject_id for row in truth_rows}
    only_pred = sorted(set(predictions) - set(truth))
    only_truth = sorted(set(truth) - set(predictions))
    if only_pred or only_truth:
        parts = []
        if only_pred:
            parts.append(f"ids only in predictions: {', '.join(only_pred)}")
        if only_truth:
            parts.append(f"ids only in truth: {', '.join(only_truth)}")
        _fail(EXIT_MISMATCH, "; ".join(parts))
    order = sorted(truth)
    y_true = [truth[eid] for eid in order]
    y_pred = [predictions[eid][0] for eid in order]
    click.echo("metric,value,ci95_low,ci95_high")
    if bootstrap > 0:
        try:
            report = evaluate(
                y_true, y_pred, B=bootstrap, seed=seed,
                subjects=[subject[eid] for eid in order],
            )
        except MetricError as exc:
            _fail(EXIT_INPUT, str(exc))
        for name in REPORT_METRICS:
            low, high = report.intervals[name]
            click.echo(f"{name},{_format(report.values[name])},"
                       f"{_format(low)},{_format(high)}")
    else:
        cm = confusion(y_true, y_pred)
        prf = prf_accuracy(cm)
        values = {"wmcc": mcc(weighted_cm(cm)), **prf}
        for name in REPORT_METRICS:
            click.echo(f"{name},{_format(values[name])},,")


# --- ensemble -----------------------------------------------------------------


@main.command("ensemble")
@click.argument("preds_csvs", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Majority-vote predictions CSV to write.")
def ensemble(preds_csvs, output):
    """Majority-vote across prediction files; ties go to the worse grade."""
    inputs = [(_read_predictions(path), Path(path).name) for path in preds_csvs]
    base, base_name = inputs[0]
    for rows, name in inputs[1:]:
        extra = sorted(set(rows) - set(base))
        gone = sorted(set(base) - set(rows))
        if extra or gone:
            parts = []
            if extra:
                parts.append(f"only in {name}: {', '.join(extra)}")
            if gone:
                parts.append(f"only in {base_name}: {', '.join(gone)}")
            _fail(EXIT_MISMATCH, "; ".join(parts))
    merged: dict[str, tuple[int, float]] = {}
    for eid in sorted(base):
        votes = [rows[eid][0] for rows, _ in inputs]
        winner = majority_grade(votes)
        merged[eid] = (winner, votes.count(winner) / len(votes))
    _write_predictions(output, merged)
    click.echo(f"ensembled {len(inputs)} inputs over {len(merged)} epochs "
               f"to {output}")


# --- serve --------------------------------------------------------------------


@main.command("serve")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Platform config JSON (journal, host_token, listen, ...).")
def serve(config_path):
    """Run the competition HTTP service until interrupted."""
    try:
        api_module.serve(config_path)
    except ConfigError as exc:
        _fail(EXIT_INPUT, str(exc))


if __name__ == "__main__":
    main()
