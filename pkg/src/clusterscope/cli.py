"""Batch CLI over the engine: scripted fits, what-if runs, and the server.

Results go to stdout as JSON (or CSV for `filter`), logs to stderr.
Exit codes: 0 success, 2 validation error.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import stats as statsmod
from .boxqp import ConstraintSet
from .clusters import agglomerative, kmeans
from .errors import EngineError, ParameterError
from .filterlang import parse as parse_filter
from .projection import ProjectionModel, fit_cmds, fit_pca_embedding, pairwise_distances
from .table import apply_filter, export_csv, load_csv
from .whatif import backward_project_constrained, forward_project, proline_all


def _log(message: str) -> None:
    color = sys.stderr.isatty() and not os.environ.get("NO_COLOR")
    click.secho(message, err=True, fg="cyan" if color else None)


def _emit(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False))


def _write_or_emit(payload, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        _log(f"wrote {out}")
    else:
        click.echo(text)


def engine_errors(fn):
    """Map engine validation errors to exit code 2 with a JSON payload."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EngineError as exc:
            click.echo(json.dumps(exc.payload()), err=True)
            sys.exit(2)

    return wrapper


def _load_table(path: str, delimiter: str = ","):
    with open(path, "rb") as fh:
        return load_csv(fh, delimiter=delimiter)


def _parse_point(table, model: ProjectionModel, point_id: str | None, point_json: str | None):
    names = model.fitted_feature_names
    if point_id is not None:
        if point_id not in table.row_ids:
            raise ParameterError(f"row id {point_id!r} not found")
        i = table.row_ids.index(point_id)
        return np.array([table.values[i, table.column_index(n)] for n in names])
    if point_json is None:
        raise ParameterError("provide --point-id or --point")
    mapping = json.loads(point_json)
    missing = [n for n in names if n not in mapping]
    if missing:
        raise ParameterError(f"point is missing features: {', '.join(missing)}")
    return np.array([float(mapping[n]) for n in names])


@click.group()
def main():
    """Clustering, projection, and what-if analysis over CSV tables."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--data-dir", default=None, type=click.Path(exists=True, file_okay=False))
def serve(host: str, port: int, data_dir: str | None):
    """Start the HTTP session service."""
    from .server import run

    _log(f"serving on {host}:{port}")
    run(host=host, port=port, data_dir=data_dir)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--method", type=click.Choice(["kmeans", "agglo"]), default="kmeans")
@click.option("--k", required=True, type=int)
@click.option("--distance", default="euclidean", show_default=True)
@click.option("--linkage", default="average", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--delimiter", default=",", show_default=True)
@click.option("--out", default=None, type=click.Path())
@engine_errors
def cluster(input_path, method, k, distance, linkage, seed, delimiter, out):
    """Fit a clustering and emit its JSON model."""
    table = _load_table(input_path, delimiter)
    X = table.default_view().matrix()
    if method == "kmeans":
        model = kmeans(X, k, distance=distance, seed=seed)
    else:
        model = agglomerative(X, k, distance=distance, linkage=linkage)
    _write_or_emit(model.to_json_dict(), out)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--method", type=click.Choice(["pca", "cmds"]), default="pca")
@click.option("--distance", default="euclidean", show_default=True)
@click.option("--standardize", is_flag=True, default=False)
@click.option("--delimiter", default=",", show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--model-out", default=None, type=click.Path(), help="Save the fitted model JSON for later `interact` runs.")
@engine_errors
def project(input_path, method, distance, standardize, delimiter, out, model_out):
    """Fit a 2-D projection and emit planar coordinates."""
    table = _load_table(input_path, delimiter)
    view = table.default_view()
    names = tuple(view.feature_subset)
    X = view.matrix()
    if method == "pca":
        if distance != "euclidean":
            raise ParameterError("PCA is euclidean-only; use --method cmds")
        embedding = fit_pca_embedding(X, names, standardize=standardize)
    else:
        embedding = fit_cmds(pairwise_distances(X, distance), names)
    payload = {
        "method": method,
        "row_ids": view.selected_row_ids(),
        "coords": embedding.coords.tolist(),
        "eigenvalues": list(embedding.model.eigenvalues),
        "negative_eigenvalues_clamped": embedding.negative_eigenvalues_clamped,
    }
    _write_or_emit(payload, out)
    if model_out:
        Path(model_out).write_text(
            json.dumps(embedding.model.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
        _log(f"wrote {model_out}")


@main.group()
def interact():
    """Forward/backward projection and feature sweeps over a saved model."""


def _model_option(fn):
    fn = click.option("--model", "model_path", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--input", "input_path", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--delimiter", default=",", show_default=True)(fn)
    return fn


def _load_model(model_path: str) -> ProjectionModel:
    payload = json.loads(Path(model_path).read_text(encoding="utf-8"))
    return ProjectionModel.from_json_dict(payload)


@interact.command()
@_model_option
@click.option("--delta", required=True, help='Feature change as JSON, e.g. \'{"age": 2}\'.')
@click.option("--point-id", default=None)
@click.option("--point", "point_json", default=None)
@engine_errors
def forward(model_path, input_path, delimiter, delta, point_id, point_json):
    """Project a hypothesized feature change to a planar displacement."""
    table = _load_table(input_path, delimiter)
    model = _load_model(model_path)
    point = _parse_point(table, model, point_id, point_json)
    mapping = json.loads(delta)
    names = model.fitted_feature_names
    unknown = [n for n in mapping if n not in names]
    if unknown:
        raise ParameterError(f"delta references unknown features: {', '.join(unknown)}")
    delta_x = np.array([float(mapping.get(n, 0.0)) for n in names])
    y = model.project(point)
    delta_y = forward_project(model, delta_x)
    _emit(
        {
            "y": y.tolist(),
            "delta_y": delta_y.tolist(),
            "new_y": (y + delta_y).tolist(),
        }
    )


@interact.command()
@_model_option
@click.option("--delta-y", "delta_y", required=True, help="Planar displacement 'dx,dy'.")
@click.option("--constraints", "constraints_path", default=None, type=click.Path(exists=True))
@click.option("--lambda-reg", default=1e-6, show_default=True, type=float)
@click.option("--point-id", default=None)
@click.option("--point", "point_json", default=None)
@engine_errors
def backward(model_path, input_path, delimiter, delta_y, constraints_path, lambda_reg, point_id, point_json):
    """Solve for the feature change realizing a planar displacement."""
    table = _load_table(input_path, delimiter)
    model = _load_model(model_path)
    point = _parse_point(table, model, point_id, point_json)
    names = list(model.fitted_feature_names)
    parts = [float(v) for v in delta_y.split(",")]
    if len(parts) != 2:
        raise ParameterError("--delta-y must be two comma-separated numbers")
    cons = ConstraintSet.empty(len(names))
    if constraints_path:
        payload = json.loads(Path(constraints_path).read_text(encoding="utf-8"))
        cons = ConstraintSet.from_json_dict(payload, names)
    solution = backward_project_constrained(
        model, np.array(parts), cons, lambda_reg=lambda_reg
    )
    _emit(
        {
            "status": solution.status,
            "objective": solution.objective if np.isfinite(solution.objective) else None,
            "kkt_residual": solution.kkt_residual if np.isfinite(solution.kkt_residual) else None,
            "delta_x": {n: float(solution.delta_x[i]) for i, n in enumerate(names)},
            "new_point": {
                n: float(point[i] + solution.delta_x[i]) for i, n in enumerate(names)
            },
        }
    )


@interact.command()
@_model_option
@click.option("--k", default=2.0, show_default=True, type=float)
@click.option("--c", default=0.25, show_default=True, type=float)
@click.option("--point-id", default=None)
@click.option("--point", "point_json", default=None)
@engine_errors
def prolines(model_path, input_path, delimiter, k, c, point_id, point_json):
    """Ranked forward-projection paths, one per feature."""
    table = _load_table(input_path, delimiter)
    model = _load_model(model_path)
    point = _parse_point(table, model, point_id, point_json)
    view = table.default_view().with_features(model.fitted_feature_names)
    sigmas = view.matrix().std(axis=0)
    lines = proline_all(model, point, sigmas, k=k, c=c)
    _emit({"prolines": [pl.to_json_dict() for pl in lines]})


@main.group()
def stats():
    """Statistical reports over a CSV table."""


@stats.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--feature", required=True)
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True),
              help="Clustering JSON (as written by `cluster --out`).")
@click.option("--clusters", "cluster_ids", required=True, help="Comma-separated cluster ids.")
@click.option("--delimiter", default=",", show_default=True)
@engine_errors
def anova(input_path, feature, labels_path, cluster_ids, delimiter):
    """One-way ANOVA of a feature between selected clusters."""
    table = _load_table(input_path, delimiter)
    payload = json.loads(Path(labels_path).read_text(encoding="utf-8"))
    labels = np.array(payload["labels"], dtype=int)
    if len(labels) != table.n_rows:
        raise ParameterError(
            f"labels file covers {len(labels)} rows, table has {table.n_rows}"
        )
    col = table.column_index(feature)
    ids = [int(v) for v in cluster_ids.split(",")]
    groups = [table.values[labels == cid, col] for cid in ids]
    _emit(statsmod.anova_oneway(groups).to_json_dict())


@stats.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--delimiter", default=",", show_default=True)
@engine_errors
def corr(input_path, delimiter):
    """All-pairs Pearson correlations, sorted by |r|."""
    table = _load_table(input_path, delimiter)
    entries = statsmod.corr_pairs(table.default_view())
    _emit({"correlations": [e.to_json_dict() for e in entries]})


@main.command(name="filter")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--expr", required=True)
@click.option("--delimiter", default=",", show_default=True)
@click.option("--out", default=None, type=click.Path())
@engine_errors
def filter_cmd(input_path, expr, delimiter, out):
    """Write the rows matching a filter expression as CSV."""
    table = _load_table(input_path, delimiter)
    mask = apply_filter(table, parse_filter(expr))
    view = table.default_view().with_row_mask(mask)
    payload = export_csv(view)
    if out:
        Path(out).write_bytes(payload)
        _log(f"wrote {out} ({int(mask.sum())} rows)")
    else:
        sys.stdout.buffer.write(payload)


if __name__ == "__main__":
    main()
