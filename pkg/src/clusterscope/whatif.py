"""Spatial what-if interactions over a fitted linear projection.

Three primitives: forward projection (feature change -> planar displacement),
feature sweeps (the path a point traces while one feature runs through
+-k sigma), and backward projection (planar displacement -> feature change,
either the minimal-norm closed form or the constrained solver in boxqp).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxqp import ConstraintSet, QPSolution, solve_bp_qp
from .errors import ParameterError, ValidationError
from .projection import ProjectionModel


@dataclass(frozen=True)
class Proline:
    """Forward-projection path of one feature swept across +-k sigma.

    ``param_values`` has 2*round(k/c)+1 entries with the point's current
    value in the middle; ``path[j]`` is the projection of the point with
    feature ``feature_index`` replaced by ``param_values[j]``.
    """

    feature_index: int
    feature_name: str
    param_values: np.ndarray
    path: np.ndarray  # (2m+1) x 2
    k_extent: float
    c_step: float
    sigma: float
    degenerate: bool

    def __post_init__(self):
        self.param_values.setflags(write=False)
        self.path.setflags(write=False)

    @property
    def length(self) -> float:
        """Total arc length of the path (chord length for linear models)."""
        return float(np.sum(np.linalg.norm(np.diff(self.path, axis=0), axis=1)))

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature_name,
            "params": self.param_values.tolist(),
            "path": self.path.tolist(),
            "length": self.length,
            "degenerate": self.degenerate,
        }


def forward_project(model: ProjectionModel, delta_x: np.ndarray) -> np.ndarray:
    """Planar displacement of a feature-space change: delta_y = delta_x E."""
    model.require_linear()
    delta_x = np.asarray(delta_x, dtype=float)
    if delta_x.shape[-1] != model.d:
        raise ValidationError(
            f"delta has {delta_x.shape[-1]} features, model expects {model.d}"
        )
    return delta_x @ model.effective_basis()


def backward_project_unconstrained(
    model: ProjectionModel, delta_y: np.ndarray
) -> np.ndarray:
    """Minimal-norm feature change realizing delta_y: delta_x = delta_y E^T."""
    model.require_linear()
    delta_y = np.asarray(delta_y, dtype=float)
    if delta_y.shape[-1] != 2:
        raise ValidationError("delta_y must be a 2-vector")
    delta_x = delta_y @ model.E.T
    if model.scale is not None:
        delta_x = delta_x * model.scale
    return delta_x


def backward_project_constrained(
    model: ProjectionModel,
    delta_y: np.ndarray,
    cons: ConstraintSet,
    lambda_reg: float = 1e-6,
) -> QPSolution:
    """Constrained backward projection via the box/equality QP solver."""
    model.require_linear()
    return solve_bp_qp(model.effective_basis(), delta_y, cons, lambda_reg=lambda_reg)


def _sample_offsets(k: float, c: float) -> np.ndarray:
    """Symmetric grid {-k, ..., 0, ..., +k} with 2*round(k/c)+1 entries."""
    if k <= 0:
        raise ParameterError(f"k must be positive, got {k}")
    if not 0 < c <= k:
        raise ParameterError(f"step constant c must satisfy 0 < c <= k, got {c}")
    m = max(1, round(k / c))
    return np.arange(-m, m + 1) * (k / m)


def proline(
    model: ProjectionModel,
    point: np.ndarray,
    feature_index: int,
    sigma: float,
    feature_name: str | None = None,
    k: float = 2.0,
    c: float = 0.25,
) -> Proline:
    """Sweep one feature of ``point`` across [x_i - k*sigma, x_i + k*sigma].

    ``sigma`` is the feature's population standard deviation over the current
    view. A zero sigma flags the proline degenerate (the path collapses to
    the point's projection, repeated across the grid).
    """
    model.require_linear()
    point = np.asarray(point, dtype=float)
    if point.shape != (model.d,):
        raise ValidationError(f"point must have {model.d} features")
    if not 0 <= feature_index < model.d:
        raise ValidationError(f"feature index {feature_index} out of range")
    offsets = _sample_offsets(k, c)
    params = point[feature_index] + offsets * sigma
    grid = np.tile(point, (len(params), 1))
    grid[:, feature_index] = params
    return Proline(
        feature_index=feature_index,
        feature_name=feature_name or model.fitted_feature_names[feature_index],
        param_values=params,
        path=model.project(grid),
        k_extent=k,
        c_step=c,
        sigma=float(sigma),
        degenerate=sigma == 0.0,
    )


def proline_all(
    model: ProjectionModel,
    point: np.ndarray,
    sigmas: np.ndarray,
    k: float = 2.0,
    c: float = 0.25,
    feature_indices: list[int] | None = None,
) -> list[Proline]:
    """Prolines for every requested feature, ranked by path length descending.

    Path length is the sensitivity cue: the feature whose sweep moves the
    projection farthest comes first. Ties keep feature order.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.shape != (model.d,):
        raise ValidationError(f"need one sigma per model feature ({model.d})")
    indices = list(range(model.d)) if feature_indices is None else list(feature_indices)
    lines = [proline(model, point, i, float(sigmas[i]), k=k, c=c) for i in indices]
    return sorted(lines, key=lambda pl: -pl.length)
