"""Linear dimensionality reduction to the plane: PCA and classical MDS.

The fitted :class:`ProjectionModel` carries the centering vector mu and an
orthonormal 2-column basis E; all spatial what-if interactions are linear
algebra over these two objects. Eigenvector sign ambiguity (v vs -v) is
removed by a deterministic rule so repeated fits are bitwise identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    InsufficientDataError,
    ValidationError,
)

PCA = "pca"
CMDS = "cmds"

DISTANCE_MEASURES = ("euclidean", "manhattan", "cosine", "correlation")


def _fix_signs(columns: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-|entry| element is positive.

    Ties break to the lowest index (np.argmax behavior).
    """
    out = columns.copy()
    for j in range(out.shape[1]):
        pivot = int(np.argmax(np.abs(out[:, j])))
        if out[pivot, j] < 0:
            out[:, j] = -out[:, j]
    return out


@dataclass(frozen=True)
class ProjectionModel:
    """Planar projection model.

    For PCA, ``project(x) = ((x - mu) / scale) @ E`` with ``scale`` all-ones
    unless the fit standardized features. CMDS fits have no feature-space
    basis (``mu``/``E`` are None) and cannot project new points.
    """

    method: str
    fitted_feature_names: tuple[str, ...]
    mu: np.ndarray | None
    E: np.ndarray | None
    eigenvalues: tuple[float, float]
    scale: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.mu, self.E, self.scale):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def d(self) -> int:
        return len(self.fitted_feature_names)

    @property
    def is_linear(self) -> bool:
        return self.E is not None

    def require_linear(self) -> None:
        if not self.is_linear:
            raise ValidationError(
                f"{self.method} embedding has no linear basis; "
                "out-of-sample operations need a PCA model"
            )

    def effective_basis(self) -> np.ndarray:
        """d x 2 matrix B with project(x) = (x - mu) @ B."""
        self.require_linear()
        if self.scale is None:
            return self.E
        return self.E / self.scale[:, None]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Out-of-sample planar position of a d-vector (or n x d batch)."""
        self.require_linear()
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValidationError(
                f"point has {x.shape[-1]} features, model expects {self.d}"
            )
        return (x - self.mu) @ self.effective_basis()

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "feature_names": list(self.fitted_feature_names),
            "mu": None if self.mu is None else self.mu.tolist(),
            "E": None if self.E is None else self.E.tolist(),
            "eigenvalues": list(self.eigenvalues),
            "scale": None if self.scale is None else self.scale.tolist(),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "ProjectionModel":
        return cls(
            method=payload["method"],
            fitted_feature_names=tuple(payload["feature_names"]),
            mu=None if payload["mu"] is None else np.array(payload["mu"], dtype=float),
            E=None if payload["E"] is None else np.array(payload["E"], dtype=float),
            eigenvalues=tuple(payload["eigenvalues"]),
            scale=(
                None
                if payload.get("scale") is None
                else np.array(payload["scale"], dtype=float)
            ),
        )


@dataclass(frozen=True)
class Embedding:
    """Planar coordinates of the fitted rows plus the model that made them."""

    coords: np.ndarray
    model: ProjectionModel
    negative_eigenvalues_clamped: bool = False

    def __post_init__(self):
        self.coords.setflags(write=False)


def fit_pca(
    X: np.ndarray,
    feature_names: tuple[str, ...] | None = None,
    standardize: bool = False,
) -> ProjectionModel:
    """Fit a 2-component PCA (covariance divisor n, deterministic signs).

    E holds the top-2 right singular vectors of the centered matrix; when
    rank < 2 the remaining column is SVD's orthonormal completion, sign-fixed.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError("PCA input must be a 2-D matrix")
    n, d = X.shape
    if n < 2:
        raise InsufficientDataError(f"PCA needs at least 2 rows, got {n}")
    if d < 2:
        raise InsufficientDataError(f"PCA needs at least 2 features, got {d}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("PCA input contains non-finite values")
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(d))

    mu = X.mean(axis=0)
    scale = None
    Z = X - mu
    if standardize:
        sd = Z.std(axis=0)
        scale = np.where(sd > 0, sd, 1.0)
        Z = Z / scale

    _, s, Vt = np.linalg.svd(Z, full_matrices=False)
    E = _fix_signs(Vt[:2].T)
    lams = (s[:2] ** 2) / n
    eigenvalues = (float(lams[0]), float(lams[1]) if len(lams) > 1 else 0.0)
    return ProjectionModel(
        method=PCA,
        fitted_feature_names=tuple(feature_names),
        mu=mu,
        E=E,
        eigenvalues=eigenvalues,
        scale=scale,
    )


def fit_pca_embedding(
    X: np.ndarray,
    feature_names: tuple[str, ...] | None = None,
    standardize: bool = False,
) -> Embedding:
    model = fit_pca(X, feature_names, standardize)
    return Embedding(coords=model.project(np.asarray(X, dtype=float)), model=model)


def fit_cmds(
    D: np.ndarray, feature_names: tuple[str, ...] = ()
) -> Embedding:
    """Classical MDS: double-center the squared distances and eigen-embed.

    coords are the top-2 eigenvectors of B = -1/2 J (D*D) J scaled by the
    square roots of their eigenvalues; negative eigenvalues clamp to zero
    and set a warning flag on the embedding.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError("distance matrix must be square")
    if not np.allclose(D, D.T, atol=1e-10):
        raise ValidationError("distance matrix must be symmetric")
    if np.any(np.diag(D) < 0) or not np.allclose(np.diag(D), 0, atol=1e-10):
        raise ValidationError("distance matrix must have a zero diagonal")
    if np.any(D < 0):
        raise ValidationError("distance matrix must be non-negative")

    n = D.shape[0]
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D * D) @ J
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1][:2]
    top = evals[order]
    clamped = bool(np.any(top < 0))
    top = np.maximum(top, 0.0)
    coords = _fix_signs(evecs[:, order] * np.sqrt(top))
    model = ProjectionModel(
        method=CMDS,
        fitted_feature_names=tuple(feature_names),
        mu=None,
        E=None,
        eigenvalues=(float(top[0]), float(top[1])),
    )
    return Embedding(coords=coords, model=model, negative_eigenvalues_clamped=clamped)


def pairwise_distances(X: np.ndarray, measure: str = "euclidean") -> np.ndarray:
    """Symmetric zero-diagonal distance matrix under the given measure."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError("distance input must be a 2-D matrix")
    if measure == "euclidean":
        sq = np.sum(X * X, axis=1)
        D2 = sq[:, None] + sq[None, :] - 2 * (X @ X.T)
        D = np.sqrt(np.maximum(D2, 0.0))
    elif measure == "manhattan":
        D = np.abs(X[:, None, :] - X[None, :, :]).sum(axis=2)
    elif measure == "cosine":
        norms = np.linalg.norm(X, axis=1)
        bad = np.flatnonzero(norms == 0)
        if bad.size:
            raise DegenerateInputError(
                f"zero-norm row {int(bad[0])} under cosine distance"
            )
        U = X / norms[:, None]
        D = 1.0 - U @ U.T
    elif measure == "correlation":
        Xc = X - X.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(Xc, axis=1)
        bad = np.flatnonzero(norms == 0)
        if bad.size:
            raise DegenerateInputError(
                f"zero-variance row {int(bad[0])} under correlation distance"
            )
        U = Xc / norms[:, None]
        D = 1.0 - U @ U.T
    else:
        raise ValidationError(f"unknown distance measure: {measure!r}")

    D = (D + D.T) / 2.0
    np.fill_diagonal(D, 0.0)
    return D
