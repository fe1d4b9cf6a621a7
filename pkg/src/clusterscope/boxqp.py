"""Equality- and box-constrained least-squares solver for backward projection.

Solves, for a d x 2 basis B and target planar displacement delta_y,

    minimize    ||x B - delta_y||^2 + lambda_reg * ||x||^2
    subject to  C x = d_vec,  lb <= x <= ub

The Tikhonov term makes the problem strictly convex (the plain Hessian
B B^T has rank 2 in d dimensions), so the solution is unique; lambda_reg
must be positive. The solver is a primal active-set iteration over the
bound constraints; each step solves the equality-constrained subproblem
through a null-space parameterization of C restricted to the free
coordinates. Feasibility of {Cx=d, lb<=x<=ub} is established up front by
a phase-1 LP, so infeasible constraint sets are reported, not looped on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import ParameterError, ValidationError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"

_RANK_TOL = 1e-10
_KKT_TOL = 1e-6


@dataclass(frozen=True)
class ConstraintSet:
    """Equality system (C, d_vec) plus box bounds; +-inf bounds mean absent."""

    C: np.ndarray  # (m, d)
    d_vec: np.ndarray  # (m,)
    lb: np.ndarray  # (d,), entries may be -inf
    ub: np.ndarray  # (d,), entries may be +inf

    def __post_init__(self):
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))
        object.__setattr__(self, "d_vec", np.asarray(self.d_vec, dtype=float).ravel())
        object.__setattr__(self, "lb", np.asarray(self.lb, dtype=float).ravel())
        object.__setattr__(self, "ub", np.asarray(self.ub, dtype=float).ravel())
        m, d = self.C.shape
        if self.d_vec.shape != (m,):
            raise ValidationError("equality right-hand side has wrong length")
        if self.lb.shape != (d,) or self.ub.shape != (d,):
            raise ValidationError("bound vectors must have length d")
        if m > d:
            raise ValidationError(f"{m} equality constraints exceed dimension {d}")
        if np.any(self.lb > self.ub):
            raise ValidationError("lower bound exceeds upper bound")
        if np.any(self.lb == np.inf) or np.any(self.ub == -np.inf):
            raise ValidationError("bounds must leave a non-empty interval")
        if m > 0 and np.linalg.matrix_rank(self.C, tol=_RANK_TOL) < m:
            raise ValidationError("equality constraint rows are linearly dependent")

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def d(self) -> int:
        return self.C.shape[1]

    @property
    def has_finite_bounds(self) -> bool:
        return bool(np.any(np.isfinite(self.lb)) or np.any(np.isfinite(self.ub)))

    @classmethod
    def empty(cls, d: int) -> "ConstraintSet":
        return cls(
            C=np.zeros((0, d)),
            d_vec=np.zeros(0),
            lb=np.full(d, -np.inf),
            ub=np.full(d, np.inf),
        )

    @classmethod
    def from_json_dict(cls, payload: dict, feature_names: list[str]) -> "ConstraintSet":
        """Build from {equalities: [{coeffs, rhs}], bounds: [{feature, lb?, ub?}]}.

        Coefficients and bounds are keyed by feature name and resolved against
        the supplied feature order.
        """
        d = len(feature_names)
        index = {name: i for i, name in enumerate(feature_names)}
        rows, rhs = [], []
        for eq in payload.get("equalities") or []:
            row = np.zeros(d)
            for name, coeff in (eq.get("coeffs") or {}).items():
                if name not in index:
                    raise ValidationError(f"constraint names unknown feature {name!r}")
                row[index[name]] = float(coeff)
            rows.append(row)
            rhs.append(float(eq.get("rhs", 0.0)))
        lb = np.full(d, -np.inf)
        ub = np.full(d, np.inf)
        for bound in payload.get("bounds") or []:
            name = bound.get("feature")
            if name not in index:
                raise ValidationError(f"bound names unknown feature {name!r}")
            i = index[name]
            if bound.get("lb") is not None:
                lb[i] = float(bound["lb"])
            if bound.get("ub") is not None:
                ub[i] = float(bound["ub"])
        C = np.array(rows) if rows else np.zeros((0, d))
        return cls(C=C, d_vec=np.array(rhs), lb=lb, ub=ub)


@dataclass(frozen=True)
class QPSolution:
    delta_x: np.ndarray
    objective: float
    kkt_residual: float
    status: str
    n_iter: int = 0
    active_lower: tuple[int, ...] = ()
    active_upper: tuple[int, ...] = ()

    def __post_init__(self):
        self.delta_x.setflags(write=False)


def _gradient(B: np.ndarray, y: np.ndarray, lam: float, x: np.ndarray) -> np.ndarray:
    return 2.0 * (B @ (B.T @ x - y) + lam * x)


def _objective(B: np.ndarray, y: np.ndarray, lam: float, x: np.ndarray) -> float:
    r = B.T @ x - y
    return float(r @ r + lam * (x @ x))


def _project_onto_equalities(cons: ConstraintSet, x: np.ndarray) -> np.ndarray:
    if cons.m == 0:
        return x
    correction, *_ = np.linalg.lstsq(cons.C, cons.d_vec - cons.C @ x, rcond=None)
    return x + correction


def _feasible_start(cons: ConstraintSet) -> np.ndarray | None:
    """A point satisfying Cx=d and the box, or None if the set is empty."""
    if cons.m == 0:
        return np.clip(np.zeros(cons.d), cons.lb, cons.ub)
    if not cons.has_finite_bounds:
        # full row rank => consistent; minimal-norm solution is exact
        return np.linalg.lstsq(cons.C, cons.d_vec, rcond=None)[0]
    res = scipy.optimize.linprog(
        c=np.zeros(cons.d),
        A_eq=cons.C,
        b_eq=cons.d_vec,
        bounds=list(zip(cons.lb, cons.ub)),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10},
    )
    if not res.success:
        return None
    # polish the LP iterate by alternating exact projections
    x = np.asarray(res.x, dtype=float)
    for _ in range(5000):
        x = np.clip(_project_onto_equalities(cons, x), cons.lb, cons.ub)
        eq_err = np.max(np.abs(cons.C @ x - cons.d_vec), initial=0.0)
        if eq_err <= 1e-13:
            break
    return x


def _step_direction(
    B: np.ndarray,
    y: np.ndarray,
    lam: float,
    x: np.ndarray,
    cons: ConstraintSet,
    free: np.ndarray,
) -> np.ndarray:
    """Newton step over the free coordinates within null(C restricted to them)."""
    p = np.zeros(x.shape[0])
    if free.size == 0:
        return p
    g_free = _gradient(B, y, lam, x)[free]
    if cons.m > 0:
        N = scipy.linalg.null_space(cons.C[:, free])
        if N.shape[1] == 0:
            return p
    else:
        N = np.eye(free.size)
    B_free = B[free, :]
    H_free = 2.0 * (B_free @ B_free.T + lam * np.eye(free.size))
    z = np.linalg.solve(N.T @ H_free @ N, -(N.T @ g_free))
    p[free] = N @ z
    return p


def _bound_multipliers(
    g: np.ndarray,
    cons: ConstraintSet,
    free: np.ndarray,
    on_lower: set[int],
    on_upper: set[int],
) -> list[tuple[float, str, int]]:
    """(multiplier, side, index) for each working-set bound.

    nu is recovered from stationarity on the free coordinates, where no
    bound multiplier appears; the gradient residue on a fixed coordinate is
    then that coordinate's bound multiplier (sign-adjusted per side).
    """
    if cons.m > 0:
        if free.size > 0:
            nu, *_ = np.linalg.lstsq(cons.C[:, free].T, -g[free], rcond=None)
        else:
            nu, *_ = np.linalg.lstsq(cons.C.T, -g, rcond=None)
        resid = g + cons.C.T @ nu
    else:
        resid = g
    out = []
    for i in sorted(on_lower):
        out.append((float(resid[i]), "lower", i))
    for i in sorted(on_upper):
        out.append((float(-resid[i]), "upper", i))
    return out


def _polish(
    cons: ConstraintSet, x: np.ndarray, on_lower: set[int], on_upper: set[int]
) -> np.ndarray:
    """Snap working-set coordinates onto their bounds, restore equalities."""
    x = x.copy()
    for i in on_lower:
        x[i] = cons.lb[i]
    for i in on_upper:
        x[i] = cons.ub[i]
    if cons.m == 0:
        return x
    free = np.array(
        [i for i in range(cons.d) if i not in on_lower and i not in on_upper], dtype=int
    )
    if free.size == 0:
        return x
    adj, *_ = np.linalg.lstsq(cons.C[:, free], cons.d_vec - cons.C @ x, rcond=None)
    x[free] += adj
    return x


def solve_bp_qp(
    E: np.ndarray,
    delta_y: np.ndarray,
    cons: ConstraintSet | None = None,
    lambda_reg: float = 1e-6,
    max_iter: int | None = None,
) -> QPSolution:
    """Minimize ||xE - delta_y||^2 + lambda_reg ||x||^2 over the feasible set.

    ``status`` is "optimal" (KKT residual certified <= 1e-6), "infeasible",
    or "max_iter" (best iterate when the cap, default 100*d, ran out).
    """
    B = np.asarray(E, dtype=float)
    y = np.asarray(delta_y, dtype=float).ravel()
    if B.ndim != 2:
        raise ValidationError("projection basis must be a 2-D matrix")
    d = B.shape[0]
    if y.shape[0] != B.shape[1]:
        raise ValidationError(
            f"target displacement has length {y.shape[0]}, "
            f"basis has {B.shape[1]} columns"
        )
    if cons is None:
        cons = ConstraintSet.empty(d)
    if cons.d != d:
        raise ValidationError(f"constraints sized for d={cons.d}, basis has d={d}")
    if lambda_reg <= 0:
        raise ParameterError("lambda_reg must be positive (the plain problem is rank-2)")
    if max_iter is None:
        max_iter = 100 * d
    lam = float(lambda_reg)

    x = _feasible_start(cons)
    if x is None:
        return QPSolution(
            delta_x=np.zeros(d),
            objective=float("inf"),
            kkt_residual=float("inf"),
            status=INFEASIBLE,
        )

    bound_tol = 1e-12 * (1.0 + np.abs(x).max(initial=0.0))
    on_lower = set(np.flatnonzero(x - cons.lb <= bound_tol).tolist())
    on_upper = set(np.flatnonzero(cons.ub - x <= bound_tol).tolist())

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        free = np.array(
            [i for i in range(d) if i not in on_lower and i not in on_upper], dtype=int
        )
        p = _step_direction(B, y, lam, x, cons, free)

        if np.max(np.abs(p), initial=0.0) <= 1e-12:
            g = _gradient(B, y, lam, x)
            mus = _bound_multipliers(g, cons, free, on_lower, on_upper)
            drop_tol = -1e-9 * (1.0 + np.abs(g).max(initial=0.0))
            negative = [entry for entry in mus if entry[0] < drop_tol]
            if not negative:
                break
            _, side, idx = min(negative)
            (on_lower if side == "lower" else on_upper).discard(idx)
            continue

        alpha = 1.0
        blocking: tuple[str, int] | None = None
        for i in free:
            if p[i] > 1e-14 and np.isfinite(cons.ub[i]):
                limit = (cons.ub[i] - x[i]) / p[i]
                if limit < alpha:
                    alpha, blocking = limit, ("upper", int(i))
            elif p[i] < -1e-14 and np.isfinite(cons.lb[i]):
                limit = (cons.lb[i] - x[i]) / p[i]
                if limit < alpha:
                    alpha, blocking = limit, ("lower", int(i))
        x = x + max(alpha, 0.0) * p
        if blocking is not None:
            side, idx = blocking
            if side == "upper":
                x[idx] = cons.ub[idx]
                on_upper.add(idx)
            else:
                x[idx] = cons.lb[idx]
                on_lower.add(idx)

    x = _polish(cons, x, on_lower, on_upper)
    residual = check_kkt(B, y, cons, lam, x)
    # the KKT residual is the certificate; the multiplier test alone can be
    # fooled by degenerate working sets, in either direction
    status = OPTIMAL if residual <= _KKT_TOL else MAX_ITER
    return QPSolution(
        delta_x=x,
        objective=_objective(B, y, lam, x),
        kkt_residual=residual,
        status=status,
        n_iter=n_iter,
        active_lower=tuple(sorted(on_lower)),
        active_upper=tuple(sorted(on_upper)),
    )


def check_kkt(
    E: np.ndarray,
    delta_y: np.ndarray,
    cons: ConstraintSet | None,
    lambda_reg: float,
    delta_x: np.ndarray,
) -> float:
    """Max of stationarity, primal feasibility, and complementarity residuals.

    Independent of the solver path: multipliers are recovered by a bounded
    least-squares fit of the negative gradient onto the active constraint
    normals (equality multipliers free, bound multipliers >= 0).
    """
    B = np.asarray(E, dtype=float)
    y = np.asarray(delta_y, dtype=float).ravel()
    x = np.asarray(delta_x, dtype=float).ravel()
    d = B.shape[0]
    if cons is None:
        cons = ConstraintSet.empty(d)
    if x.shape[0] != d or cons.d != d:
        raise ValidationError("check_kkt: inconsistent shapes")

    eq_viol = float(np.max(np.abs(cons.C @ x - cons.d_vec), initial=0.0))
    box_viol = float(
        max(np.max(cons.lb - x, initial=0.0), np.max(x - cons.ub, initial=0.0), 0.0)
    )

    g = _gradient(B, y, lambda_reg, x)
    act_tol = 1e-7 * (1.0 + np.abs(x).max(initial=0.0))
    lower_active = [
        i for i in range(d) if np.isfinite(cons.lb[i]) and x[i] - cons.lb[i] <= act_tol
    ]
    upper_active = [
        i for i in range(d) if np.isfinite(cons.ub[i]) and cons.ub[i] - x[i] <= act_tol
    ]

    columns: list[np.ndarray] = []
    lower_bounds: list[float] = []
    for row in cons.C:
        columns.append(row)
        lower_bounds.append(-np.inf)
    for i in lower_active:
        e = np.zeros(d)
        e[i] = -1.0  # an active lower bound pushes the iterate upward
        columns.append(e)
        lower_bounds.append(0.0)
    for i in upper_active:
        e = np.zeros(d)
        e[i] = 1.0
        columns.append(e)
        lower_bounds.append(0.0)

    if columns:
        A = np.column_stack(columns)
        fit = scipy.optimize.lsq_linear(
            A, -g, bounds=(np.array(lower_bounds), np.full(len(columns), np.inf))
        )
        stationarity = float(np.max(np.abs(A @ fit.x + g)))
        mus = fit.x[cons.m :]
        slacks = [x[i] - cons.lb[i] for i in lower_active] + [
            cons.ub[i] - x[i] for i in upper_active
        ]
        comp = float(max((abs(mu * s) for mu, s in zip(mus, slacks)), default=0.0))
    else:
        stationarity = float(np.max(np.abs(g), initial=0.0))
        comp = 0.0

    return max(stationarity, eq_viol, box_viol, comp)
