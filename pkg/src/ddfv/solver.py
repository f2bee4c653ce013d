"""Newton iteration for the per-step nonlinear system and the inner solve.

The systems are small 2D problems, so the inner solver is a direct sparse
LU factorization after row equilibration (the boundary closure rows scale
differently from the mass rows).  Newton is undamped by default and
backtracks only to keep every iterate strictly positive.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    LinearSolveFailure,
    NoConvergence,
    PositivityBacktrackExhausted,
    SingularMatrix,
    ValidationError,
)


@dataclass
class NewtonConfig:
    tol_residual_l1: float = 1e-10
    max_iter: int = 50
    positivity_floor: float = 1e-12
    damping: float = 1.0
    max_backtracks: int = 40

    def __post_init__(self):
        if self.tol_residual_l1 <= 0.0:
            raise ValidationError("Newton tolerance must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValidationError("damping factor must lie in (0, 1]")


@dataclass
class NewtonStats:
    iterations: int
    residual_l1: float
    backtracks: int
    floor_activated: bool
    residual_history: list = field(default_factory=list)


def linear_solve(matrix, rhs) -> np.ndarray:
    """Direct sparse solve with row equilibration; deterministic.

    Raises SingularMatrix for (numerically) singular systems and
    LinearSolveFailure when the solution residual is unacceptably large.
    """
    matrix = sp.csr_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    if matrix.shape[0] != matrix.shape[1] or matrix.shape[0] != rhs.shape[0]:
        raise ValidationError("linear system shape mismatch")

    row_max = np.abs(matrix).max(axis=1).toarray().ravel()
    if (row_max == 0.0).any():
        raise SingularMatrix("matrix has an identically zero row")
    scaling = sp.diags(1.0 / row_max)
    scaled = (scaling @ matrix).tocsc()
    try:
        lu = spla.splu(scaled)
        x = lu.solve(rhs / row_max)
    except RuntimeError as exc:
        raise SingularMatrix(str(exc)) from None

    if not np.isfinite(x).all():
        raise SingularMatrix("non-finite solution from factorization")
    resid = np.abs(matrix @ x - rhs).max()
    a_inf = np.abs(matrix).sum(axis=1).max()
    scale = a_inf * np.abs(x).max() + np.abs(rhs).max()
    if resid > 1e-10 * max(scale, 1e-300):
        raise LinearSolveFailure(
            f"linear residual {resid:.3e} exceeds bound for scale {scale:.3e}"
        )
    return x


def newton_solve(residual_fn, jacobian_fn, u_init, config: NewtonConfig):
    """Solve residual_fn(u) = 0 starting from max(u_init, floor).

    Every iterate is kept strictly positive by halving the update; the
    returned stats record whether the initialization floor changed any
    component of u_init.
    """
    u_init = np.asarray(u_init, dtype=float)
    floor_activated = bool((u_init < config.positivity_floor).any())
    u = np.maximum(u_init, config.positivity_floor)

    backtracks_total = 0
    history = []
    for iteration in range(config.max_iter + 1):
        res = residual_fn(u)
        l1 = float(np.abs(res).sum())
        history.append(l1)
        if l1 < config.tol_residual_l1:
            return u, NewtonStats(
                iterations=iteration,
                residual_l1=l1,
                backtracks=backtracks_total,
                floor_activated=floor_activated,
                residual_history=history,
            )
        if iteration == config.max_iter:
            break
        step = linear_solve(jacobian_fn(u), -res)
        alpha = config.damping
        bt = 0
        while (u + alpha * step).min() <= 0.0:
            bt += 1
            if bt > config.max_backtracks:
                raise PositivityBacktrackExhausted(
                    f"could not keep iterate positive after "
                    f"{config.max_backtracks} halvings"
                )
            alpha *= 0.5
        backtracks_total += bt
        u = u + alpha * step

    raise NoConvergence(
        f"Newton did not reach {config.tol_residual_l1:.1e} within "
        f"{config.max_iter} iterations (last residual {history[-1]:.3e})"
    )
