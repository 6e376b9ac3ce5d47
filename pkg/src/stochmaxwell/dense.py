"""Dense reference implementations for small sizes.

Everything here is assembled entry by entry and solved with ``numpy.linalg``;
it shares no code with the spectral fast path and is meant for tests only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import FieldState, Grid, Medium

MAX_N = 64


class SingularOperatorError(np.linalg.LinAlgError):
    pass


@dataclass
class DenseOperators:
    n: int
    A: np.ndarray
    B: np.ndarray
    calA: np.ndarray
    calB: np.ndarray
    calA_inv_calB: np.ndarray | None
    singular: bool
    message: str = ""


def _check_size(n: int) -> None:
    if n < 3:
        raise ValueError(f"size must be >= 3, got {n}")
    if n > MAX_N:
        raise ValueError(f"dense oracle is capped at n <= {MAX_N}, got {n}")


def dense_A(n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for i in range(n):
        A[i, i] = 1.0
        A[i, (i + 1) % n] = 0.5
        A[i, (i - 1) % n] = 0.5
    return A


def dense_B(n: int) -> np.ndarray:
    B = np.zeros((n, n))
    for i in range(n):
        B[i, (i + 1) % n] = 1.0
        B[i, (i - 1) % n] = -1.0
    return B


def build_dense_operators(n: int) -> DenseOperators:
    _check_size(n)
    A, B = dense_A(n), dense_B(n)
    Z = np.zeros((n, n))
    calA = np.block([[A, Z], [Z, A]])
    calB = np.block([[Z, B], [B, Z]])
    min_eig = float(np.linalg.eigvalsh(calA).min())
    if abs(min_eig) < 1e-10 * n:
        return DenseOperators(
            n, A, B, calA, calB, None, True,
            f"A is singular for even size n={n} (smallest eigenvalue {min_eig:.3e})",
        )
    return DenseOperators(n, A, B, calA, calB, np.linalg.solve(calA, calB), False)


@dataclass
class PropertyReport:
    n: int
    calA_symmetric: bool
    calA_positive_definite: bool
    calB_skew: bool
    calA_inv_calB_skew: bool | None
    min_eigenvalue: float
    eigenvalue_mismatch: float
    skew_defect: float | None
    witnesses: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return bool(self.calA_symmetric and self.calA_positive_definite and self.calB_skew and self.calA_inv_calB_skew)


def matrix_property_report(n: int, tol: float = 1e-12) -> PropertyReport:
    ops = build_dense_operators(n)
    eig = np.sort(np.linalg.eigvalsh(ops.A))
    expected = np.sort(1 + np.cos(2 * np.pi * np.arange(n) / n))
    mismatch = float(np.abs(eig - expected).max())
    min_eig = float(np.linalg.eigvalsh(ops.calA).min())
    pd = (not ops.singular) and min_eig > 0
    skew_defect = None
    skew_ok = None
    if ops.calA_inv_calB is not None:
        M = ops.calA_inv_calB
        skew_defect = float(np.abs(M.T + M).max())
        skew_ok = skew_defect <= tol
    return PropertyReport(
        n=n,
        calA_symmetric=bool(np.array_equal(ops.calA, ops.calA.T)),
        calA_positive_definite=bool(pd),
        calB_skew=bool(np.array_equal(ops.calB, -ops.calB.T)),
        calA_inv_calB_skew=skew_ok,
        min_eigenvalue=min_eig,
        eigenvalue_mismatch=mismatch,
        skew_defect=skew_defect,
        witnesses={"singular": ops.singular, "message": ops.message},
    )


def dense_solve_pair_line(e, h, params) -> tuple[np.ndarray, np.ndarray]:
    """Assemble ``[[eps A, -s c B], [-s c B, mu A]]`` and solve with LU."""
    e = np.asarray(e, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = e.size
    _check_size(n)
    A, B = dense_A(n), dense_B(n)
    s, c, eps, mu = params.sign, params.c, params.eps, params.mu
    lhs = np.block([[eps * A, -s * c * B], [-s * c * B, mu * A]])
    rhs = np.concatenate([eps * A @ e + s * c * B @ h, mu * A @ h + s * c * B @ e])
    if abs(np.linalg.det(lhs)) < 1e-300 or np.linalg.cond(lhs) > 1e14:
        raise SingularOperatorError(f"assembled pair system is singular for n={n}")
    sol = np.linalg.solve(lhs, rhs)
    return sol[:n], sol[n:]


def dense_stage(state: FieldState, descriptor, grid: Grid, medium: Medium, tau: float | None = None) -> FieldState:
    """Reference deterministic stage: loop over every line, solve each densely."""
    from .circulant import LineSystemParams

    tau = grid.tau if tau is None else tau
    if max(grid.counts) > 7:
        raise ValueError("dense stage oracle is limited to grids of at most 7 points per axis")
    out = state.copy()
    I, J, K = grid.counts
    for sw in descriptor.sweeps:
        params = LineSystemParams(sw.sign, tau / (2 * grid.steps[sw.axis]), medium.eps, medium.mu)
        e_src, h_src = state.data[sw.e_comp], state.data[sw.h_comp]
        if sw.axis == 0:
            for j in range(J):
                for k in range(K):
                    x, y = dense_solve_pair_line(e_src[:, j, k], h_src[:, j, k], params)
                    out.data[sw.e_comp][:, j, k], out.data[sw.h_comp][:, j, k] = x, y
        elif sw.axis == 1:
            for i in range(I):
                for k in range(K):
                    x, y = dense_solve_pair_line(e_src[i, :, k], h_src[i, :, k], params)
                    out.data[sw.e_comp][i, :, k], out.data[sw.h_comp][i, :, k] = x, y
        else:
            for i in range(I):
                for j in range(J):
                    x, y = dense_solve_pair_line(e_src[i, j, :], h_src[i, j, :], params)
                    out.data[sw.e_comp][i, j, :], out.data[sw.h_comp][i, j, :] = x, y
    return out
