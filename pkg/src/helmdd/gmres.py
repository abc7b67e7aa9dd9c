"""Full (non-restarted) preconditioned GMRES with modified Gram-Schmidt.

Right preconditioning (the default) runs Arnoldi on A M^{-1} and stops on
the true relative residual ||b - A x_j|| / ||b||; the Givens-rotation
residual estimate equals that quantity in exact arithmetic, and whenever
the estimate crosses the tolerance the solution is formed and the true
residual verified before convergence is declared.  Left preconditioning
runs Arnoldi on M^{-1} A and stops on the preconditioned relative residual
||M^{-1}(b - A x_j)|| / ||M^{-1} b||, matching the convention of common
solver environments.

A reorthogonalization pass is added whenever the residual projections
onto the basis after modified Gram-Schmidt exceed 1e-8 relative to the
remaining vector, which guards the orthogonality loss typical of
indefinite complex systems.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

REORTH_THRESHOLD = 1e-8
BREAKDOWN_THRESHOLD = 1e-14


@dataclass(frozen=True)
class GmresConfig:
    rtol: float = 1e-7
    max_iter: int = 100
    side: str = "right"

    def __post_init__(self):
        if self.rtol <= 0:
            raise ValueError(f"relative tolerance must be positive, got {self.rtol}")
        if self.max_iter < 1:
            raise ValueError(f"iteration cap must be at least 1, got {self.max_iter}")
        if self.side not in ("left", "right"):
            raise ValueError(f"preconditioning side must be 'left' or 'right', got {self.side!r}")


@dataclass
class SolveReport:
    """Outcome of one GMRES solve; iterations is the Table entry."""

    iterations: int
    converged: bool
    residual_history: np.ndarray
    final_residual: float
    breakdown: bool = False
    wall_seconds: float = field(default=0.0)
    x: np.ndarray | None = None


def _as_operator(op):
    if op is None:
        return lambda x: x
    if callable(op):
        return op
    return lambda x: op @ x


def gmres(A, M_inv, b: np.ndarray, cfg: GmresConfig = GmresConfig()) -> SolveReport:
    """Solve A x = b with preconditioner application M_inv (may be None).

    A and M_inv may be matrices or callables.  Returns the report; the
    solution vector is available as report.x.
    """
    t0 = time.perf_counter()
    apply_A = _as_operator(A)
    apply_M = _as_operator(M_inv)
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        raise ValueError("right-hand side must be nonzero")
    n = b.shape[0]
    left = cfg.side == "left"

    r0 = apply_M(b) if left else b
    r0norm = np.linalg.norm(r0)
    # first operator application decides the working scalar kind
    q0 = r0 / r0norm
    w = apply_M(apply_A(q0)) if left else apply_A(apply_M(q0))
    dtype = np.result_type(q0.dtype, w.dtype)

    mi = cfg.max_iter
    V = np.zeros((mi + 1, n), dtype=dtype)
    H = np.zeros((mi + 1, mi), dtype=dtype)
    givens_c = np.zeros(mi, dtype=dtype)
    givens_s = np.zeros(mi, dtype=dtype)
    g = np.zeros(mi + 1, dtype=dtype)
    V[0] = q0
    g[0] = r0norm
    history = [1.0]

    def form_solution(j):
        Hj, gj = H[: j + 1, : j + 1], g[: j + 1]
        try:
            y = np.linalg.solve(Hj, gj)
        except np.linalg.LinAlgError:  # stagnated basis on a singular operator
            y = np.linalg.lstsq(Hj, gj, rcond=None)[0]
        v = V[: j + 1].T @ y
        return apply_M(v) if not left else v

    report = None
    for j in range(mi):
        if j > 0:
            w = apply_M(apply_A(V[j])) if left else apply_A(apply_M(V[j]))
            w = w.astype(dtype, copy=False)
        # modified Gram-Schmidt
        for i in range(j + 1):
            hij = np.vdot(V[i], w)
            H[i, j] = hij
            w = w - hij * V[i]
        # one reorthogonalization pass if orthogonality degraded
        proj = V[: j + 1].conj() @ w
        wnorm = np.linalg.norm(w)
        if np.abs(proj).max() > REORTH_THRESHOLD * max(wnorm, np.finfo(float).tiny):
            H[: j + 1, j] += proj
            w = w - proj @ V[: j + 1]
        hnext = np.linalg.norm(w)
        H[j + 1, j] = hnext
        breakdown = hnext <= BREAKDOWN_THRESHOLD * max(np.abs(H[: j + 2, j]).max(), 1.0)
        if not breakdown:
            V[j + 1] = w / hnext

        # update the QR of H with Givens rotations
        for i in range(j):
            t = givens_c[i] * H[i, j] + givens_s[i] * H[i + 1, j]
            H[i + 1, j] = -np.conj(givens_s[i]) * H[i, j] + givens_c[i] * H[i + 1, j]
            H[i, j] = t
        a, hh = H[j, j], H[j + 1, j]
        rr = np.sqrt(np.abs(a) ** 2 + np.abs(hh) ** 2)
        if rr == 0.0:
            givens_c[j], givens_s[j] = 1.0, 0.0
        elif a == 0.0:
            givens_c[j], givens_s[j] = 0.0, np.conj(hh) / rr
        else:
            givens_c[j] = np.abs(a) / rr
            givens_s[j] = (a / np.abs(a)) * np.conj(hh) / rr
        H[j, j] = givens_c[j] * a + givens_s[j] * hh
        H[j + 1, j] = 0.0
        g[j + 1] = -np.conj(givens_s[j]) * g[j]
        g[j] = givens_c[j] * g[j]

        estimate = float(np.abs(g[j + 1]) / r0norm)
        history.append(estimate)

        if estimate <= cfg.rtol or breakdown:
            x = form_solution(j)
            true_rel = float(np.linalg.norm(b - apply_A(x)) / bnorm)
            converged = estimate <= cfg.rtol if left else true_rel <= cfg.rtol
            if converged or breakdown:
                report = SolveReport(
                    iterations=j + 1,
                    converged=converged,
                    residual_history=np.asarray(history),
                    final_residual=true_rel,
                    breakdown=breakdown and not converged,
                    x=x,
                )
                break
            # estimate crossed the tolerance but the true residual has not: keep going

    if report is None:
        x = form_solution(mi - 1)
        report = SolveReport(
            iterations=mi,
            converged=False,
            residual_history=np.asarray(history),
            final_residual=float(np.linalg.norm(b - apply_A(x)) / bnorm),
            x=x,
        )
    report.wall_seconds = time.perf_counter() - t0
    return report
