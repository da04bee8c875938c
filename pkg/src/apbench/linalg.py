"""Small dense symmetric positive-definite solves for the projection family.

The Gram systems solved here are tiny (order <= 8 in practice), so the
Cholesky factorization runs on plain Python scalars: for these sizes that is
both faster than a LAPACK round-trip and gives exact control over the pivot
tolerance. Only the lower triangle of the input matrix is read.
"""

from __future__ import annotations

from math import sqrt

import numpy as np

__all__ = ["SingularMatrixError", "solve_regularized", "PIVOT_RTOL", "RESIDUAL_RTOL"]

# pivot smaller than PIVOT_RTOL * max diagonal entry counts as singular
PIVOT_RTOL = 1e-12
# guaranteed residual bound: max|A x - b| <= RESIDUAL_RTOL * (1 + max|b|)
RESIDUAL_RTOL = 1e-10


class SingularMatrixError(ArithmeticError):
    """Factorization hit a pivot below tolerance (matrix numerically singular)."""


def _cholesky(a: list[list[float]], n: int, tol: float) -> list[list[float]]:
    """In-place lower Cholesky of ``a`` with a relative pivot check."""
    for j in range(n):
        row_j = a[j]
        d = row_j[j]
        for k in range(j):
            d -= row_j[k] * row_j[k]
        if d <= tol:
            raise SingularMatrixError(
                f"pivot {d:.3e} at index {j} below tolerance {tol:.3e}; "
                "the Gram matrix is numerically singular (consider a "
                "regularization constant > 0)"
            )
        dj = sqrt(d)
        row_j[j] = dj
        for i in range(j + 1, n):
            row_i = a[i]
            s = row_i[j]
            for k in range(j):
                s -= row_i[k] * row_j[k]
            row_i[j] = s / dj
    return a


def _solve_factored(chol: list[list[float]], b: list[float], n: int) -> list[float]:
    y = [0.0] * n
    for i in range(n):
        s = b[i]
        row = chol[i]
        for k in range(i):
            s -= row[k] * y[k]
        y[i] = s / row[i]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= chol[k][i] * x[k]
        x[i] = s / chol[i][i]
    return x


def _residual(a: list[list[float]], x: list[float], b: list[float], n: int) -> list[float]:
    r = []
    for i in range(n):
        s = b[i]
        row = a[i]
        for k in range(n):
            s -= row[k] * x[k]
        r.append(s)
    return r


def solve_regularized(gram, delta: float, rhs) -> np.ndarray:
    """Solve (gram + delta*I) x = rhs for a symmetric PSD ``gram``.

    Raises SingularMatrixError when the factorization meets a pivot below
    PIVOT_RTOL times the largest diagonal entry (with delta = 0 this is the
    singular-Gram case the regularization constant exists to prevent). The
    returned solution satisfies max|A x - rhs| <= RESIDUAL_RTOL * (1 +
    max|rhs|); iterative refinement runs (at most three passes) whenever a
    substitution falls short of that bound.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"gram must be square, got shape {g.shape}")
    b_arr = np.asarray(rhs, dtype=float)
    n = g.shape[0]
    if n == 0:
        raise ValueError("gram must be at least 1 x 1")
    if b_arr.shape != (n,):
        raise ValueError(f"rhs must have shape ({n},), got {b_arr.shape}")

    a = g.tolist()
    if delta:
        for i in range(n):
            a[i][i] += delta
    max_diag = max(a[i][i] for i in range(n))
    tol = PIVOT_RTOL * max_diag

    sys_rows = [row[:] for row in a]  # factorization below clobbers `a`
    chol = _cholesky(a, n, tol)
    b = b_arr.tolist()
    x = _solve_factored(chol, b, n)

    bound = RESIDUAL_RTOL * (1.0 + max(abs(v) for v in b)) if n else 0.0
    r = _residual(sys_rows, x, b, n)
    for _ in range(3):
        if max(abs(v) for v in r) <= bound:
            return np.array(x)
        corr = _solve_factored(chol, r, n)
        x = [x[i] + corr[i] for i in range(n)]
        r = _residual(sys_rows, x, b, n)
    if max(abs(v) for v in r) > bound:
        # unreachable in float64 when ||x|| >> ||rhs|| (extreme delta/Gram
        # ratios); raising beats silently returning an out-of-contract result
        raise ArithmeticError(
            "solve_regularized could not reach the guaranteed residual "
            f"bound {bound:.3e} (residual {max(abs(v) for v in r):.3e})"
        )
    return np.array(x)
