"""Built-in consistency checks behind the ``selftest`` CLI command.

Three property suites run on fixed seeds: the order-1 projection step must
match the closed-form NLMS update, a full projection step must annihilate
the a-posteriori errors, and the regularized solver must honor its residual
bound. Each suite returns (ok, detail) so the CLI can print one line per
suite and exit nonzero on any failure.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .algorithms import ap_step

__all__ = ["run_all", "nlms_equivalence", "aposteriori_annihilation", "solver_residual"]


def nlms_equivalence(count: int = 2000, seed: int = 101) -> tuple[bool, str]:
    """ap_step at order 1 with no regularization must equal NLMS closed form."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        L = int(rng.integers(1, 33))
        w = rng.standard_normal(L)
        x = rng.standard_normal(L)
        d = float(rng.standard_normal())
        mu = float(rng.uniform(0.05, 2.0))
        w_ap, _ = ap_step(w, x[None, :], [d], mu, delta=0.0)
        e = d - float(x @ w)
        w_ref = w + mu * e * x / float(x @ x)
        scale = max(np.max(np.abs(w_ref)), 1.0)
        worst = max(worst, float(np.max(np.abs(w_ap - w_ref))) / scale)
    return worst <= 1e-12, f"max relative deviation {worst:.3e} (bound 1e-12, {count} cases)"


def aposteriori_annihilation(count: int = 500, seed: int = 202) -> tuple[bool, str]:
    """A full step (mu=1, delta=0) must zero the a-posteriori error vector."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        N = int(rng.integers(1, 5))
        L = int(rng.integers(N + 2, 24))
        X = rng.standard_normal((N, L))
        w = rng.standard_normal(L)
        d = rng.standard_normal(N)
        w_new, _ = ap_step(w, X, d, mu=1.0, delta=0.0)
        post = np.max(np.abs(d - X @ w_new)) / (1.0 + np.max(np.abs(d)))
        worst = max(worst, float(post))
    return worst <= 1e-10, f"max a-posteriori residual {worst:.3e} (bound 1e-10, {count} cases)"


def solver_residual(count: int = 2000, seed: int = 303) -> tuple[bool, str]:
    """Every regularized solve must meet the documented residual bound."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        N = int(rng.integers(1, 9))
        A = rng.standard_normal((N, N))
        gram = A @ A.T
        if i % 3 == 0:
            # rank-deficient Gram rescued by the regularization constant;
            # delta >= 1e-4 keeps ||x|| small enough that the residual bound
            # is attainable at all in float64
            u = rng.standard_normal(N)
            gram = np.outer(u, u)
            delta = float(rng.uniform(1e-4, 1e-2))
        else:
            delta = float(rng.choice([0.0, 1e-6, 1e-3]))
            gram = gram + 1e-3 * np.eye(N)
        rhs = rng.standard_normal(N)
        x = linalg.solve_regularized(gram, delta, rhs)
        resid = np.max(np.abs(gram @ x + delta * x - rhs))
        bound = linalg.RESIDUAL_RTOL * (1.0 + np.max(np.abs(rhs)))
        worst = max(worst, float(resid / bound))
    return worst <= 1.0, f"worst residual at {worst:.3f} of bound ({count} systems)"


def run_all() -> dict[str, tuple[bool, str]]:
    return {
        "nlms_equivalence": nlms_equivalence(),
        "aposteriori_annihilation": aposteriori_annihilation(),
        "solver_residual": solver_residual(),
    }
