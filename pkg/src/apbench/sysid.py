"""Black-box system identification: plant, adaptation loop, ensemble average.

A run drives an unknown FIR plant and an adaptive filter with the same
excitation, feeds the error back into the chosen update rule, and records
the squared a-priori error per iteration. Runs are pure functions of
(config, run_index): the input noise is seeded with base_seed XOR run_index
and the optional measurement noise with an independent salted stream, so
ensembles are bit-reproducible and order-independent.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .algorithms import AlgorithmConfig, AlgorithmKind, MuMode, ap_step, lms_step, step_multiplies
from .linalg import SingularMatrixError
from .metrics import MSE_FLOOR, MseTrace
from .signals import NoiseKind, NoiseSpec, generate_noise, input_variance

__all__ = [
    "PlantModel",
    "ExperimentConfig",
    "RunResult",
    "EnsembleResult",
    "AdaptationError",
    "run_single",
    "run_ensemble",
    "MEASUREMENT_STREAM_SALT",
]

_SEED_MASK = (1 << 64) - 1
# XORed into the per-run seed to decorrelate measurement noise from the input
MEASUREMENT_STREAM_SALT = 0x9E3779B97F4A7C15

# auto-normalized step sizes are clamped here so that near-empty warm-up
# regressors (tiny ||x||^2) cannot push the projection update outside its
# stability range mu in (0, 2)
AUTO_MU_CAP = 1.0


class AdaptationError(RuntimeError):
    """An adaptation step failed; carries the run index and iteration."""

    def __init__(self, run_index: int, iteration: int, cause: Exception):
        super().__init__(f"run {run_index} failed at iteration {iteration}: {cause}")
        self.run_index = run_index
        self.iteration = iteration


@dataclass(frozen=True)
class PlantModel:
    """Unknown FIR system plus optional observation noise on its output."""

    h: np.ndarray
    measurement_noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        if self.h.ndim != 1 or self.h.shape[0] < 1:
            raise ValueError("plant h must be a non-empty 1-D coefficient array")
        if self.measurement_noise_sigma < 0:
            raise ValueError(
                f"measurement_noise_sigma must be >= 0, got {self.measurement_noise_sigma}"
            )

    @property
    def length(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class ExperimentConfig:
    plant: PlantModel
    algorithm: AlgorithmConfig
    noise: NoiseSpec
    iterations: int
    ensemble_runs: int
    base_seed: int

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.ensemble_runs < 1:
            raise ValueError(f"ensemble_runs must be >= 1, got {self.ensemble_runs}")
        if not 0 <= self.base_seed <= _SEED_MASK:
            raise ValueError(f"base_seed must be an unsigned 64-bit integer, got {self.base_seed}")
        if self.algorithm.filter_length < self.plant.length:
            warnings.warn(
                f"filter_length {self.algorithm.filter_length} is shorter than the "
                f"plant ({self.plant.length} taps): the plant cannot be identified exactly",
                stacklevel=2,
            )


@dataclass(frozen=True)
class RunResult:
    """Squared a-priori error per iteration plus the run's end state."""

    mse_trace: np.ndarray
    final_weights: np.ndarray
    total_multiplies: int


@dataclass(frozen=True)
class EnsembleResult:
    trace: MseTrace
    runs: tuple[RunResult, ...]

    @property
    def final_weights_mean(self) -> np.ndarray:
        return np.mean([r.final_weights for r in self.runs], axis=0)


def _desired_signal(config: ExperimentConfig, input_seed: int, x: np.ndarray) -> np.ndarray:
    d = np.convolve(x, config.plant.h)[: x.shape[0]]
    sigma_v = config.plant.measurement_noise_sigma
    if sigma_v > 0:
        spec = NoiseSpec(kind=NoiseKind.WHITE, sigma=sigma_v,
                         seed=(input_seed ^ MEASUREMENT_STREAM_SALT) & _SEED_MASK)
        d = d + generate_noise(spec, x.shape[0])
    return d


def run_single(config: ExperimentConfig, run_index: int) -> RunResult:
    """One adaptation run; deterministic given (config, run_index).

    Weights start at zero. Each iteration pushes one input sample, forms the
    data matrix from the most recent regressors (iterations with fewer than
    N-1 past samples use the regressors available so far: the all-zero
    padding rows carry no constraint and are omitted, which equals the
    zero-padded update in the regularized limit), performs one step of the
    configured algorithm and records the squared a-priori error.
    """
    algo = config.algorithm
    L = algo.filter_length
    T = config.iterations
    input_seed = (config.base_seed ^ run_index) & _SEED_MASK
    x = generate_noise(replace(config.noise, seed=input_seed), T)
    d = _desired_signal(config, input_seed, x)

    # taps[n] is the tap-delay line after pushing x[0..n]: newest sample first
    xp = np.concatenate([np.zeros(L - 1), x])
    taps = sliding_window_view(xp, L)[:, ::-1]
    w = np.zeros(L)
    mse = np.empty(T)

    try:
        if algo.kind is AlgorithmKind.LMS:
            mu = algo.mu
            for n in range(T):
                w, out = lms_step(w, taps[n], d[n], mu)
                mse[n] = out.error_e * out.error_e
        else:
            N = algo.projection_order
            delta = algo.resolved_delta(input_variance(config.noise))
            if N > 1:
                taps_ext = np.concatenate([np.zeros((N - 1, L)), taps])
                d_ext = np.concatenate([np.zeros(N - 1), d])
            else:
                taps_ext, d_ext = taps, d
            fixed = algo.mu_mode is MuMode.FIXED
            mu = algo.mu if fixed else 0.0
            order = algo.normalization_order
            warmup = N + L - 2  # rows are not fully populated before this
            for n in range(T):
                X = taps_ext[n : n + N][::-1]
                d_vec = d_ext[n : n + N][::-1]
                if n < N - 1:
                    keep = X.any(axis=1)
                    X = X[keep]
                    d_vec = d_vec[keep]
                if not fixed:
                    norm2 = float(X[0] @ X[0]) if X.shape[0] else 0.0
                    if norm2 == 0.0:
                        e = d[n] - float(taps[n] @ w)
                        mse[n] = e * e
                        continue
                    mu = min(1.0 / (order * norm2), AUTO_MU_CAP)
                elif X.shape[0] == 0:
                    e = d[n] - float(taps[n] @ w)
                    mse[n] = e * e
                    continue
                while True:
                    try:
                        w, out = ap_step(w, X, d_vec, mu, delta)
                        mse[n] = out.error_e * out.error_e
                        break
                    except SingularMatrixError:
                        # while the regressors are still filling up, an old
                        # sparse row can make the Gram numerically singular
                        # with delta = 0 although it adds (almost) nothing;
                        # shed it and retry, as the pseudo-inverse limit would
                        if n >= warmup or X.shape[0] <= 1:
                            raise
                        X = X[:-1]
                        d_vec = d_vec[:-1]
    except SingularMatrixError as exc:
        raise AdaptationError(run_index, n, exc) from exc

    per_step = step_multiplies(algo.kind, L, algo.projection_order)
    return RunResult(mse_trace=mse, final_weights=w, total_multiplies=T * per_step)


def run_ensemble(config: ExperimentConfig, max_workers: int = 1) -> EnsembleResult:
    """Average squared error over ensemble_runs independent runs.

    The result is bitwise independent of max_workers: every run depends only
    on (config, run_index) and the reduction is done in run-index order.
    """
    indices = range(config.ensemble_runs)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            runs = tuple(pool.map(lambda i: run_single(config, i), indices))
    else:
        runs = tuple(run_single(config, i) for i in indices)
    mean_e2 = np.mean(np.stack([r.mse_trace for r in runs]), axis=0)
    values_db = 10.0 * np.log10(np.maximum(mean_e2, MSE_FLOOR))
    return EnsembleResult(trace=MseTrace(values_db, smoothing_window=1), runs=runs)
