"""Monte Carlo evaluation of the separation estimators.

Sweeps simulate `trials` independent measurements at every grid
separation, apply an estimator, and record the mean-square error with its
standard error and the bias, for comparison against the exact Poisson-sum
errors and the minimax bounds. Every (kind, grid point, trial) triple owns
a dedicated random substream, so sweeps are reproducible bit for bit
regardless of worker count or execution order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bounds import PriorDensity
from .errors import InvalidInputError
from .estimators import EstimatorKind, _batch_direct_ml, spade_mean_count
from .model import ImagingConfig, _check_theta
from .streams import poisson_sample, substream

_MIN_SCALING_POINTS = 3


# ---------------------------------------------------------------------------
# Configuration and result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of one Monte Carlo sweep.

    ``search_max`` bounds the direct-imaging ML search; when omitted it
    defaults to twice the largest grid separation (or ``10 sigma`` for an
    all-zero grid), fixed once per sweep so the estimator never depends on
    the true separation.
    """

    cfg: ImagingConfig
    theta_grid: np.ndarray
    seed: int
    kinds: tuple[EstimatorKind, ...]
    trials: int = 5000
    search_max: float | None = None

    def __post_init__(self):
        grid = np.asarray(self.theta_grid, dtype=float)
        object.__setattr__(self, "theta_grid", grid)
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if grid.ndim != 1 or grid.size == 0:
            raise InvalidInputError("theta_grid must be a nonempty 1-d array")
        if np.any(grid < 0.0) or not np.all(np.isfinite(grid)):
            raise InvalidInputError("theta_grid entries must be nonnegative finite reals")
        if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
            raise InvalidInputError("theta_grid must be strictly increasing")
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 1):
            raise InvalidInputError(f"trials must be an integer >= 1, got {self.trials}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if not self.kinds or not all(isinstance(k, EstimatorKind) for k in self.kinds):
            raise InvalidInputError("kinds must be a nonempty sequence of EstimatorKind")
        if self.search_max is not None and not self.search_max > 0.0:
            raise InvalidInputError("search_max must be positive when given")

    @property
    def resolved_search_max(self) -> float:
        if self.search_max is not None:
            return float(self.search_max)
        top = float(self.theta_grid[-1])
        return 2.0 * top if top > 0.0 else 10.0 * self.cfg.sigma


@dataclass(frozen=True)
class MseCurve:
    """Per-separation risk estimates for one estimator."""

    kind: EstimatorKind
    theta: np.ndarray
    mse: np.ndarray
    std_err: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("theta", "mse", "std_err", "bias"):
            arrays[name] = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arrays[name])
        n = arrays["theta"].size
        if any(a.ndim != 1 or a.size != n for a in arrays.values()):
            raise InvalidInputError("curve arrays must be 1-d and of equal length")
        if np.any(arrays["mse"] < 0.0) or np.any(arrays["std_err"] < 0.0):
            raise InvalidInputError("mse and std_err must be nonnegative")


@dataclass(frozen=True)
class ScalingResult:
    """Worst-case error versus photon number with a log-log slope fit."""

    kind: EstimatorKind
    L_values: tuple[int, ...]
    sup_mse: np.ndarray
    sup_std_err: np.ndarray
    sup_theta: np.ndarray
    slope: float
    intercept: float

    def __post_init__(self):
        object.__setattr__(self, "L_values", tuple(int(v) for v in self.L_values))
        if len(self.L_values) < _MIN_SCALING_POINTS:
            raise InvalidInputError("scaling results need at least 3 photon numbers")
        if any(b >= c for b, c in zip(self.L_values, self.L_values[1:])):
            raise InvalidInputError("L_values must be strictly increasing")
        sup = np.asarray(self.sup_mse, dtype=float)
        object.__setattr__(self, "sup_mse", sup)
        if np.any(sup <= 0.0):
            raise InvalidInputError("sup_mse values must be positive")


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def sample_spade(cfg: ImagingConfig, theta: float, stream: np.random.Generator) -> int:
    """One mode-sorting outcome: Poisson count of mean ``L θ²/(16 σ²)``."""
    return poisson_sample(stream, spade_mean_count(cfg, theta))


def sample_direct(cfg: ImagingConfig, theta: float, stream: np.random.Generator) -> np.ndarray:
    """One direct-imaging record: ``L`` photon positions.

    Each photon picks a source at ``±θ/2`` by a fair coin, then lands with
    a Gaussian blur of width ``sigma``.
    """
    theta = _check_theta(theta)
    signs = np.where(stream.random(cfg.photons) < 0.5, 1.0, -1.0)
    return signs * (0.5 * theta) + cfg.sigma * stream.standard_normal(cfg.photons)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _spade_estimates(kind: EstimatorKind, ys: np.ndarray, cfg: ImagingConfig) -> np.ndarray:
    est = 4.0 * cfg.sigma * np.sqrt(ys / cfg.photons)
    if kind is EstimatorKind.SPADE_MODIFIED_ML:
        est[ys == 0] = 2.0 * cfg.sigma / math.sqrt(cfg.photons)
    return est


def _sweep_point(sw: SweepConfig, kind: EstimatorKind, kind_index: int, theta_index: int):
    cfg = sw.cfg
    theta = float(sw.theta_grid[theta_index])
    if kind.is_spade:
        ys = np.empty(sw.trials, dtype=np.int64)
        for t in range(sw.trials):
            ys[t] = sample_spade(cfg, theta, substream(sw.seed, kind_index, theta_index, t))
        est = _spade_estimates(kind, ys, cfg)
    else:
        positions = np.empty((sw.trials, cfg.photons))
        for t in range(sw.trials):
            positions[t] = sample_direct(cfg, theta, substream(sw.seed, kind_index, theta_index, t))
        est = _batch_direct_ml(positions, cfg, sw.resolved_search_max)
    sq = (est - theta) ** 2
    mse = float(sq.mean())
    std_err = float(math.sqrt(sq.var(ddof=1) / sw.trials)) if sw.trials > 1 else 0.0
    bias = float(est.mean()) - theta
    return mse, std_err, bias


def mse_sweep(sw: SweepConfig, workers: int = 1) -> list[MseCurve]:
    """Monte Carlo MSE curves for every estimator kind in ``sw``.

    Each grid point runs ``sw.trials`` independent measurements on
    substreams keyed by (kind index, grid index, trial index). The output
    does not depend on ``workers``; grid points merely evaluate in
    parallel threads.
    """
    if workers < 1:
        raise InvalidInputError("workers must be >= 1")
    curves = []
    for kind_index, kind in enumerate(sw.kinds):
        points = range(sw.theta_grid.size)
        if workers == 1:
            rows = [_sweep_point(sw, kind, kind_index, j) for j in points]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda j: _sweep_point(sw, kind, kind_index, j), points))
        mse, std_err, bias = (np.array(col) for col in zip(*rows))
        curves.append(
            MseCurve(kind=kind, theta=sw.theta_grid.copy(), mse=mse, std_err=std_err, bias=bias)
        )
    return curves


def sup_mse(curve: MseCurve) -> tuple[float, float, float]:
    """Grid maximizer of the curve: ``(theta_at_max, mse_max, std_err_at_max)``.

    Ties break toward the smaller separation.
    """
    if curve.theta.size == 0:
        raise InvalidInputError("cannot take the supremum of an empty curve")
    j = int(np.argmax(curve.mse))
    return float(curve.theta[j]), float(curve.mse[j]), float(curve.std_err[j])


def bayes_risk_mc(sw: SweepConfig, prior: PriorDensity) -> tuple[float, float]:
    """Monte Carlo Bayes risk of one estimator under ``prior``.

    Draws ``theta`` from the prior by inverse-CDF on its grid, simulates
    one measurement per draw, and averages the squared errors. ``sw.kinds``
    must name exactly one estimator. Returns ``(risk, std_err)``.
    """
    if len(sw.kinds) != 1:
        raise InvalidInputError("bayes_risk_mc expects exactly one estimator kind")
    kind = sw.kinds[0]
    cfg = sw.cfg
    cdf = np.concatenate(([0.0], np.cumsum(
        0.5 * (prior.density[1:] + prior.density[:-1]) * np.diff(prior.grid)
    )))
    cdf /= cdf[-1]

    sq = np.empty(sw.trials)
    for t in range(sw.trials):
        stream = substream(sw.seed, 0, t)
        theta = float(np.interp(stream.random(), cdf, prior.grid))
        if kind.is_spade:
            ys = np.array([sample_spade(cfg, theta, stream)], dtype=np.int64)
            est = float(_spade_estimates(kind, ys, cfg)[0])
        else:
            positions = sample_direct(cfg, theta, stream)
            est = float(_batch_direct_ml(positions[None, :], cfg, sw.resolved_search_max)[0])
        sq[t] = (est - theta) ** 2
    risk = float(sq.mean())
    std_err = float(math.sqrt(sq.var(ddof=1) / sw.trials)) if sw.trials > 1 else 0.0
    return risk, std_err


def scaling_sweep(
    cfg: ImagingConfig, L_values, sw: SweepConfig, workers: int = 1
) -> list[ScalingResult]:
    """Worst-case error versus photon number, with log-log slope fits.

    Runs :func:`mse_sweep` at every photon number in ``L_values`` (the
    sigma of ``cfg`` and the grid/trials/kinds of ``sw`` act as the
    template) and fits ``log sup-MSE`` against ``log L`` by ordinary least
    squares. Each photon number gets an independent child seed derived
    from ``sw.seed``.
    """
    L_values = [int(v) for v in L_values]
    if len(L_values) < _MIN_SCALING_POINTS:
        raise InvalidInputError("scaling sweeps need at least 3 photon numbers")
    if any(b >= c for b, c in zip(L_values, L_values[1:])):
        raise InvalidInputError("L_values must be strictly increasing")

    per_kind = {kind: ([], [], []) for kind in sw.kinds}
    for li, L in enumerate(L_values):
        child_seed = int(np.random.SeedSequence(sw.seed, spawn_key=(li,)).generate_state(1)[0])
        sw_l = replace(sw, cfg=ImagingConfig(sigma=cfg.sigma, photons=L), seed=child_seed)
        for curve in mse_sweep(sw_l, workers=workers):
            theta_at, mse_max, err_at = sup_mse(curve)
            sup, errs, thetas = per_kind[curve.kind]
            sup.append(mse_max)
            errs.append(err_at)
            thetas.append(theta_at)

    results = []
    logL = np.log(np.asarray(L_values, dtype=float))
    for kind in sw.kinds:
        sup, errs, thetas = per_kind[kind]
        slope, intercept = np.polyfit(logL, np.log(np.asarray(sup)), 1)
        results.append(
            ScalingResult(
                kind=kind,
                L_values=tuple(L_values),
                sup_mse=np.asarray(sup),
                sup_std_err=np.asarray(errs),
                sup_theta=np.asarray(thetas),
                slope=float(slope),
                intercept=float(intercept),
            )
        )
    return results
