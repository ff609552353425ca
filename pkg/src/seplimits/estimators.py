"""Maximum-likelihood estimators of the separation and their exact errors.

The mode-sorting measurement reduces to a single Poisson count ``Y`` with
mean ``L theta^2 / (16 sigma^2)``; its ML estimate is ``4 sigma
sqrt(Y/L)``, and a modified variant replaces the ``Y = 0`` output with
``2 sigma / sqrt(L)`` to trade bias at the origin for a lower worst-case
error. Because the outcome space is one-dimensional, the mean-square error
of both estimators can be evaluated exactly by a truncated Poisson sum.

Direct imaging records ``L`` photon positions; its ML estimate maximizes
the mixture log-likelihood by a coarse scan plus golden-section refinement.
"""

import math
from enum import Enum

import numpy as np
from scipy.stats import poisson

from .errors import InvalidInputError
from .model import ImagingConfig, _check_theta

# Poisson sums keep every term within 12 standard deviations of the mean
# plus an additive margin; the discarded tail mass is below 1e-12.
_TAIL_SIGMAS = 12.0
_WINDOW_LO_MARGIN = 20
_WINDOW_HI_MARGIN = 30
_MAX_POISSON_MEAN = 1e9

_SCAN_CANDIDATES = 512
_REFINE_TOL_SIGMA = 1e-6
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class EstimatorKind(Enum):
    """Estimators benchmarked by this package."""

    SPADE_ML = "spade-ml"
    SPADE_MODIFIED_ML = "spade-modified-ml"
    DIRECT_ML = "direct-ml"

    @property
    def is_spade(self) -> bool:
        return self in (EstimatorKind.SPADE_ML, EstimatorKind.SPADE_MODIFIED_ML)


def _check_count(y) -> int:
    if not (isinstance(y, (int, np.integer)) and y >= 0):
        raise InvalidInputError(f"count must be a nonnegative integer, got {y!r}")
    return int(y)


# ---------------------------------------------------------------------------
# Mode-sorting (Poisson statistic) estimators
# ---------------------------------------------------------------------------


def spade_ml(y, cfg: ImagingConfig) -> float:
    """ML separation estimate ``4 sigma sqrt(y / L)`` from the count ``y``."""
    y = _check_count(y)
    return 4.0 * cfg.sigma * math.sqrt(y / cfg.photons)


def spade_modified_ml(y, cfg: ImagingConfig) -> float:
    """ML estimate with the ``y = 0`` output replaced by ``2 sigma / sqrt(L)``."""
    y = _check_count(y)
    if y == 0:
        return 2.0 * cfg.sigma / math.sqrt(cfg.photons)
    return 4.0 * cfg.sigma * math.sqrt(y / cfg.photons)


def spade_mean_count(cfg: ImagingConfig, theta: float) -> float:
    """Expected count ``L theta^2 / (16 sigma^2)`` at separation ``theta``."""
    theta = _check_theta(theta)
    return cfg.photons * theta**2 / (16.0 * cfg.sigma**2)


def _poisson_window(mu: float) -> np.ndarray:
    sd = math.sqrt(mu)
    lo = max(0, math.floor(mu - _TAIL_SIGMAS * sd) - _WINDOW_LO_MARGIN)
    hi = math.ceil(mu + _TAIL_SIGMAS * sd) + _WINDOW_HI_MARGIN
    return np.arange(lo, hi + 1)


def spade_exact_mse(cfg: ImagingConfig, theta: float, kind: EstimatorKind) -> float:
    """Exact mean-square error of a mode-sorting estimator at ``theta``.

    Sums ``P(Y = y) (estimate(y) - theta)^2`` over a window covering all
    but < 1e-12 of the Poisson mass at mean ``L theta^2 / (16 sigma^2)``.

    Raises
    ------
    InvalidInputError
        If ``kind`` is not a mode-sorting estimator or the Poisson mean
        exceeds the overflow guard of 1e9.
    """
    if not kind.is_spade:
        raise InvalidInputError(f"exact MSE is only available for mode-sorting kinds, got {kind}")
    mu = spade_mean_count(cfg, theta)
    if mu > _MAX_POISSON_MEAN:
        raise InvalidInputError(f"Poisson mean {mu:.3e} exceeds the overflow guard")
    ys = _poisson_window(mu)
    est = 4.0 * cfg.sigma * np.sqrt(ys / cfg.photons)
    if kind is EstimatorKind.SPADE_MODIFIED_ML and ys[0] == 0:
        est[0] = 2.0 * cfg.sigma / math.sqrt(cfg.photons)
    return float(np.sum(poisson.pmf(ys, mu) * (est - theta) ** 2))


def spade_mse_upper_bound(cfg: ImagingConfig) -> float:
    """Performance guarantee ``16 sigma^2 / L`` for the ML estimator.

    Holds for every separation and photon number; four times the minimax
    lower bound, so the latter is tight up to that prefactor.
    """
    return 16.0 * cfg.sigma**2 / cfg.photons


# ---------------------------------------------------------------------------
# Supporting inequalities
# ---------------------------------------------------------------------------


def verify_sqrt_inequality(x: float) -> bool:
    """Check ``sqrt(x) >= 1 + (x-1)/2 - (x-1)^2/2`` for ``x >= 0``.

    True for every nonnegative real; equality exactly at 0 and 1. Exposed
    so the chain behind the ML error guarantee can be spot-checked.
    """
    x = float(x)
    if not (x >= 0.0 and math.isfinite(x)):
        raise InvalidInputError(f"argument must be a nonnegative finite real, got {x}")
    d = x - 1.0
    return math.sqrt(x) >= 1.0 + 0.5 * d - 0.5 * d * d


def expected_sqrt_poisson(mu: float) -> float:
    """``E sqrt(Y)`` for ``Y ~ Poisson(mu)`` by truncated summation.

    Uses the same 12-standard-deviation window as :func:`spade_exact_mse`;
    the result always satisfies ``E sqrt(Y) >= sqrt(mu) - 1/(2 sqrt(mu))``.
    """
    mu = float(mu)
    if not (mu > 0.0 and math.isfinite(mu)):
        raise InvalidInputError(f"Poisson mean must be positive, got {mu}")
    if mu > _MAX_POISSON_MEAN:
        raise InvalidInputError(f"Poisson mean {mu:.3e} exceeds the overflow guard")
    ys = _poisson_window(mu)
    return float(np.sum(poisson.pmf(ys, mu) * np.sqrt(ys)))


# ---------------------------------------------------------------------------
# Direct-imaging ML estimator
# ---------------------------------------------------------------------------


def direct_log_likelihood(positions: np.ndarray, cfg: ImagingConfig, thetas):
    """Mixture log-likelihood ``Σ_i ln f(x_i | θ)`` for one photon record.

    Vectorized over candidate separations; a scalar ``thetas`` gives a float.
    """
    positions = np.asarray(positions, dtype=float)
    th = np.asarray(thetas, dtype=float)
    flat = np.atleast_1d(th)
    out = _batch_log_likelihood(positions[None, :], cfg, np.broadcast_to(flat, (1, flat.size)))[0]
    return float(out[0]) if th.ndim == 0 else out


def _batch_log_likelihood(positions, cfg, thetas):
    """Log-likelihood rows for a (trials, n) position matrix.

    ``thetas`` has shape (trials, m): per-trial candidate separations.
    Uses ``ln f = ln cosh(x θ / 2σ²) - (x² + θ²/4)/(2σ²) - ln(σ √(2π))``
    with the record length of the matrix, which need not equal the
    configured photon number.
    """
    s2 = cfg.sigma**2
    n = positions.shape[1]
    z = positions[:, :, None] * (thetas[:, None, :] / (2.0 * s2))
    rows = np.logaddexp(z, -z).sum(axis=1)
    const = -n * math.log(2.0 * cfg.sigma * math.sqrt(2.0 * math.pi))
    quad = (positions**2).sum(axis=1) / (2.0 * s2)
    return rows - n * thetas**2 / (8.0 * s2) - quad[:, None] + const


def _batch_direct_ml(positions: np.ndarray, cfg: ImagingConfig, theta_max: float) -> np.ndarray:
    """Scan-plus-golden-section ML separation for each row of ``positions``.

    Identical arithmetic for one row or many, so the scalar estimator is
    this routine with a single-row matrix.
    """
    trials = positions.shape[0]
    candidates = np.linspace(0.0, theta_max, _SCAN_CANDIDATES)
    spacing = candidates[1] - candidates[0]

    # Coarse scan in candidate blocks to bound the temporary size.
    best_val = np.full(trials, -np.inf)
    best_idx = np.zeros(trials, dtype=np.intp)
    block = max(1, int(4e6) // max(positions.size, 1))
    for start in range(0, _SCAN_CANDIDATES, block):
        cand = candidates[start : start + block]
        ll = _batch_log_likelihood(positions, cfg, np.broadcast_to(cand, (trials, cand.size)))
        idx = ll.argmax(axis=1)
        val = ll[np.arange(trials), idx]
        better = val > best_val  # strict: ties stay with the smaller theta
        best_val[better] = val[better]
        best_idx[better] = idx[better] + start

    lo = candidates[np.maximum(best_idx - 1, 0)]
    hi = candidates[np.minimum(best_idx + 1, _SCAN_CANDIDATES - 1)]

    # Golden-section refinement, iteration count fixed by the widest
    # possible bracket so batched and single-row calls match exactly.
    tol = _REFINE_TOL_SIGMA * cfg.sigma
    n_iter = max(0, math.ceil(math.log(tol / (2.0 * spacing)) / math.log(_INV_GOLDEN)))

    def ll_at(theta_col):
        return _batch_log_likelihood(positions, cfg, theta_col[:, None])[:, 0]

    x1 = hi - _INV_GOLDEN * (hi - lo)
    x2 = lo + _INV_GOLDEN * (hi - lo)
    f1 = ll_at(x1)
    f2 = ll_at(x2)
    for _ in range(n_iter):
        left = f1 >= f2  # ties collapse toward smaller theta
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x1_new = np.where(left, hi - _INV_GOLDEN * (hi - lo), x2)
        x2_new = np.where(left, x1, lo + _INV_GOLDEN * (hi - lo))
        f_new = ll_at(np.where(left, x1_new, x2_new))
        f1, f2 = np.where(left, f_new, f2), np.where(left, f1, f_new)
        x1, x2 = x1_new, x2_new
    return 0.5 * (lo + hi)


def direct_ml(positions, cfg: ImagingConfig, theta_max: float) -> float:
    """ML separation from direct-imaging photon positions.

    Maximizes the mixture log-likelihood over ``[0, theta_max]``: a coarse
    scan on 512 equally spaced candidates brackets the maximum, then
    golden-section search refines it to ``1e-6 sigma``. Ties break toward
    the smaller separation.

    Parameters
    ----------
    positions : array_like
        Photon arrival coordinates; must be nonempty.
    theta_max : float
        Upper end of the search interval, > 0.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 1 or positions.size == 0:
        raise InvalidInputError("photon positions must form a nonempty 1-d array")
    if not np.all(np.isfinite(positions)):
        raise InvalidInputError("photon positions must be finite")
    if not (theta_max > 0.0 and math.isfinite(theta_max)):
        raise InvalidInputError(f"theta_max must be positive, got {theta_max}")
    return float(_batch_direct_ml(positions[None, :], cfg, float(theta_max))[0])
