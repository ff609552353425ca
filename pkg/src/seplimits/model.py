"""Scene model and Fisher information for two-point-source separation.

Two equal-strength incoherent point sources sit at ``±theta/2`` on a line,
the centroid is known, and each detected photon is blurred by a Gaussian
point-spread function of intensity standard deviation ``sigma``. Direct
imaging records photon positions; the mode-sorting measurement is
summarized by its constant information level ``L / (4 sigma^2)``.

All lengths share the unit of ``sigma``; information carries 1/length^2.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError
from .quadrature import adaptive_simpson

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Pad the Fisher integration window this many PSF widths beyond the outer
# source; the integrand decays like a Gaussian so the truncated tail is
# below 1e-20 of the total.
_INTEGRATION_PAD = 10.0

_FISHER_REL_TOL = 1e-8

# Fixed node count of the vectorized composite-Simpson evaluator (odd).
_CURVE_NODES = 4097


class Scheme(Enum):
    """Measurement scheme whose information curve is being described."""

    DIRECT = "direct"
    SPADE = "spade"


@dataclass(frozen=True)
class ImagingConfig:
    """Scene and measurement parameters.

    Parameters
    ----------
    sigma : float
        PSF intensity standard deviation (length unit), > 0.
    photons : int
        Detected photon count L, >= 1.
    """

    sigma: float
    photons: int

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise InvalidInputError(f"sigma must be a positive finite real, got {self.sigma}")
        if not (isinstance(self.photons, (int, np.integer)) and self.photons >= 1):
            raise InvalidInputError(f"photons must be an integer >= 1, got {self.photons}")

    @property
    def shot_noise_information(self) -> float:
        """Reference information level ``L / (4 sigma^2)``."""
        return self.photons / (4.0 * self.sigma**2)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (theta >= 0.0 and math.isfinite(theta)):
        raise InvalidInputError(f"separation must be a nonnegative finite real, got {theta}")
    return theta


@dataclass(frozen=True)
class FisherCurve:
    """Information ``J(theta)`` sampled on a separation grid.

    ``grid`` is strictly increasing, ``values`` are nonnegative and may not
    exceed the shot-noise limit of ``cfg`` beyond a 1e-6 relative slack.
    """

    scheme: Scheme
    grid: np.ndarray
    values: np.ndarray
    cfg: ImagingConfig

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise InvalidInputError("grid and values must be 1-d arrays of equal length")
        if grid.size and not np.all(np.diff(grid) > 0.0):
            raise InvalidInputError("grid must be strictly increasing")
        if np.any(values < 0.0) or not np.all(np.isfinite(values)):
            raise InvalidInputError("information values must be finite and nonnegative")
        limit = self.cfg.shot_noise_information * (1.0 + 1e-6)
        if np.any(values > limit):
            raise InvalidInputError("information values exceed the shot-noise limit")

    def __call__(self, theta):
        """Linear interpolation of the curve; clamps outside the grid."""
        return np.interp(theta, self.grid, self.values)


# ---------------------------------------------------------------------------
# Image-plane intensity
# ---------------------------------------------------------------------------


def intensity_profile(cfg: ImagingConfig, theta: float, x):
    """Photon-position density ``f(x | theta)`` on the image plane.

    Equal mixture of two Gaussians of width ``cfg.sigma`` centered at
    ``±theta/2``; normalized over the real line. Accepts scalar or ndarray
    ``x`` and broadcasts.
    """
    theta = _check_theta(theta)
    s = cfg.sigma
    x = np.asarray(x, dtype=float)
    half = 0.5 * theta
    norm = 1.0 / (s * _SQRT_2PI)
    out = 0.5 * norm * (
        np.exp(-0.5 * ((x - half) / s) ** 2) + np.exp(-0.5 * ((x + half) / s) ** 2)
    )
    return out if out.ndim else float(out)


def _mixture_and_derivative(s: float, theta: float, x):
    """Return ``f(x|theta)`` and its analytic theta-derivative."""
    half = 0.5 * theta
    norm = 1.0 / (s * _SQRT_2PI)
    gm = norm * np.exp(-0.5 * ((x - half) / s) ** 2)
    gp = norm * np.exp(-0.5 * ((x + half) / s) ** 2)
    f = 0.5 * (gm + gp)
    df = ((x - half) * gm - (x + half) * gp) / (4.0 * s**2)
    return f, df


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------


def fisher_spade(cfg: ImagingConfig, theta: float | None = None) -> float:
    """Information of the mode-sorting measurement: ``L / (4 sigma^2)``.

    Independent of the separation; ``theta`` is accepted (and validated)
    only for signature symmetry with :func:`fisher_direct`.
    """
    if theta is not None:
        _check_theta(theta)
    return cfg.shot_noise_information


def fisher_direct(cfg: ImagingConfig, theta: float) -> float:
    """Direct-imaging information ``L * ∫ (∂f/∂θ)² / f dx``.

    Adaptive Simpson quadrature over ``[-(theta/2 + 10 sigma),
    theta/2 + 10 sigma]`` at relative tolerance 1e-8. Exactly zero at
    ``theta = 0`` where the derivative vanishes identically.

    Raises
    ------
    NumericalError
        If the quadrature fails to reach tolerance.
    """
    theta = _check_theta(theta)
    if theta == 0.0:
        return 0.0
    s = cfg.sigma
    limit = 0.5 * theta + _INTEGRATION_PAD * s

    def integrand(x: float) -> float:
        f, df = _mixture_and_derivative(s, theta, x)
        return df * df / f

    return cfg.photons * adaptive_simpson(integrand, -limit, limit, rel_tol=_FISHER_REL_TOL)


def fisher_direct_curve(cfg: ImagingConfig, thetas) -> FisherCurve:
    """Vectorized direct-imaging information on a grid of separations.

    Composite Simpson with a fixed fine node set shared across the grid;
    agrees with :func:`fisher_direct` to well below 1e-6 relative. Intended
    for dense curves (eigensolver potentials, CSV export) where per-point
    adaptive quadrature would be wasteful.
    """
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 1 or thetas.size < 1:
        raise InvalidInputError("thetas must be a nonempty 1-d array")
    if np.any(thetas < 0.0) or not np.all(np.isfinite(thetas)):
        raise InvalidInputError("separations must be nonnegative finite reals")
    if thetas.size > 1 and not np.all(np.diff(thetas) > 0.0):
        raise InvalidInputError("thetas must be strictly increasing")

    s = cfg.sigma
    limit = 0.5 * float(thetas[-1]) + _INTEGRATION_PAD * s
    x = np.linspace(-limit, limit, _CURVE_NODES)
    w = np.ones(_CURVE_NODES)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (x[1] - x[0]) / 3.0

    values = np.empty_like(thetas)
    chunk = max(1, int(2e6) // _CURVE_NODES)
    for start in range(0, thetas.size, chunk):
        block = thetas[start : start + chunk, None]
        f, df = _mixture_and_derivative(s, block, x[None, :])
        values[start : start + chunk] = (df * df / f) @ w
    values *= cfg.photons
    values[thetas == 0.0] = 0.0
    np.clip(values, 0.0, cfg.shot_noise_information, out=values)
    return FisherCurve(scheme=Scheme.DIRECT, grid=thetas, values=values, cfg=cfg)


def fisher_direct_quadratic_bound(cfg: ImagingConfig, theta: float) -> float:
    """Small-separation upper bound ``L theta^2 / (8 sigma^4)``.

    Dominates the true direct-imaging information everywhere and matches
    its leading behavior near ``theta = 0``.
    """
    theta = _check_theta(theta)
    return cfg.photons * theta**2 / (8.0 * cfg.sigma**4)


def crb(cfg: ImagingConfig, theta: float, scheme: Scheme) -> float:
    """Unbiased-estimator bound ``1 / J(theta)`` for the given scheme.

    Returns ``math.inf`` where the information vanishes (direct imaging at
    ``theta = 0``): the bound diverges rather than failing.
    """
    if scheme is Scheme.SPADE:
        j = fisher_spade(cfg, theta)
    elif scheme is Scheme.DIRECT:
        j = fisher_direct(cfg, theta)
    else:
        raise InvalidInputError(f"unknown measurement scheme: {scheme!r}")
    if j == 0.0:
        return math.inf
    return 1.0 / j
