"""Reproducible random substreams and Poisson sampling.

Monte Carlo sweeps key every trial to its own generator, derived by
hashing the user seed together with structured indices (kind, grid point,
trial). Results are therefore independent of execution order and of how
work is split across workers, and identical seeds reproduce identical
outputs byte for byte.

The Poisson sampler is implemented here rather than taken from the
generator object so that the exact stream consumption is pinned by this
package: inversion by sequential search below mean 10, transformed
rejection with squeeze (Hormann's PTRS) above, both exact.
"""

import math

import numpy as np

from .errors import InvalidInputError, NumericalError

# Mean at which the sampler switches from CDF inversion to transformed
# rejection; inversion cost grows linearly with the mean, PTRS is O(1).
_PTRS_THRESHOLD = 10.0

# Hard cap on inversion steps; the CDF reaches 1 to double precision long
# before this, so hitting it indicates a broken uniform source.
_INVERSION_CAP = 1000

_MAX_REJECTION_ROUNDS = 10000


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream addressed by ``key`` under ``seed``.

    The seed and the index tuple are hashed through ``SeedSequence``, so
    distinct keys give statistically independent streams and the mapping
    is stable across processes and platforms.
    """
    if not all(isinstance(k, (int, np.integer)) and k >= 0 for k in key):
        raise InvalidInputError(f"substream indices must be nonnegative integers, got {key!r}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def poisson_sample(rng: np.random.Generator, mu: float) -> int:
    """Draw one Poisson variate of mean ``mu`` from ``rng``.

    Sequential-search inversion for ``mu < 10`` (one uniform per draw),
    PTRS transformed rejection for larger means (two uniforms per round,
    about 1.1 rounds on average).
    """
    mu = float(mu)
    if not (mu >= 0.0 and math.isfinite(mu)):
        raise InvalidInputError(f"Poisson mean must be nonnegative and finite, got {mu}")
    if mu == 0.0:
        return 0
    if mu < _PTRS_THRESHOLD:
        return _poisson_inversion(rng, mu)
    return _poisson_ptrs(rng, mu)


def _poisson_inversion(rng: np.random.Generator, mu: float) -> int:
    u = rng.random()
    p = math.exp(-mu)
    cdf = p
    y = 0
    while u > cdf:
        y += 1
        if y > _INVERSION_CAP:
            raise NumericalError(f"Poisson inversion failed to terminate at mean {mu}")
        p *= mu / y
        cdf += p
    return y


def _poisson_ptrs(rng: np.random.Generator, mu: float) -> int:
    b = 0.931 + 2.53 * math.sqrt(mu)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_mu = math.log(mu)
    for _ in range(_MAX_REJECTION_ROUNDS):
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v * inv_alpha / (a / (us * us) + b)) <= k * log_mu - mu - math.lgamma(k + 1.0):
            return int(k)
    raise NumericalError(f"Poisson rejection sampler failed to accept at mean {mu}")
