"""Infinite-population mutation-selection model in error-class coordinates.

For a landscape whose fitness depends only on the Hamming distance ``k`` to
a master genotype, the 2**n genotype frequencies collapse to ``n + 1`` class
frequencies. The stationary class distribution is the principal
eigenvector of ``M @ diag(f)``, where ``M[l, k]`` is the probability that one
round of per-bit mutation moves a class-``k`` genotype into class ``l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConvergenceError, DetectionError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10**6
EXACT_COMB_LIMIT = 25


def _binom_pmf(trials: int, p: float) -> np.ndarray:
    """Binomial(trials, p) probabilities for 0..trials successes."""
    if p == 0.0 or p == 1.0:
        pmf = np.zeros(trials + 1)
        pmf[0 if p == 0.0 else trials] = 1.0
        return pmf
    ks = np.arange(trials + 1)
    if trials <= EXACT_COMB_LIMIT:
        comb = np.array([math.comb(trials, k) for k in ks], dtype=np.float64)
        return comb * p**ks * (1.0 - p) ** (trials - ks)
    log_comb = np.array([math.lgamma(trials + 1) - math.lgamma(k + 1) - math.lgamma(trials - k + 1) for k in ks])
    return np.exp(log_comb + ks * math.log(p) + (trials - ks) * math.log1p(-p))


def class_mutation_matrix(n: int, p: float) -> np.ndarray:
    """Column-stochastic ``(n+1, n+1)`` class transition matrix.

    A genotype in class ``k`` flips ``j`` of its ``k`` wrong bits back and
    ``i`` of its ``n - k`` correct bits away, landing in class ``k - j + i``.
    Column ``k`` is therefore the convolution of the two binomial laws.
    """
    if n < 1:
        raise ConfigurationError(f"genotype length must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"mutation probability must be in [0, 1], got {p}")
    out = np.empty((n + 1, n + 1))
    for k in range(n + 1):
        back = _binom_pmf(k, p)  # index j
        away = _binom_pmf(n - k, p)  # index i
        # reversing ``back`` indexes it by k - j, so the convolution index is k - j + i = l
        out[:, k] = np.convolve(back[::-1], away)
    return out


def genotype_mutation_matrix(n: int, p: float) -> np.ndarray:
    """Full ``2**n x 2**n`` per-bit mutation matrix; small ``n`` only."""
    if n > 12:
        raise ConfigurationError(f"genotype-level matrix is limited to n <= 12, got {n}")
    idx = np.arange(1 << n)
    dist = np.array([bin(int(v)).count("1") for v in range(1 << n)])[idx[:, None] ^ idx[None, :]]
    return p**dist * (1.0 - p) ** (n - dist)


def aggregate_by_class(genotype_matrix: np.ndarray, n: int) -> np.ndarray:
    """Collapse a genotype transition matrix to classes, taking all ones as master.

    Each class column uses one representative source genotype; for a
    class-symmetric process any representative gives the same column.
    """
    dim = 1 << n
    ones = np.array([bin(v).count("1") for v in range(dim)])
    cls = n - ones
    out = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        src = int(np.flatnonzero(cls == k)[0])
        np.add.at(out[:, k], cls, genotype_matrix[:, src])
    return out


@dataclass(frozen=True)
class ClassModel:
    n: int
    class_fitness: np.ndarray
    p: float
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        f = np.asarray(self.class_fitness, dtype=np.float64)
        if f.shape != (self.n + 1,):
            raise ConfigurationError(f"class fitness must have length n+1={self.n + 1}, got {f.shape}")
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ConfigurationError("class fitness entries must be finite and > 0")
        object.__setattr__(self, "class_fitness", f)
        object.__setattr__(self, "matrix", class_mutation_matrix(self.n, self.p))

    @classmethod
    def sharp_peak(cls, n: int, sigma: float, p: float) -> "ClassModel":
        f = np.ones(n + 1)
        f[0] = sigma
        return cls(n, f, p)

    def operator(self) -> np.ndarray:
        """Mutation-selection operator ``M @ diag(f)``."""
        return self.matrix * self.class_fitness[None, :]


def neutral_profile(n: int) -> np.ndarray:
    """Class sizes of the uniform genotype distribution, C(n, k) / 2**n."""
    return _binom_pmf(n, 0.5)


def stationary_distribution(
    model: ClassModel, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS
) -> np.ndarray:
    """Stationary class distribution by L1-normalised power iteration.

    Starts from the uniform genotype distribution and iterates
    ``x <- normalize(M @ F @ x)``. When successive iterates contract slowly
    (near the error threshold the spectral gap nearly closes) the operator
    is squared, so later iterates are ``x <- normalize(W**K @ x)`` for
    growing ``K = 2**j``: a subsequence of the plain iteration, reaching the
    same fixed point in far fewer steps. The result is accepted only when a
    single plain step also moves it by less than ``tol``. ``max_iters``
    counts matrix-vector products.
    """
    if not tol > 0:
        raise ConfigurationError(f"tolerance must be > 0, got {tol}")
    w = model.operator()
    a = w
    x = neutral_profile(model.n)
    prev_diff = math.inf
    diff = math.inf
    for _ in range(max_iters):
        y = a @ x
        y /= y.sum()
        diff = float(np.abs(y - x).sum())
        x = y
        if diff < tol:
            z = w @ x
            z /= z.sum()
            if float(np.abs(z - x).sum()) < tol:
                return x
        elif diff > 0.5 * prev_diff:
            a = a @ a
            a /= a.max()
        prev_diff = diff
    raise ConvergenceError("power iteration did not converge", residual=diff, iterations=max_iters)


def exact_threshold(n: int, sigma: float) -> float:
    """Solution of ``sigma * (1 - p)**n = 1``, i.e. ``1 - sigma**(-1/n)``."""
    if not sigma > 1:
        raise ConfigurationError(f"peak height must be > 1, got {sigma}")
    if n < 1:
        raise ConfigurationError(f"genotype length must be >= 1, got {n}")
    return -math.expm1(-math.log(sigma) / n)


def approximate_threshold(n: int, sigma: float) -> float:
    """First-order critical rate ``ln(sigma) / n``."""
    return math.log(sigma) / n


def default_crossing(n: int) -> float:
    """Geometric midpoint between the neutral ratio 1 and full localisation 2**n."""
    return 2.0 ** (n / 2)


@dataclass(frozen=True)
class ThresholdPoint:
    p: float
    master_freq: float
    ratio: float


def master_ratio(n: int, sigma: float, p: float, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> ThresholdPoint:
    """Master-class frequency at ``p`` and its ratio to the neutral (sigma=1) value."""
    freq = stationary_distribution(ClassModel.sharp_peak(n, sigma, p), tol, max_iters)[0]
    base = stationary_distribution(ClassModel.sharp_peak(n, 1.0, p), tol, max_iters)[0]
    return ThresholdPoint(p, float(freq), float(freq / base))


def detect_error_threshold(
    n: int,
    sigma: float,
    tol: float = 1e-6,
    crossing: float | None = None,
    *,
    solver_tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> float:
    """Mutation rate where the master-class enrichment falls to ``crossing``.

    Enrichment is the stationary master-class frequency divided by its
    neutral value at the same ``p``. It equals ``2**n`` at ``p = 0`` and 1 at
    ``p = 0.5`` and decreases in between; bisection on ``(0, 0.5)`` returns
    the crossing to absolute tolerance ``tol``. The default crossing
    ``2**(n/2)`` sits halfway between the two limits on a log scale.
    """
    if not sigma > 1:
        raise ConfigurationError(f"peak height must be > 1, got {sigma}")
    if not tol > 0:
        raise ConfigurationError(f"tolerance must be > 0, got {tol}")
    target = default_crossing(n) if crossing is None else float(crossing)

    def ratio(p: float) -> float:
        return master_ratio(n, sigma, p, solver_tol, max_iters).ratio

    lo, hi = 0.0, 0.5
    r_lo, r_hi = ratio(lo), ratio(hi)
    if not (r_lo > target > r_hi):
        raise DetectionError(
            f"enrichment does not cross {target:g} on [0, 0.5] "
            f"(ratio {r_lo:.4g} at p=0, {r_hi:.4g} at p=0.5) for n={n}, sigma={sigma}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ratio(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_scan(n: int, sigma: float, ps, tol: float = DEFAULT_TOL) -> list[ThresholdPoint]:
    return [master_ratio(n, sigma, float(p), tol) for p in ps]
