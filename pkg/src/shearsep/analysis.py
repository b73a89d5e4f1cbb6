"""Closed-form probability bounds, statistical tests, and the
diagonal-free quantile coupling.

Bound formulas are evaluated exactly as stated; they may exceed 1 at
reachable scales, so callers get the raw value plus a clamped value and
a vacuity flag.  The coupling pairs quantiles at offset 1/2 on a uniform
grid, reproducing both marginals exactly for empirical measures while
placing no mass on the diagonal when no atom exceeds mass 1/2.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr


# ---------------------------------------------------------------------------
# bound and threshold formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleScale:
    """P(|horizontal separation at time N| <= L) <= (2L + 640) / sqrt(N)."""

    L: float
    N: int

    def value(self):
        if self.L < 0 or self.N < 1:
            raise ValueError("need L >= 0 and N >= 1")
        return (2.0 * self.L + 640.0) * self.N ** -0.5


@dataclass(frozen=True)
class RescaledURho:
    """One-band trapping bound 64 * 2^(-rho n / 8)."""

    rho: float
    n: int

    def value(self):
        _check_rho(self.rho)
        return 64.0 * 2.0 ** (-self.rho * self.n / 8.0)


@dataclass(frozen=True)
class RescaledVAlpha:
    """One-band trapping bound 64 * 2^(-sqrt(n) / 2)."""

    n: int

    def value(self):
        return 64.0 * 2.0 ** (-math.sqrt(self.n) / 2.0)


@dataclass(frozen=True)
class MultiURho:
    """Multiscale trapping bound 768 / rho * 2^(-rho n / 8)."""

    rho: float
    n: int

    def value(self):
        _check_rho(self.rho)
        return 768.0 / self.rho * 2.0 ** (-self.rho * self.n / 8.0)


@dataclass(frozen=True)
class MultiVAlpha:
    """Multiscale trapping bound 512 * 2^(-sqrt(n) / 4)."""

    n: int

    def value(self):
        return 512.0 * 2.0 ** (-math.sqrt(self.n) / 4.0)


@dataclass(frozen=True)
class ThresholdURho:
    """Minimal admissible scale 32/rho + (8/rho) log2 ||W||."""

    rho: float
    w_norm: float


@dataclass(frozen=True)
class ThresholdVAlpha:
    """Minimal admissible scale for the general-noise field."""

    alpha: float
    beta: float
    w_norm: float


def _check_rho(rho):
    if not 0.0 < rho < 0.5:
        raise ValueError("rho must lie in (0, 1/2)")


def bound_value(kind):
    """Exact evaluation of a separation-probability bound (may exceed 1)."""
    if not hasattr(kind, "value"):
        raise ValueError(f"{type(kind).__name__} is not a probability bound")
    return kind.value()


def bound_row(kind):
    """(raw, clamped, vacuous) triple for honest reporting."""
    raw = bound_value(kind)
    return raw, min(raw, 1.0), raw >= 1.0


def threshold_n(kind):
    """The smallest integer scale at which the one-band estimates apply."""
    if isinstance(kind, ThresholdURho):
        _check_rho(kind.rho)
        if not kind.w_norm > 0:
            raise ValueError("noise norm must be positive")
        raw = 32.0 / kind.rho + 8.0 / kind.rho * math.log2(kind.w_norm)
        return max(1, int(math.ceil(raw)))
    if isinstance(kind, ThresholdVAlpha):
        if not kind.alpha < 0.5:
            raise ValueError("alpha must be < 1/2")
        if not 0.0 < kind.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        margin = 2.0 * kind.beta * (1.0 - kind.alpha) - 1.0
        if margin <= 0.0:
            raise ValueError("beta <= 1 / (2 (1 - alpha)): the estimate gives nothing")
        if not kind.w_norm > 0:
            raise ValueError("noise norm must be positive")
        raw = max(
            (4.0 * kind.beta / margin) ** 2,
            (8.0 + 2.0 * math.log2(kind.w_norm)) / margin,
            64.0,
        )
        return int(math.ceil(raw))
    raise ValueError(f"{type(kind).__name__} is not a threshold kind")


def bound_table_csv(kinds, path):
    """Write bound evaluations as CSV kind,params,raw_bound,clamped,vacuous."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "params", "raw_bound", "clamped", "vacuous"])
        for kind in kinds:
            raw, clamped, vac = bound_row(kind)
            params = ";".join(f"{k}={v}" for k, v in vars(kind).items())
            writer.writerow([type(kind).__name__, params, f"{raw:.17g}", f"{clamped:.17g}", int(vac)])


# ---------------------------------------------------------------------------
# empirical distributions and tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample values with uniform weights."""

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=np.float64).ravel())
        if v.size < 1:
            raise ValueError("need at least one sample")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def weights(self):
        return np.full(len(self), 1.0 / len(self))

    def max_atom_mass(self):
        _, counts = np.unique(self.values, return_counts=True)
        return counts.max() / len(self)


def ks_statistic(samples, cdf):
    """One-sample Kolmogorov-Smirnov statistic against a reference CDF.

    The sup of |ECDF - CDF| over the line is attained at sample points,
    comparing the reference against both the left and right ECDF limits.
    """
    if isinstance(samples, EmpiricalDistribution):
        x = samples.values
    else:
        x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    f = np.asarray(cdf(x), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def ks_two_sample(x, y):
    """Two-sample KS statistic."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    allv = np.concatenate([x, y])
    cx = np.searchsorted(x, allv, side="right") / x.size
    cy = np.searchsorted(y, allv, side="right") / y.size
    return float(np.max(np.abs(cx - cy)))


def ks_critical_value(n, alpha=0.01):
    """Asymptotic one-sample KS critical value at level alpha."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def standard_normal_cdf(x):
    return ndtr(x)


def mann_kendall(series):
    """Mann-Kendall trend statistic S and its normal z-score.

    S sums the signs of forward differences over all pairs; the variance
    uses the tie-corrected formula.  z is 0 when S is 0.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    s = 0
    for i in range(n - 1):
        s += int(np.sum(np.sign(x[i + 1 :] - x[i])))
    _, counts = np.unique(x, return_counts=True)
    var = (n * (n - 1) * (2 * n + 5) - np.sum(counts * (counts - 1) * (2 * counts + 5))) / 18.0
    if var <= 0:
        return s, 0.0
    if s > 0:
        z = (s - 1) / math.sqrt(var)
    elif s < 0:
        z = (s + 1) / math.sqrt(var)
    else:
        z = 0.0
    return s, float(z)


def no_increasing_trend(series, level=0.05):
    """True iff the Mann-Kendall z-score shows no significant increase
    at the given level."""
    from scipy.special import ndtri

    _, z = mann_kendall(series)
    return z <= float(ndtri(1.0 - level))


# ---------------------------------------------------------------------------
# quantile coupling
# ---------------------------------------------------------------------------

def half_shift(z):
    """The measure-preserving circle shift z -> z + 1/2 mod 1."""
    return np.mod(np.asarray(z, dtype=np.float64) + 0.5, 1.0)


@dataclass(frozen=True)
class CouplingResult:
    """Output of the offset-1/2 quantile coupling on a uniform grid."""

    pairs: np.ndarray            # (M, 2) coupled values, each row weight 1/M
    diagonal_mass: float
    atom_violation: bool         # an atom of mass > 1/2 voids the guarantee
    embedding: tuple             # (lo, hi) affine embedding used

    @property
    def grid_size(self):
        return self.pairs.shape[0]


def quantile_coupling(mu, grid_size=None):
    """Couple mu with itself via (Q(z), Q(z + 1/2 mod 1)) on a midpoint grid.

    Both marginals reproduce mu exactly as empirical measures on the
    grid (the default grid size is twice the sample count, so every atom
    receives an integer number of grid points).  If mu has no atom of
    mass greater than 1/2, no pair lies on the diagonal.

    The support is affinely embedded into [0, 1]; the embedding is
    recorded and inverted before returning, so pairs are in original
    coordinates.
    """
    if not isinstance(mu, EmpiricalDistribution):
        mu = EmpiricalDistribution(np.asarray(mu))
    n = len(mu)
    m = 2 * n if grid_size is None else int(grid_size)
    if m % (2 * n) != 0:
        raise ValueError("grid size must be a multiple of twice the sample count")
    lo, hi = float(mu.values[0]), float(mu.values[-1])
    z = (np.arange(m) + 0.5) / m
    # quantile of the empirical measure: Q(p) = values[ceil(p n) - 1]
    idx = np.minimum((z * n).astype(np.int64), n - 1)
    shifted_idx = np.minimum((half_shift(z) * n).astype(np.int64), n - 1)
    left = mu.values[idx]
    right = mu.values[shifted_idx]
    pairs = np.column_stack([left, right])
    diag = float(np.mean(left == right))
    return CouplingResult(
        pairs=pairs,
        diagonal_mass=diag,
        atom_violation=bool(mu.max_atom_mass() > 0.5),
        embedding=(lo, hi),
    )
