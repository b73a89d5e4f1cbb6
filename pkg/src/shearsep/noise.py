"""Driving-noise paths on uniform time grids.

A path is a sampled continuous function W: [t0, t0 + (n-1) dt] -> R^2 with
a declared piecewise-linear interpolation rule.  The module provides

  * exact samplers: Brownian motion and fractional Brownian motion
    (circulant embedding of the increment covariance, dense Cholesky
    fallback when the embedding is not nonnegative definite),
  * deterministic Holder test paths,
  * a grid-based Holder seminorm estimate (a lower bound of the true
    norm; callers that need an upper bound apply a safety factor),
  * the per-unit-block oscillation gate on the second component that the
    single-scale separation estimate assumes of its driving noise,
  * the time/space rescaling map used to reduce one multiscale band to
    the unit-block problem.

All samplers are pure functions of (seed, shape parameters): identical
arguments give bit-identical paths.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .seeding import derive_seed

#: Largest grid size for which the dense Cholesky fallback is attempted.
CHOLESKY_CAP = 2**14

#: Eigenvalues of the circulant embedding more negative than this reject
#: the embedding; small negatives above it are clipped to zero.
EMBED_TOL = -1e-10

#: Oscillation threshold of the per-block fluctuation condition.
FLUCTUATION_BOUND = 1.0 / 16.0


@dataclass(frozen=True)
class NoisePath:
    """A sampled plane-valued path on a uniform grid.

    Attributes:
      t0: start time.
      dt: grid step, > 0.
      values: (n, 2) array, one point per grid node; n >= 2.
      interpolation: only "piecewise-linear" is supported.
    """

    t0: float
    dt: float
    values: np.ndarray
    interpolation: str = "piecewise-linear"

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 2 or vals.shape[1] != 2 or vals.shape[0] < 2:
            raise ValueError("values must be an (n, 2) array with n >= 2")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.interpolation != "piecewise-linear":
            raise ValueError(f"unsupported interpolation {self.interpolation!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self):
        return self.values.shape[0]

    @property
    def t_end(self):
        return self.t0 + (len(self) - 1) * self.dt

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self))

    def eval(self, t):
        """Evaluate the interpolated path at scalar or array times.

        Raises ValueError for times outside [t0, t_end] (up to a 1e-9 dt
        rounding slack, clamped back onto the span).
        """
        t = np.asarray(t, dtype=np.float64)
        slack = 1e-9 * self.dt
        if np.any(t < self.t0 - slack) or np.any(t > self.t_end + slack):
            raise ValueError("evaluation time outside the path span")
        u = np.clip((t - self.t0) / self.dt, 0.0, len(self) - 1.0)
        i = np.minimum(u.astype(np.int64), len(self) - 2)
        frac = u - i
        out = self.values[i] + frac[..., None] * (self.values[i + 1] - self.values[i])
        return out

    @classmethod
    def zero(cls, t0=0.0, dt=1.0, n=2):
        return cls(t0=t0, dt=dt, values=np.zeros((n, 2)))

    def to_csv(self, path):
        """Write the path as CSV with header t,w1,w2 at full precision."""
        rows = np.column_stack([self.times, self.values])
        np.savetxt(path, rows, fmt="%.17g", delimiter=",", header="t,w1,w2", comments="")

    @classmethod
    def from_csv(cls, path):
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t = rows[:, 0]
        dt = t[1] - t[0]
        if not np.allclose(np.diff(t), dt, rtol=0, atol=1e-9 * abs(dt)):
            raise ValueError("CSV grid is not uniform")
        return cls(t0=t[0], dt=dt, values=rows[:, 1:3])


@dataclass(frozen=True)
class NoiseKind:
    """Tagged description of a driving-noise law.

    kind is one of "brownian", "fbm", "zero", "holder".  fbm carries a
    Hurst parameter in (0, 1); holder carries an exponent in (0, 1] and
    an amplitude.  `scale` multiplies the sampled values (a scaled
    Brownian motion is Brownian motion with a different diffusivity).
    """

    kind: str
    hurst: float = 0.5
    beta: float = 1.0
    amplitude: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("brownian", "fbm", "zero", "holder"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "fbm" and not 0.0 < self.hurst < 1.0:
            raise ValueError("Hurst parameter must lie in (0, 1)")
        if self.kind == "holder" and not 0.0 < self.beta <= 1.0:
            raise ValueError("Holder exponent must lie in (0, 1]")

    @classmethod
    def brownian(cls, scale=1.0):
        return cls(kind="brownian", scale=scale)

    @classmethod
    def fbm(cls, hurst, scale=1.0):
        return cls(kind="fbm", hurst=hurst, scale=scale)

    @classmethod
    def zero(cls):
        return cls(kind="zero")

    @classmethod
    def deterministic_holder(cls, beta, amplitude=1.0):
        return cls(kind="holder", beta=beta, amplitude=amplitude)

    def sample(self, seed, t0, dt, n):
        """Sample a path of this kind; pure in (seed, t0, dt, n)."""
        if self.kind == "brownian":
            w = sample_brownian(seed, t0, dt, n)
        elif self.kind == "fbm":
            w = sample_fbm(seed, self.hurst, t0, dt, n)
        elif self.kind == "zero":
            return NoisePath.zero(t0=t0, dt=dt * (n - 1), n=2)
        else:
            return sample_deterministic_holder(self.beta, self.amplitude, t0, dt, n)
        if self.scale != 1.0:
            return NoisePath(t0=w.t0, dt=w.dt, values=self.scale * w.values)
        return w


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 128) - 1)))


def _check_grid_args(n, dt):
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    if not dt > 0:
        raise ValueError("dt must be > 0")


def sample_brownian(seed, t0, dt, n):
    """Sample standard planar Brownian motion started at the origin.

    Increments are independent N(0, dt) per component; W_{t0} = 0.
    """
    _check_grid_args(n, dt)
    rng = _rng(derive_seed(seed, 0x42))
    inc = rng.standard_normal((int(n) - 1, 2)) * np.sqrt(dt)
    vals = np.vstack([np.zeros((1, 2)), np.cumsum(inc, axis=0)])
    return NoisePath(t0=t0, dt=dt, values=vals)


def fbm_covariance(hurst, times):
    """Exact per-component covariance matrix 0.5 (t^2H + s^2H - |t-s|^2H).

    `times` are elapsed times from the start of the path.
    """
    t = np.asarray(times, dtype=np.float64)
    tt = np.abs(t[:, None]) ** (2 * hurst) + np.abs(t[None, :]) ** (2 * hurst)
    return 0.5 * (tt - np.abs(t[:, None] - t[None, :]) ** (2 * hurst))


def _fgn_embedding_eigs(hurst, m):
    """FFT eigenvalues of the circulant embedding of the unit-step fGn
    autocovariance, padded to the next power of two >= m."""
    size = 1
    while size < m:
        size *= 2
    k = np.arange(size + 1, dtype=np.float64)
    gamma = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    first_row = np.concatenate([gamma[: size + 1], gamma[size - 1 : 0 : -1]])
    return np.fft.fft(first_row).real, size


def _fgn_circulant(rng, eigs, size, m):
    """One exact fractional Gaussian noise vector of length m."""
    two_m = 2 * size
    z = np.empty(two_m, dtype=np.complex128)
    z[0] = rng.standard_normal()
    z[size] = rng.standard_normal()
    u = rng.standard_normal((size - 1, 2))
    z[1:size] = (u[:, 0] + 1j * u[:, 1]) / np.sqrt(2.0)
    z[size + 1 :] = np.conj(z[1:size][::-1])
    w = np.fft.ifft(np.sqrt(eigs.astype(np.complex128)) * z)
    return np.sqrt(two_m) * w.real[:m]


def sample_fbm(seed, hurst, t0, dt, n):
    """Sample planar fBm with the exact grid law, components independent.

    Uses circulant embedding of the stationary increment covariance; if
    the embedding has eigenvalues below EMBED_TOL the sampler falls back
    to a dense Cholesky factor, capped at CHOLESKY_CAP grid points.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError("Hurst parameter must lie in (0, 1)")
    _check_grid_args(n, dt)
    n = int(n)
    m = n - 1
    rng = _rng(derive_seed(seed, 0x46))
    eigs, size = _fgn_embedding_eigs(hurst, m)
    if eigs.min() >= EMBED_TOL:
        eigs = np.clip(eigs, 0.0, None)
        steps = np.stack([_fgn_circulant(rng, eigs, size, m) for _ in range(2)], axis=1)
    elif n <= CHOLESKY_CAP:
        k = np.arange(m, dtype=np.float64)
        gamma = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
        idx = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
        chol = np.linalg.cholesky(gamma[idx])
        steps = chol @ rng.standard_normal((m, 2))
    else:
        raise CapacityError(
            f"circulant embedding failed for H={hurst} and n={n} exceeds the dense fallback cap"
        )
    vals = np.vstack([np.zeros((1, 2)), np.cumsum(steps * dt**hurst, axis=0)])
    return NoisePath(t0=t0, dt=dt, values=vals)


def sample_deterministic_holder(beta, amplitude, t0, dt, n):
    """Deterministic test path W(t) = (amplitude * (t - t0)^beta, 0)."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("Holder exponent must lie in (0, 1]")
    _check_grid_args(n, dt)
    tau = dt * np.arange(int(n))
    vals = np.column_stack([amplitude * tau**beta, np.zeros(int(n))])
    return NoisePath(t0=t0, dt=dt, values=vals)


def holder_seminorm(path, beta, window=None):
    """Discrete beta-Holder seminorm of a path over grid pairs.

    Returns max over grid pairs (s, t), s != t, inside `window` of
    |W_t - W_s| / |t - s|^beta, with |.| the Euclidean norm on R^2.
    This is a lower bound of the continuum seminorm; thresholds that
    need an upper bound should multiply by a safety factor.

    Args:
      path: NoisePath.
      beta: exponent in (0, 1].
      window: optional (a, b) time interval inside the path span.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    vals = path.values
    times = path.times
    if window is not None:
        a, b = window
        slack = 1e-9 * path.dt
        if a >= b or a < path.t0 - slack or b > path.t_end + slack:
            raise ValueError("window must be a nonempty interval inside the path span")
        keep = (times >= a - slack) & (times <= b + slack)
        vals = vals[keep]
        if vals.shape[0] < 2:
            raise ValueError("window contains fewer than two grid nodes")
    m = vals.shape[0]
    best = 0.0
    for lag in range(1, m):
        d = vals[lag:] - vals[:-lag]
        num = np.sqrt(np.max(d[:, 0] ** 2 + d[:, 1] ** 2))
        best = max(best, num / (lag * path.dt) ** beta)
    return float(best)


def block_oscillations(path, n_blocks, component=1):
    """Oscillation of one component on each unit block [k, k+1), k < n_blocks.

    The path must span [0, n_blocks].  Oscillations are taken over grid
    nodes inside the block plus the interpolated block endpoints, which
    is exact for the piecewise-linear interpolant.
    """
    n_blocks = int(n_blocks)
    if n_blocks < 1:
        raise ValueError("need at least one block")
    slack = 1e-9 * path.dt
    if path.t0 > slack or path.t_end < n_blocks - slack:
        raise ValueError(f"path does not span [0, {n_blocks}]")
    times = path.times
    comp = path.values[:, component]
    osc = np.empty(n_blocks)
    for k in range(n_blocks):
        lo, hi = float(k), float(k + 1)
        inside = comp[(times > lo) & (times < hi)]
        ends = path.eval(np.array([lo, hi]))[:, component]
        block = np.concatenate([ends, inside])
        osc[k] = block.max() - block.min()
    return osc


def fluctuation_check(path, n_blocks, component=1):
    """True iff one component (by default the second, the coordinate a
    horizontal shear reads) oscillates by at most 1/16 on every unit
    block [k, k+1] with k < n_blocks.

    Problems sheared in the other direction pass the read coordinate's
    index explicitly.
    """
    return bool(np.all(block_oscillations(path, n_blocks, component=component) <= FLUCTUATION_BOUND))


def resample_rescaled(path, t_origin, time_rate, factors, dt_out, n_out):
    """Resample the rescaled path  t |-> factors * (W(t_origin + t/time_rate)
    - W(t_origin))  on a fresh uniform grid.

    Exact for the declared piecewise-linear interpolation.  Used to map
    one band of the multiscale schedule onto the unit-block problem.

    Args:
      path: source NoisePath.
      t_origin: physical time mapped to rescaled time 0.
      time_rate: rescaled time units per physical time unit.
      factors: length-2 per-component scaling of the values.
      dt_out: output grid step (rescaled time).
      n_out: output node count.
    """
    tau = dt_out * np.arange(int(n_out))
    t_phys = t_origin + tau / time_rate
    base = path.eval(t_origin)
    vals = (path.eval(t_phys) - base) * np.asarray(factors, dtype=np.float64)
    return NoisePath(t0=0.0, dt=dt_out, values=vals)
