"""Random multiscale shear velocity fields.

The building block is a single sinusoidal shear per unit of rescaled
time: on block j the field is phi(t - j) sin(A^j x_c + B^j) e_d, where
phi is a smooth bump supported in (0, 1), the amplitude A^j is uniform
on [1/2, 2], the phase B^j is uniform on [0, 2pi), and (d, c) = (1, 2)
or (2, 1) depending on the shear direction.  Block parameters are drawn
lazily from a counter-based stream keyed on (seed, scale, block), so an
"infinite" field costs nothing to describe and any block can be
rematerialized independently.

Two multiscale assemblies are provided, differing in their scale
schedules and amplitude laws:

  * "u_rho" (rho in (0, 1/2)): amplitude 2^(rho n) at scale n, gaps
    T^{n-1} - T^n = 2^(-(2 + rho/2) n) * ceil(2^((2 - 3 rho / 4) n)),
  * "v_alpha" (alpha < 1/2): amplitude 2^(-alpha n), gaps
    2^(-(2 - 2 alpha - 2/sqrt(n)) n) * ceil(2^((2 - 2 alpha - 3/sqrt(n)) n)).

Scales are truncated to n in [n_min, n_max] and T^{n_max} is placed at
time 0; times are reported relative to this origin.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .seeding import STREAM_FIELD, hash_key, uniform_from_key

TWO_PI = 2.0 * np.pi


def iota(n):
    """Direction index of scale n: odd scales shear e1, even scales e2."""
    n = int(n)
    if n < 1:
        raise ValueError("scale index must be >= 1")
    return 1 + (1 + (-1) ** n) // 2


def push_index(direction):
    """0-based index of the coordinate a shear in `direction` moves."""
    return direction - 1


def read_index(direction):
    """0-based index of the coordinate a shear in `direction` reads."""
    return 2 - direction


@lru_cache(maxsize=8)
def _bump_normalizer(sharpness):
    def raw(t):
        return math.exp(-sharpness / (t * (1.0 - t)))

    integral, err = quad(raw, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    if err > 1e-11:
        raise RuntimeError("bump normalization quadrature did not converge")
    return 1.0 / integral


@dataclass(frozen=True)
class BumpProfile:
    """Smooth unit-mass bump c * exp(-s / (t (1 - t))) on (0, 1).

    The normalizer c is fixed at construction so the integral is 1; the
    constructor rejects sharpness values whose sup exceeds 2.
    """

    sharpness: float = 0.1

    def __post_init__(self):
        if not self.sharpness > 0:
            raise ValueError("sharpness must be > 0")
        c = _bump_normalizer(float(self.sharpness))
        # the profile peaks at t = 1/2 where t(1-t) is maximal
        if c * math.exp(-4.0 * self.sharpness) > 2.0:
            raise ValueError("sharpness violates the sup bound |phi| <= 2")

    @property
    def normalizer(self):
        return _bump_normalizer(float(self.sharpness))

    @property
    def sup(self):
        return self.normalizer * math.exp(-4.0 * self.sharpness)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        inside = (t > 0.0) & (t < 1.0)
        tt = np.where(inside, t, 0.5)
        with np.errstate(over="ignore"):
            out = np.where(inside, np.exp(-self.sharpness / (tt * (1.0 - tt))), 0.0)
        return self.normalizer * out


@dataclass(frozen=True)
class ShearBlock:
    """Realized parameters of one shear block."""

    n: int
    j: int
    amplitude: float
    phase: float
    direction: int

    def __post_init__(self):
        if not 0.5 <= self.amplitude <= 2.0:
            raise ValueError("amplitude must lie in [1/2, 2]")
        if not 0.0 <= self.phase < TWO_PI:
            raise ValueError("phase must lie in [0, 2pi)")
        if self.direction not in (1, 2):
            raise ValueError("direction must be 1 or 2")


def _block_uniforms(seed, n, j):
    """Two independent-in-distribution uniforms keyed on (seed, n, j)."""
    key = hash_key(seed, STREAM_FIELD, n, j)
    return uniform_from_key(key, 1), uniform_from_key(key, 2)


def block_amplitude_phase(seed, n, j):
    """Amplitude/phase arrays for blocks keyed by (seed, n, j).

    Any of seed, n, j may be arrays; they broadcast together.  Identical
    inputs give identical outputs.
    """
    u1, u2 = _block_uniforms(seed, n, j)
    return 0.5 + 1.5 * u1, TWO_PI * u2


@dataclass(frozen=True)
class ScaleSchedule:
    """Scale band boundaries T^n for one of the two field families.

    kind "u_rho" takes exponent rho in (0, 1/2); kind "v_alpha" takes
    exponent alpha < 1/2.  Bands are simulated for n in [n_min, n_max],
    T^{n_max} = 0, and T^{n-1} = T^n + gap(n); time thus runs over
    [0, T^{n_min - 1}) with scale n active on [T^n, T^{n-1}).
    """

    kind: str
    exponent: float
    n_min: int
    n_max: int

    def __post_init__(self):
        if self.kind == "u_rho":
            if not 0.0 < self.exponent < 0.5:
                raise ValueError("u_rho exponent must lie in (0, 1/2)")
        elif self.kind == "v_alpha":
            if not self.exponent < 0.5:
                raise ValueError("v_alpha exponent must be < 1/2")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not (1 <= self.n_min <= self.n_max):
            raise ValueError("need 1 <= n_min <= n_max")
        ns = np.arange(self.n_max, self.n_min - 1, -1)
        gaps = np.array([self.gap(int(n)) for n in ns])
        # times[k] = T^{n_max - k}; ascending in time as n descends
        times = np.concatenate([[0.0], np.cumsum(gaps)])
        times.setflags(write=False)
        object.__setattr__(self, "_times", times)

    def _check_scale(self, n):
        if not self.n_min <= n <= self.n_max:
            raise ValueError(f"scale {n} outside simulated range [{self.n_min}, {self.n_max}]")

    def block_count(self, n):
        """Number of unit blocks in the band of scale n (the ceil factor)."""
        self._check_scale(n)
        if self.kind == "u_rho":
            return int(np.ceil(2.0 ** ((2.0 - 0.75 * self.exponent) * n)))
        r = 1.0 / math.sqrt(n)
        return int(np.ceil(2.0 ** ((2.0 - 2.0 * self.exponent - 3.0 * r) * n)))

    def time_rate(self, n):
        """Rescaled time units per physical time unit inside scale n."""
        self._check_scale(n)
        if self.kind == "u_rho":
            return 2.0 ** ((2.0 + 0.5 * self.exponent) * n)
        return 2.0 ** ((2.0 - 2.0 * self.exponent - 2.0 / math.sqrt(n)) * n)

    def block_width(self, n):
        """Physical width of one block inside scale n."""
        return 1.0 / self.time_rate(n)

    def gap(self, n):
        """Band width T^{n-1} - T^n (block count times block width)."""
        return self.block_count(n) * self.block_width(n)

    def amplitude(self, n):
        self._check_scale(n)
        if self.kind == "u_rho":
            return 2.0 ** (self.exponent * n)
        return 2.0 ** (-self.exponent * n)

    def space_factor(self, n):
        self._check_scale(n)
        return 2.0**n

    def push_factor(self, n):
        """Rescaling of the sheared coordinate; equals time_rate / amplitude."""
        return self.time_rate(n) / self.amplitude(n)

    def time_of(self, n):
        """T^n for n in [n_min - 1, n_max]."""
        if not self.n_min - 1 <= n <= self.n_max:
            raise ValueError(f"T^{n} is outside the simulated schedule")
        return float(self._times[self.n_max - n])

    @property
    def t_start(self):
        return self.time_of(self.n_max)

    @property
    def t_end(self):
        return self.time_of(self.n_min - 1)

    def scale_of(self, t):
        """The unique n with t in [T^n, T^{n-1}); errors outside the span."""
        if t < self.t_start or t >= self.t_end:
            raise ValueError(f"time {t} outside the simulated span")
        k = int(np.searchsorted(self._times, t, side="right")) - 1
        return self.n_max - k

    def scales_descending_time(self):
        """Scales in ascending-time order: n_max, n_max - 1, ..., n_min."""
        return range(self.n_max, self.n_min - 1, -1)


@dataclass(frozen=True)
class FieldSpec:
    """Seed-deterministic description of one realized multiscale field."""

    schedule: ScaleSchedule
    seed: int
    bump: BumpProfile = BumpProfile()

    def shear_params(self, n, j):
        """The ShearBlock for block j of scale n; pure in (spec, n, j)."""
        self.schedule._check_scale(n)
        if j < 0:
            raise ValueError("block index must be >= 0")
        amp, phase = block_amplitude_phase(self.seed, n, j)
        return ShearBlock(n=int(n), j=int(j), amplitude=float(amp), phase=float(phase), direction=iota(n))

    def block_params(self, n):
        """Callable j -> (A, B) for scale n; accepts scalar or array j."""
        def params(j):
            return block_amplitude_phase(self.seed, n, j)

        return params

    def eval(self, t, x):
        return eval_field(self, t, x)

    def to_json(self):
        sched = self.schedule
        return json.dumps(
            {
                "kind": sched.kind,
                "exponent": sched.exponent,
                "seed": int(self.seed),
                "s": self.bump.sharpness,
                "n_min": sched.n_min,
                "n_max": sched.n_max,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, doc):
        d = json.loads(doc) if isinstance(doc, str) else dict(doc)
        return cls(
            schedule=ScaleSchedule(kind=d["kind"], exponent=d["exponent"], n_min=d["n_min"], n_max=d["n_max"]),
            seed=int(d["seed"]),
            bump=BumpProfile(sharpness=d.get("s", 0.1)),
        )

    def stable_hash(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RawShearField:
    """The unrescaled single-shear field on unit blocks t in [j, j+1).

    This is the object the single-scale separation estimate is stated
    for; the multiscale field restricted to one band reduces to it after
    rescaling.  `amplitude_factor` scales the whole field (1 matches the
    construction; other values support linearity checks).
    """

    direction: int
    seed: int
    bump: BumpProfile = BumpProfile()
    amplitude_factor: float = 1.0

    def __post_init__(self):
        if self.direction not in (1, 2):
            raise ValueError("direction must be 1 or 2")

    def block_params(self, j):
        return block_amplitude_phase(self.seed, 0, j)

    def eval(self, t, x):
        v = eval_V(self.direction, self.block_params, t, x, bump=self.bump)
        return self.amplitude_factor * v


def eval_V(direction, blocks, t, x, bump=None):
    """Evaluate the alternating-shear building block at (t, x).

    Args:
      direction: 1 shears e1 reading x2; 2 shears e2 reading x1.
      blocks: callable j -> (A, B) or an object with .block_params.
      t: time >= 0 (one block is active since the bump lives in (0, 1)).
      x: point in the plane.
      bump: BumpProfile, defaults to the standard profile.

    Returns a length-2 velocity vector.
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    bump = bump or BumpProfile()
    if direction not in (1, 2):
        raise ValueError("direction must be 1 or 2")
    j = int(math.floor(t))
    amp, phase = blocks(j)
    read = 1 if direction == 1 else 0
    push = direction - 1
    out = np.zeros(2)
    out[push] = bump(t - j) * math.sin(float(amp) * float(x[read]) + float(phase))
    return out


def eval_field(spec, t, x):
    """Evaluate the multiscale field of `spec` at physical (t, x).

    Locates the unique active scale n with t in [T^n, T^{n-1}), applies
    the band's exact time/space rescaling, and delegates to eval_V.
    """
    sched = spec.schedule
    n = sched.scale_of(t)
    tau = sched.time_rate(n) * (t - sched.time_of(n))
    xs = sched.space_factor(n) * np.asarray(x, dtype=np.float64)
    v = eval_V(iota(n), spec.block_params(n), tau, xs, bump=spec.bump)
    return sched.amplitude(n) * v


def holder_norm_field(spec, t, alpha, grid):
    """Sup norm plus discrete alpha-Holder seminorm of x -> u(t, x).

    The field at fixed t depends on a single coordinate, so `grid` is a
    1-D array of samples of that coordinate.  It must resolve the active
    block's spatial period 2pi / (A 2^n) with at least 16 nodes.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    sched = spec.schedule
    n = sched.scale_of(t)
    tau = sched.time_rate(n) * (t - sched.time_of(n))
    j = int(math.floor(tau))
    amp, phase = block_amplitude_phase(spec.seed, n, j)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-D array with at least 2 nodes")
    period = TWO_PI / (float(amp) * sched.space_factor(n))
    spacing = np.max(np.diff(np.sort(grid)))
    if grid.size < 16 or spacing > period / 16.0:
        raise ValueError("grid too coarse: need at least 16 nodes per spatial period")
    profile = sched.amplitude(n) * spec.bump(tau - j) * np.sin(
        float(amp) * sched.space_factor(n) * grid + float(phase)
    )
    sup = float(np.max(np.abs(profile)))
    if alpha == 0.0:
        return sup
    g = np.sort(grid)
    prof = sched.amplitude(n) * spec.bump(tau - j) * np.sin(
        float(amp) * sched.space_factor(n) * g + float(phase)
    )
    semi = 0.0
    for lag in range(1, g.size):
        num = np.abs(prof[lag:] - prof[:-lag])
        den = (g[lag:] - g[:-lag]) ** alpha
        semi = max(semi, float(np.max(num / den)))
    return sup + semi


def negative_holder_upper_bound(spec, t, rho):
    """Upper bound for the negative-Holder norm of u(t, .) via an
    explicit matrix primitive.

    For the active block shearing e_d at frequency w = A 2^n, the matrix
    field with single entry g_{d,c} = -amp * phi * cos(w x_c + B) / w has
    divergence equal to the field, so the C^{1-rho} norm of g bounds the
    C^{-rho} norm of u(t, .) from above.  Sup and seminorm of K cos(w x)
    are bounded analytically: K + K * 2^rho * w^(1-rho).
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    sched = spec.schedule
    if sched.kind != "u_rho":
        raise ValueError("the negative-norm certificate applies to u_rho fields")
    n = sched.scale_of(t)
    tau = sched.time_rate(n) * (t - sched.time_of(n))
    j = int(math.floor(tau))
    phi_val = float(spec.bump(tau - j))
    if phi_val == 0.0:
        return 0.0
    amp_block, _ = block_amplitude_phase(spec.seed, n, j)
    freq = float(amp_block) * sched.space_factor(n)
    k = sched.amplitude(n) * phi_val / freq
    return k * (1.0 + 2.0**rho * freq ** (1.0 - rho))


def l1_time_c0_norm(spec, quad_nodes=64):
    """Numeric L^1-in-time C^0-in-space norm over the simulated scales.

    Per block the sup over x of |u| is amplitude(n) * phi(tau - j), so
    the integral reduces to a quadrature of the bump per block.
    """
    from numpy.polynomial.legendre import leggauss

    xg, wg = leggauss(quad_nodes)
    u = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    phi_int = float(np.sum(w * spec.bump(u)))
    sched = spec.schedule
    total = 0.0
    for n in sched.scales_descending_time():
        total += sched.amplitude(n) * sched.block_count(n) / sched.time_rate(n) * phi_int
    return total


def l1_time_c0_bound(spec):
    """The closed-form envelope 2 sup(phi) sum over simulated scales of
    2^(-rho n / 4) that dominates the numeric time-regularity ledger."""
    sched = spec.schedule
    if sched.kind != "u_rho":
        raise ValueError("the time-regularity envelope is stated for u_rho fields")
    ns = np.arange(sched.n_min, sched.n_max + 1, dtype=np.float64)
    return 2.0 * spec.bump.sup * float(np.sum(2.0 ** (-sched.exponent * ns / 4.0)))


def golden_probes(spec, count=20):
    """Deterministic (t, x) probes with field values, for golden-file pins."""
    sched = spec.schedule
    key = int(spec.stable_hash(), 16)
    u1 = uniform_from_key(hash_key(key, 0xF00D), np.arange(count))
    u2 = uniform_from_key(hash_key(key, 0xBEEF), np.arange(count))
    u3 = uniform_from_key(hash_key(key, 0xCAFE), np.arange(count))
    t = sched.t_start + u1 * (sched.t_end - sched.t_start) * (1.0 - 1e-9)
    rows = []
    for k in range(count):
        x = np.array([-2.0 + 4.0 * u2[k], -2.0 + 4.0 * u3[k]])
        v = eval_field(spec, float(t[k]), x)
        rows.append({"t": float(t[k]), "x": [float(x[0]), float(x[1])], "v": [float(v[0]), float(v[1])]})
    return rows
