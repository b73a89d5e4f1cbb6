"""Coupled particle pairs sharing one noise path and one field realization.

Because both particles see the same additive noise, the noise cancels in
their separation; inside a shear block only the sheared coordinate of
the separation moves, and its per-unit-block increments ("hits") are
independent across blocks since each block draws fresh shear parameters.
This module extracts those hits, their conditional second moments (via
an explicit quadrature oracle), and per-scale separation traces, with
vectorized engines that evolve many trials of the pair at once.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import flow
from .errors import PreconditionError
from .fields import BumpProfile, RawShearField, block_amplitude_phase, iota
from .noise import fluctuation_check


@dataclass(frozen=True)
class PairState:
    """Two particles at a common time, coupled through (spec, W)."""

    t: float
    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        for name in ("x1", "x2"):
            v = np.array(getattr(self, name), dtype=np.float64).reshape(2)
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "t", float(self.t))

    @property
    def separation(self):
        return self.x1 - self.x2


@dataclass(frozen=True)
class HitSequence:
    """Per-unit-block increments of the sheared separation coordinate.

    `hits[k]` is the increment over block k; `second_moments[k]` is the
    quadrature estimate of its conditional second moment given the
    frozen noise sub-path.  `sigma` is the running sum of the second
    moments (the normalization entering the CLT shape check).
    """

    hits: np.ndarray
    second_moments: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.hits, dtype=np.float64)
        m = np.asarray(self.second_moments, dtype=np.float64)
        if h.shape != m.shape or h.ndim != 1:
            raise ValueError("hits and second_moments must be equal-length 1-D arrays")
        object.__setattr__(self, "hits", h)
        object.__setattr__(self, "second_moments", m)

    def __len__(self):
        return self.hits.size

    @property
    def sigma(self):
        return float(np.sum(self.second_moments))

    @property
    def total(self):
        return float(np.sum(self.hits))

    def normalized_sum(self):
        return self.total / math.sqrt(self.sigma)


@dataclass(frozen=True)
class SeparationTrace:
    """Separation of the pair recorded at each scale boundary crossed."""

    scales: np.ndarray        # scale label n of the boundary time T^n
    times: np.ndarray         # T^n
    separations: np.ndarray   # (k, 2) separation vectors
    read_components: np.ndarray  # component along iota(n+1) at each T^n

    def __post_init__(self):
        if not (len(self.scales) == len(self.times) == len(self.separations) == len(self.read_components)):
            raise ValueError("trace columns must have equal length")

    @property
    def magnitudes(self):
        return np.sqrt(np.sum(np.asarray(self.separations) ** 2, axis=1))


@lru_cache(maxsize=32)
def _unit_nodes(cells, nodes):
    """Quadrature nodes/weights on [0, 1] split into `cells` panels."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (x + 1.0) / cells
    base = np.arange(cells)[:, None] / cells
    return (base + u[None, :]).ravel(), np.tile(0.5 * w / cells, cells)


def _read_index(direction):
    return 2 - direction


def _read_noise_nodes(W, component, times):
    if W is None:
        return np.zeros_like(times)
    return W.eval(times)[..., component]


def _effective_chunk(chunk, nodes_k, trials, budget=2 * 10**7):
    """Cap the block chunk so (chunk, nodes, trials) tensors stay bounded."""
    return max(1, min(int(chunk), budget // max(1, nodes_k * trials)))


def evolve_pair(spec, W, pair, t_end, cfg=flow.IntegratorConfig()):
    """Advance both particles with identical (spec, W); reference engine.

    Integrates each particle with `flow.solve` and records the
    separation at every scale boundary T^j crossed (plus the start).
    Returns (final PairState, SeparationTrace).
    """
    s1 = flow.solve(spec, W, flow.ParticleState(t=pair.t, x=pair.x1), t_end, cfg)
    s2 = flow.solve(spec, W, flow.ParticleState(t=pair.t, x=pair.x2), t_end, cfg)
    sched = spec.schedule
    boundary_times = {sched.time_of(n): n for n in range(sched.n_min - 1, sched.n_max + 1)}
    scales, times, seps, reads = [], [], [], []
    for a, b in zip(s1, s2):
        hit = [n for tb, n in boundary_times.items() if abs(a.t - tb) <= 1e-12 * max(1.0, abs(tb))]
        if hit:
            n = hit[0]
            sep = a.x - b.x
            scales.append(n)
            times.append(a.t)
            seps.append(sep)
            reads.append(sep[iota(n + 1) - 1])
    trace = SeparationTrace(
        scales=np.asarray(scales),
        times=np.asarray(times),
        separations=np.asarray(seps).reshape(-1, 2),
        read_components=np.asarray(reads),
    )
    final = PairState(t=s1[-1].t, x1=s1[-1].x, x2=s2[-1].x)
    return final, trace


# ---------------------------------------------------------------------------
# vectorized single-scale (raw shear) engine
# ---------------------------------------------------------------------------

def raw_hits_batch(seeds, W, a1, a2, n_blocks, *, direction=1, amplitude=1.0,
                   bump=None, cells=4, nodes=16, chunk=512, collect=False):
    """Hits of the coupled pair under the raw unit-block shear, batched
    over field seeds sharing one frozen noise path.

    Args:
      seeds: scalar or (T,) field seeds, one per trial.
      W: NoisePath spanning [0, n_blocks], or None for zero noise.
      a1, a2: read-coordinate positions of the two particles (scalars).
      n_blocks: number of unit blocks N.
      direction: 1 or 2 (which coordinate the shear pushes).
      amplitude: overall field amplitude factor.
      collect: when True also return the full (N, T) hit matrix.

    Returns dict with per-trial hit sums `totals` (T,), `max_abs` (the
    largest |hit| seen), `sum_abs3` (T,) for the third-moment ledger,
    and optionally `hits`.
    """
    bump = bump or BumpProfile()
    seeds_arr = np.atleast_1d(np.asarray(seeds))
    trials = seeds_arr.shape[0]
    u, wts = _unit_nodes(cells, nodes)
    phi_w = wts * bump(u)
    read = _read_index(direction)
    totals = np.zeros(trials)
    sum_abs3 = np.zeros(trials)
    max_abs = 0.0
    rows = [] if collect else None
    mid, half = 0.5 * (a1 + a2), 0.5 * (a1 - a2)
    chunk = _effective_chunk(chunk, u.size if W is not None else 1, trials)
    for lo in range(0, int(n_blocks), chunk):
        jj = np.arange(lo, min(lo + chunk, int(n_blocks)))
        A, B = block_amplitude_phase(seeds_arr, 0, jj[:, None])  # (C, T)
        # sin(A a1 + .) - sin(A a2 + .) = 2 sin(A (a1-a2)/2) cos(A mid + .):
        # the noise enters only the cosine factor
        if W is None:
            phi_int = float(np.sum(phi_w))
            d = phi_int * 2.0 * np.sin(A * half) * np.cos(A * mid + B)
        else:
            tnodes = jj[:, None] + u[None, :]
            wread = _read_noise_nodes(W, read, tnodes) - _read_noise_nodes(W, read, 0.0)
            arg = A[:, None, :] * (mid + wread[:, :, None])
            arg += B[:, None, :]
            np.cos(arg, out=arg)
            d = 2.0 * np.sin(A * half) * np.einsum("k,ckt->ct", phi_w, arg)
        d *= amplitude
        totals += d.sum(axis=0)
        sum_abs3 += np.sum(np.abs(d) ** 3, axis=0)
        max_abs = max(max_abs, float(np.max(np.abs(d))))
        if collect:
            rows.append(d)
    out = {"totals": totals, "max_abs": max_abs, "sum_abs3": sum_abs3}
    if collect:
        out["hits"] = np.concatenate(rows, axis=0)
    return out


def _cos_band_integral(c):
    """F(c) = integral of cos(y c) over y in [1/2, 2], analytic in c."""
    c = np.asarray(c, dtype=np.float64)
    small = np.abs(c) < 1e-5
    safe = np.where(small, 1.0, c)
    exact = (np.sin(2.0 * safe) - np.sin(0.5 * safe)) / safe
    series = 1.5 - (21.0 / 16.0) * c * c
    return np.where(small, series, exact)


def moment_d2(a_minus_b, w=None, *, bump=None, cells=4, nodes=16):
    """Conditional second moment of one hit by nested quadrature.

    Evaluates (2/3) * double integral of phi(r) phi(s) * [F(w_s - w_r)
    - F(a_minus_b + w_s - w_r)] dr ds, where F is the analytic integral
    of cos(y c) over the amplitude band y in [1/2, 2].

    Args:
      a_minus_b: read-coordinate separation of the pair.
      w: the block's noise sub-path as (times, values) on [0, 1]
         (piecewise linear), or None for the zero path.
    """
    bump = bump or BumpProfile()
    u, wts = _unit_nodes(cells, nodes)
    phi_w = wts * bump(u)
    if w is None:
        wvals = np.zeros_like(u)
    else:
        wt, wv = w
        wvals = np.interp(u, np.asarray(wt, dtype=np.float64), np.asarray(wv, dtype=np.float64))
    diff = wvals[:, None] - wvals[None, :]
    kernel = _cos_band_integral(diff) - _cos_band_integral(float(a_minus_b) + diff)
    return float((2.0 / 3.0) * phi_w @ kernel @ phi_w)


def block_second_moments(a_minus_b, W, n_blocks, *, direction=1, bump=None,
                         cells=4, nodes=16, chunk=256):
    """Per-block conditional second moments for blocks 0..N-1, using the
    actual noise sub-path of each block."""
    bump = bump or BumpProfile()
    u, wts = _unit_nodes(cells, nodes)
    phi_w = wts * bump(u)
    read = _read_index(direction)
    out = np.empty(int(n_blocks))
    for lo in range(0, int(n_blocks), chunk):
        jj = np.arange(lo, min(lo + chunk, int(n_blocks)))
        if W is None:
            wread = np.zeros((jj.size, u.size))
        else:
            wread = _read_noise_nodes(W, read, jj[:, None] + u[None, :])
        diff = wread[:, :, None] - wread[:, None, :]
        kernel = _cos_band_integral(diff) - _cos_band_integral(float(a_minus_b) + diff)
        out[jj] = (2.0 / 3.0) * np.einsum("k,ckl,l->c", phi_w, kernel, phi_w)
    return out


def extract_hits(field, W, y1, y2, n_blocks, *, cells=8, nodes=12, override=False):
    """Hit sequence of the coupled pair in the raw single-shear setting.

    Preconditions (unless `override`): the read-coordinate separation is
    at least 4 and the noise passes the per-block fluctuation gate.
    """
    if not isinstance(field, RawShearField):
        raise ValueError("extract_hits expects the raw single-shear field")
    y1 = np.asarray(y1, dtype=np.float64).reshape(2)
    y2 = np.asarray(y2, dtype=np.float64).reshape(2)
    read = _read_index(field.direction)
    a1, a2 = float(y1[read]), float(y2[read])
    if abs(a1 - a2) < 4.0 and not override:
        raise PreconditionError("read-coordinate separation below 4; pass override=True to force")
    if W is not None and not fluctuation_check(W, n_blocks, component=read) and not override:
        raise PreconditionError("noise path fails the per-block fluctuation condition")
    res = raw_hits_batch(
        np.array([field.seed]), W, a1, a2, n_blocks,
        direction=field.direction, amplitude=field.amplitude_factor,
        bump=field.bump, cells=cells, nodes=nodes, collect=True,
    )
    moments = block_second_moments(
        a1 - a2, W, n_blocks, direction=field.direction, bump=field.bump, cells=cells, nodes=nodes
    ) * field.amplitude_factor**2
    return HitSequence(hits=res["hits"][:, 0], second_moments=moments)


def third_moment_bound_check(hit_seq):
    """True iff the empirical third absolute moment is at most 8.

    Holds surely: each hit is a phi-weighted average of a difference of
    sines, so |hit| <= 2.
    """
    if len(hit_seq) == 0:
        raise ValueError("empty hit sequence")
    return bool(np.mean(np.abs(hit_seq.hits) ** 3) <= 8.0)


# ---------------------------------------------------------------------------
# vectorized multiscale engine
# ---------------------------------------------------------------------------

def advance_positions_scale(spec, W, n, positions, seeds, *, cells=4, nodes=16, chunk=512):
    """Advance a batch of particles through the whole band of scale n.

    Exploits the exact shear transport: within the band the read
    coordinate of every particle is translated by the shared noise, so
    the per-block drift integrands depend on time only through the
    frozen noise and the push displacement accumulates block sums.

    Args:
      spec: FieldSpec with n inside its simulated scale range.
      W: NoisePath covering [T^n, T^{n-1}], or None for zero noise.
      n: scale to traverse.
      positions: (T, 2) physical positions at T^n (updated copy returned).
      seeds: scalar field seed (shared realization) or (T,) per-trial.

    Returns the (T, 2) positions at T^{n-1}.
    """
    sched = spec.schedule
    d = iota(n)
    push, read = d - 1, _read_index(d)
    rate = sched.time_rate(n)
    sf = sched.space_factor(n)
    amp = sched.amplitude(n)
    t_n = sched.time_of(n)
    t_prev = sched.time_of(n - 1)
    n_blocks = sched.block_count(n)
    u, wts = _unit_nodes(cells, nodes)
    phi_w = wts * spec.bump(u)

    x = np.array(positions, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("positions must be (T, 2)")
    seeds_arr = np.atleast_1d(np.asarray(seeds))
    if seeds_arr.shape[0] not in (1, x.shape[0]):
        raise ValueError("seeds must be scalar or one per particle")

    a_read = sf * x[:, read]  # rescaled read coordinates, constant over the band
    if W is not None:
        w_base = float(W.eval(t_n)[read])
    drift = np.zeros(x.shape[0])
    chunk = _effective_chunk(chunk, u.size if W is not None else 1, x.shape[0])
    for lo in range(0, n_blocks, chunk):
        jj = np.arange(lo, min(lo + chunk, n_blocks))
        A, B = block_amplitude_phase(seeds_arr, n, jj[:, None])  # (C, T) or (C, 1)
        if W is None:
            phi_int = float(np.sum(phi_w))
            s = phi_int * np.sin(A * a_read[None, :] + B)
        else:
            t_phys = t_n + (jj[:, None] + u[None, :]) / rate
            wread = sf * (W.eval(t_phys)[..., read] - w_base)  # (C, K)
            arg = A[:, None, :] * (a_read[None, None, :] + wread[:, :, None]) + B[:, None, :]
            s = np.einsum("k,ckt->ct", phi_w, np.sin(arg))
        drift += s.sum(axis=0)
    x[:, push] += (amp / rate) * drift
    if W is not None:
        dW = W.eval(t_prev) - W.eval(t_n)
        x[:, push] += dW[push]
        x[:, read] += dW[read]
    return x


def evolve_pairs_batch(spec, W, x1, x2, m, n, seeds, *, cells=4, nodes=16, chunk=512,
                       record=None):
    """Advance coupled pairs from T^m to T^n through every band between.

    x1, x2 are (T, 2) starting positions at T^m; both members of a pair
    share the trial's field seed and the common noise.  `record`, when
    given, is called as record(scale_boundary, x1, x2) after each band
    (scale_boundary is the label j of the boundary time T^j reached).

    Returns the final (x1, x2).
    """
    sched = spec.schedule
    if not (sched.n_min <= n <= m <= sched.n_max):
        raise ValueError("need n_min <= n <= m <= n_max within the simulated schedule")
    for s in range(m, n, -1):
        x1 = advance_positions_scale(spec, W, s, x1, seeds, cells=cells, nodes=nodes, chunk=chunk)
        x2 = advance_positions_scale(spec, W, s, x2, seeds, cells=cells, nodes=nodes, chunk=chunk)
        if record is not None:
            record(s - 1, x1, x2)
    return x1, x2


def hits_to_csv(hit_seq, path, *, seed, spec_hash):
    """Write a hit sequence as CSV with run-identifying header comments."""
    rows = np.column_stack([np.arange(len(hit_seq)), hit_seq.hits, hit_seq.second_moments])
    header = f"# seed = {seed}\n# spec = {spec_hash}\nblock,hit,second_moment"
    np.savetxt(path, rows, fmt=["%d", "%.17g", "%.17g"], delimiter=",", header=header, comments="")


def trace_to_csv(trace, path, *, seed, spec_hash):
    """Write a separation trace as CSV with run-identifying comments."""
    rows = np.column_stack([
        trace.scales, trace.times, trace.separations, trace.magnitudes, trace.read_components,
    ])
    header = (
        f"# seed = {seed}\n# spec = {spec_hash}\n"
        "scale,time,sep1,sep2,magnitude,read_component"
    )
    np.savetxt(
        path, rows,
        fmt=["%d", "%.17g", "%.17g", "%.17g", "%.17g", "%.17g"],
        delimiter=",", header=header, comments="",
    )
