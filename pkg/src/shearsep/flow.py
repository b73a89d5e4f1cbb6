"""Carathéodory ODE integration dX = u(t, X) dt + dW for a frozen path W.

The shear structure makes one coordinate exactly solvable: inside a
block shearing e_d, the other coordinate is pure noise transport, so
the drift integral reduces to a one-dimensional quadrature of a smooth
integrand along the frozen noise.  `ExactShear` exploits this; a plain
forward Euler scheme (`GenericEuler`) that only sees the field through
pointwise evaluation serves as an independent oracle.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import RawShearField, iota

EXACT_SHEAR = "exact-shear"
GENERIC_EULER = "generic-euler"


@dataclass(frozen=True)
class ParticleState:
    """One trajectory sample: time and position in the plane."""

    t: float
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64).reshape(2)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = EXACT_SHEAR
    substeps_per_block: int = 64
    quadrature_nodes: int = 32

    def __post_init__(self):
        if self.method not in (EXACT_SHEAR, GENERIC_EULER):
            raise ValueError(f"unknown method {self.method!r}")
        if self.quadrature_nodes < 8:
            raise ValueError("quadrature_nodes must be >= 8")
        if self.substeps_per_block < 16:
            raise ValueError("substeps_per_block must be >= 16")


@dataclass(frozen=True)
class _BlockGeom:
    """Physical geometry of one block plus its rescaling constants."""

    t_start: float
    width: float
    amplitude: float
    space_factor: float
    direction: int
    A: float
    B: float


def _geometry(spec, n, j):
    if isinstance(spec, RawShearField):
        amp, phase = spec.block_params(j)
        return _BlockGeom(
            t_start=float(j),
            width=1.0,
            amplitude=spec.amplitude_factor,
            space_factor=1.0,
            direction=spec.direction,
            A=float(amp),
            B=float(phase),
        )
    sched = spec.schedule
    width = sched.block_width(n)
    amp, phase = spec.block_params(n)(j)
    return _BlockGeom(
        t_start=sched.time_of(n) + j * width,
        width=width,
        amplitude=sched.amplitude(n),
        space_factor=sched.space_factor(n),
        direction=iota(n),
        A=float(amp),
        B=float(phase),
    )


@lru_cache(maxsize=32)
def _gauss(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def quadrature_panels(t_start, t_end, node_times, max_fraction=0.125):
    """Panel boundaries for composite quadrature on [t_start, t_end].

    Panels break at interior noise-grid nodes (the integrand has kinks
    there) and are further split so no panel exceeds `max_fraction` of
    the block, keeping the bump resolved.
    """
    width = t_end - t_start
    eps = 1e-9 * width
    interior = node_times[(node_times > t_start + eps) & (node_times < t_end - eps)]
    bounds = np.concatenate([[t_start], interior, [t_end]])
    out = [bounds[0]]
    cap = max_fraction * width
    for k in range(1, len(bounds)):
        seg = bounds[k] - bounds[k - 1]
        pieces = max(1, int(math.ceil(seg / cap - 1e-12)))
        for p in range(1, pieces + 1):
            out.append(bounds[k - 1] + seg * p / pieces)
    return np.asarray(out)


def _shear_quadrature(geom, w_read, x_read_start, panels, nodes, bump):
    """Integral over the block of amp * phi(tau) sin(A sf (x_read + dW) + B)."""
    u, wts = _gauss(nodes)
    starts = panels[:-1][:, None]
    widths = (panels[1:] - panels[:-1])[:, None]
    s = starts + widths * u[None, :]
    tau = (s - geom.t_start) / geom.width
    read_vals = x_read_start + (w_read(s.ravel()).reshape(s.shape) - w_read(geom.t_start))
    integrand = bump(tau) * np.sin(geom.A * geom.space_factor * read_vals + geom.B)
    return geom.amplitude * float(np.sum(widths * wts[None, :] * integrand))


def advance_block(spec, W, state, n, j, cfg=IntegratorConfig()):
    """Advance one particle across block j (of scale n, when `spec` is a
    FieldSpec; n is ignored for RawShearField).

    ExactShear: the read coordinate is transported by the noise exactly;
    the sheared coordinate gains the noise increment plus a composite
    Gauss quadrature of the frozen-noise drift integrand.  GenericEuler:
    forward stepping x <- x + u(t, x) h + dW, evaluating the field
    pointwise.
    """
    geom = _geometry(spec, n, j)
    t_a = geom.t_start
    t_b = t_a + geom.width
    if abs(state.t - t_a) > 1e-9 * max(geom.width, abs(t_a)):
        raise ValueError("state.t does not sit on the requested block start")
    slack = 1e-9 * W.dt
    if W.t0 > t_a + slack or W.t_end < t_b - slack:
        raise ValueError("noise path does not cover the block")
    push, read = geom.direction - 1, 2 - geom.direction
    x = state.x.copy()
    if cfg.method == EXACT_SHEAR:
        def w_read(s):
            return W.eval(s)[..., read]

        panels = quadrature_panels(t_a, t_b, W.times)
        drift = _shear_quadrature(geom, w_read, x[read], panels, cfg.quadrature_nodes, _bump_of(spec))
        dW = W.eval(t_b) - W.eval(t_a)
        x[push] += drift + dW[push]
        x[read] += dW[read]
    else:
        h = geom.width / cfg.substeps_per_block
        for k in range(cfg.substeps_per_block):
            t = t_a + k * h
            u = spec.eval(t, x)
            dW = W.eval(min(t + h, t_b)) - W.eval(t)
            x = x + u * h + dW
    return ParticleState(t=t_b, x=x)


def _bump_of(spec):
    return spec.bump


def _boundary_label(spec, t):
    """Snap a time to the nearest block boundary, as a (n, j) label with
    j in [0, block_count(n)] (the label (n, N) is the band's end)."""
    if isinstance(spec, RawShearField):
        return 0, int(round(t))
    sched = spec.schedule
    if t >= sched.t_end:
        return sched.n_min, sched.block_count(sched.n_min)
    if t <= sched.t_start:
        return sched.n_max, 0
    n = sched.scale_of(t)
    j = min(int(round((t - sched.time_of(n)) / sched.block_width(n))), sched.block_count(n))
    if j == sched.block_count(n) and n > sched.n_min:
        return n - 1, 0  # canonical label for a band boundary
    return n, j


def _label_time(spec, label):
    n, j = label
    if isinstance(spec, RawShearField):
        return float(j)
    return spec.schedule.time_of(n) + j * spec.schedule.block_width(n)


def _block_sequence(spec, start_label, end_label):
    """Yield (n, j) block labels from start_label up to end_label."""
    if isinstance(spec, RawShearField):
        for j in range(start_label[1], end_label[1]):
            yield 0, j
        return
    sched = spec.schedule
    n, j = start_label
    while (n, j) != end_label:
        count = sched.block_count(n)
        if j >= count:
            if n == sched.n_min:
                return
            n, j = n - 1, 0
            if (n, j) == end_label:
                return
        yield n, j
        j += 1


def snap_to_block_boundary(spec, t):
    """Snap a time to the nearest block boundary of the field's schedule."""
    return _label_time(spec, _boundary_label(spec, t))


def solve(spec, W, start, t_end, cfg=IntegratorConfig()):
    """Integrate from `start` to t_end, returning states at every block
    boundary (start and end times snap to the nearest boundary)."""
    lab0 = _boundary_label(spec, start.t)
    lab1 = _boundary_label(spec, t_end)
    t0 = _label_time(spec, lab0)
    if _label_time(spec, lab1) < t0:
        raise ValueError("t_end precedes the start time")
    state = ParticleState(t=t0, x=start.x)
    out = [state]
    for n, j in _block_sequence(spec, lab0, lab1):
        state = advance_block(spec, W, state, n, j, cfg)
        out.append(state)
    return out


def trajectory_to_csv(states, path):
    """Write trajectory states as CSV with header t,x1,x2."""
    rows = np.array([[s.t, s.x[0], s.x[1]] for s in states])
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header="t,x1,x2", comments="")
