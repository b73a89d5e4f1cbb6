"""Counter-based deterministic random streams.

Every random quantity in the package is a pure function of an integer
key tuple (seed, stream tag, indices...).  Keys are hashed with a
splitmix64-style chain, which vectorizes over numpy arrays, so block
parameters for millions of (scale, block, trial) triples can be drawn
without materializing generator objects.  Path samplers that need many
correlated normals use numpy's Philox generator keyed by a derived seed.
"""

import numpy as np

_U64 = np.uint64
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Disjoint top-level stream tags.  Field draws and noise draws never share
# a hash chain, so changing one seed base cannot perturb the other stream.
STREAM_FIELD = 0x11
STREAM_NOISE = 0x22
STREAM_TRIAL = 0x33


def _mix(z):
    """splitmix64 finalizer, elementwise on uint64 arrays."""
    z = np.asarray(z, dtype=_U64)
    with np.errstate(over="ignore"):
        z = (z + _U64(_GOLDEN)) & _U64(0xFFFFFFFFFFFFFFFF)
        z = (z ^ (z >> _U64(30))) * _U64(_MIX1)
        z = (z ^ (z >> _U64(27))) * _U64(_MIX2)
        z = z ^ (z >> _U64(31))
    return z


def _as_u64(x):
    a = np.asarray(x)
    if a.dtype == np.uint64:
        return a
    if a.dtype.kind in "iu":
        return a.astype(np.int64).view(np.uint64) if a.dtype.kind == "i" else a.astype(np.uint64)
    # plain python ints (possibly negative / large) arrive as object arrays
    flat = [int(v) & 0xFFFFFFFFFFFFFFFF for v in np.ravel(a)]
    return np.array(flat, dtype=_U64).reshape(a.shape)


def hash_key(*parts):
    """Chain-hash integer parts (scalars or broadcastable arrays) to uint64.

    Order sensitive: hash_key(a, b) != hash_key(b, a) in general.
    """
    h = _mix(_as_u64(0))
    for p in parts:
        h = _mix(h ^ _as_u64(p))
    return h


def uniform_from_key(key, word):
    """Uniform [0, 1) float64 drawn from hashed `key`, one per `word` index."""
    bits = _mix(_as_u64(key) ^ _as_u64(word))
    return (bits >> _U64(11)).astype(np.float64) * (1.0 / (1 << 53))


def derive_seed(base, *tags):
    """Derive a child integer seed from a base seed and tag path."""
    return int(hash_key(base, *tags)[()])
