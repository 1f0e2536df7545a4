"""Deterministic test corpora.

Random numbers come from Philox-4x64-10 (``numpy.random.Philox``) keyed by
the 64-bit seed.  Each draw family uses its own counter block
``[0, 0, item, tag]`` so items are independent of each other and of the
grid size.  Conversions, fixed so other implementations can reproduce them:

* uniform: ``(raw >> 11) * 2**-53`` in ``[0, 1)``
* normal: ``sqrt(-2 log(1 - u1)) * cos(2 pi u2)`` (one normal per two uniforms)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .filters import DEFAULT_FILTER, load_filter
from .grid import Box, DyadicCube, GridFunction
from .wavelet import WaveletCoeffs, cells_at_level, dwt_forward, dwt_inverse

MASK64 = (1 << 64) - 1


class PhiloxStream:
    """Uniform and normal draws from one Philox counter block."""

    def __init__(self, seed: int, item: int = 0, tag: int = 0):
        if not 0 <= int(seed) <= MASK64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {seed}")
        counter = np.array([0, 0, item & MASK64, tag & MASK64], dtype=np.uint64)
        self._bg = np.random.Philox(key=int(seed), counter=counter)

    def raw(self, size):
        return self._bg.random_raw(size)

    def uniform(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        u = (self.raw(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        u = self.uniform(2 * n)
        z = np.sqrt(-2.0 * np.log1p(-u[0::2])) * np.cos(2 * np.pi * u[1::2])
        return float(z[0]) if size is None else z.reshape(size)

    def integers(self, lo, hi):
        """Uniform integer in ``[lo, hi)``."""
        return lo + min(int(self.uniform() * (hi - lo)), hi - lo - 1)


KINDS = ("finite-wavelet-random", "atom", "bmo-log-exemplar", "band-limited-potential")

_DEFAULTS = {
    "finite-wavelet-random": {"levels": [0, 7], "sparsity": 0.25, "amplitude": 1.0, "law": "normal"},
    "atom": {"levels": [3, 6], "depth": 4, "fill": 0.5, "interior": True},
    "bmo-log-exemplar": {"truncation": 6.0, "offset": 0.0, "center": None},
    "band-limited-potential": {"modes": 4, "decay": 2.0},
}

_TAGS = {kind: i + 1 for i, kind in enumerate(KINDS)}


@dataclass(frozen=True)
class CorpusSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown corpus kind {self.kind!r}; known: {', '.join(KINDS)}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ConfigurationError(f"unknown {self.kind} parameters: {sorted(unknown)}")
        merged = dict(_DEFAULTS[self.kind])
        merged.update(self.params)
        object.__setattr__(self, "params", merged)
        p = merged
        if self.kind == "finite-wavelet-random":
            lo, hi = p["levels"]
            if not lo < hi:
                raise ConfigurationError("levels must be an increasing pair")
            if not 0 < p["sparsity"] <= 1:
                raise ConfigurationError("sparsity must lie in (0, 1]")
            if p["law"] not in ("normal", "uniform"):
                raise ConfigurationError("law must be 'normal' or 'uniform'")
        if self.kind == "atom":
            lo, hi = p["levels"]
            if not lo <= hi or p["depth"] < 1 or not 0 < p["fill"] <= 1:
                raise ConfigurationError("atom spec needs levels lo <= hi, depth >= 1, fill in (0, 1]")
        if self.kind == "bmo-log-exemplar" and p["truncation"] <= 0:
            raise ConfigurationError("truncation must be positive")
        if self.kind == "band-limited-potential" and p["modes"] < 1:
            raise ConfigurationError("modes must be >= 1")


@dataclass(frozen=True, eq=False)
class CorpusItem:
    kind: str
    index: int
    function: GridFunction
    coeffs: WaveletCoeffs | None = None
    cube: DyadicCube | None = None
    partner: GridFunction | None = None


def _wavelet_random(spec, stream, box, J, filt):
    p = spec.params
    lo, hi = p["levels"]
    top = -int(round(math.log2(box.side)))
    lo = max(lo, top)
    if hi > J:
        raise ConfigurationError(f"levels up to {hi} need J >= {hi}, got J={J}")
    c = WaveletCoeffs.zeros(box, J, top, filt)
    for j in range(lo, hi):
        shape = c.detail[j].shape
        keep = stream.uniform(shape) < p["sparsity"]
        if p["law"] == "normal":
            vals = stream.normal(shape)
        else:
            vals = 2 * stream.uniform(shape) - 1
        c.detail[j][...] = np.where(keep, vals * p["amplitude"], 0.0)
    return c


def _atom(spec, stream, box, J, filt):
    p = spec.params
    n = box.dims
    top = -int(round(math.log2(box.side)))
    lo, hi = max(p["levels"][0], top), min(p["levels"][1], J - 1)
    if lo > hi:
        raise ConfigurationError(f"atom levels {p['levels']} do not fit J={J}")
    jR = stream.integers(lo, hi + 1)
    NR = cells_at_level(box, jR)
    m = filt.m
    # keep the m-dilate of R inside the box when there is room
    margin = math.ceil((m - 1) / 2) if p["interior"] else 0
    if NR - 2 * margin <= 0:
        margin = 0
    k = tuple(stream.integers(margin, NR - margin) for _ in range(n))
    R = DyadicCube(jR, k)
    c = WaveletCoeffs.zeros(box, J, top, filt)
    for j in range(jR, min(jR + p["depth"], J)):
        s = 2 ** (j - jR)
        sub = c.detail[j][(slice(None),) + tuple(slice(ki * s, (ki + 1) * s) for ki in k)]
        keep = stream.uniform(sub.shape) < p["fill"]
        vals = stream.normal(sub.shape)
        sub[...] = np.where(keep, vals, 0.0)
    if c.energy() == 0:
        c.detail[jR][(0,) + k] = 1.0
    target = (0.5 + 0.5 * stream.uniform()) * R.volume**-0.5
    return c * (target / math.sqrt(c.energy())), R


def _bmo_log(spec, stream, box, J):
    p = spec.params
    T = float(p["truncation"])
    if p["center"] is None:
        x0 = tuple(box.side * (0.25 + 0.5 * stream.uniform()) for _ in range(box.dims))
    else:
        x0 = tuple(np.broadcast_to(np.asarray(p["center"], float), (box.dims,)))
    off = float(p["offset"])

    def fn(*xs):
        r = np.sqrt(sum((x - c) ** 2 for x, c in zip(xs, x0)))
        return np.log(np.maximum(r, math.exp(-T))) + off

    return GridFunction.from_callable(box, J, fn)


def _band_limited(spec, stream, box, J):
    p = spec.params
    K, decay = int(p["modes"]), float(p["decay"])
    n = box.dims
    xs = GridFunction.zeros(box, J).points(physical=False)
    out = np.zeros(xs[0].shape)
    N = cells_at_level(box, J)
    if 2 * K >= N:
        raise ConfigurationError(f"{K} modes do not fit {N} cells per axis")
    for kv in np.ndindex(*((2 * K + 1,) * n)):
        kv = tuple(x - K for x in kv)
        a, b = stream.normal(2)
        w = (1.0 + sum(x * x for x in kv)) ** (-decay / 2)
        if not any(kv):
            continue
        phase = 2 * np.pi * sum(x * k for x, k in zip(xs, kv)) / box.side
        out += w * (a * np.cos(phase) + b * np.sin(phase))
    return GridFunction(box, J, out)


def gen_corpus(spec: CorpusSpec, seed: int, count: int, box: Box | None = None, J: int = 10, filt=DEFAULT_FILTER, start: int = 0):
    """Items ``start .. start+count-1`` of the corpus for ``(spec, seed)``."""
    if not isinstance(spec, CorpusSpec):
        raise ConfigurationError("gen_corpus needs a CorpusSpec")
    box = box or Box.unit(1)
    filt = load_filter(filt)
    tag = _TAGS[spec.kind]
    out = []
    for i in range(start, start + count):
        stream = PhiloxStream(seed, i, tag)
        if spec.kind == "finite-wavelet-random":
            c = _wavelet_random(spec, stream, box, J, filt)
            out.append(CorpusItem(spec.kind, i, dwt_inverse(c), c))
        elif spec.kind == "atom":
            c, R = _atom(spec, stream, box, J, filt)
            out.append(CorpusItem(spec.kind, i, dwt_inverse(c), c, R))
        elif spec.kind == "bmo-log-exemplar":
            g = _bmo_log(spec, stream, box, J)
            out.append(CorpusItem(spec.kind, i, g, dwt_forward(g, g.coarsest_level, filt)))
        else:
            u = _band_limited(spec, stream, box, J)
            v = _band_limited(spec, stream, box, J)
            out.append(CorpusItem(spec.kind, i, u, None, None, v))
    return out
