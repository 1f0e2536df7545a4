"""Periodized orthonormal wavelet transforms on dyadic grids.

A grid function with samples ``f_i`` is identified with the element
``sum_i h**(n/2) f_i phi_{J,i}`` of ``V_J``; with that identification the
midpoint quadrature inner product *is* the L2 inner product, so the
transforms below are exactly orthogonal on samples.

Array index ``a`` at level ``j`` is the dyadic cube ``2**-j (a + [0,1)**n)``.
The filter bank reads its input with an offset (``FilterPair.shift``) so
that ``phi_I`` and ``psi_I^lam`` are centered on ``I`` and supported in the
dilated cube ``m I``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GeometryError, LevelError
from .filters import DEFAULT_FILTER, FilterPair, load_filter
from .grid import Box, DyadicCube, GridFunction


def labels(n: int):
    """Orientation set ``E = {0,1}**n \\ {0}`` in a fixed order."""
    return [lam for lam in itertools.product((0, 1), repeat=n) if any(lam)]


def cells_at_level(box: Box, j: int) -> int:
    count = box.side * 2.0**j
    if count < 1 or count != int(count):
        raise LevelError(f"level {j} does not tile a box of side {box.side}")
    return int(count)


def _tap_index(N, filt: FilterPair):
    a = np.arange(N // 2)
    return (2 * a[:, None] - filt.shift + np.arange(filt.taps)[None, :]) % N


def _analyze(c, filt, axis):
    c = np.moveaxis(c, axis, -1)
    idx = _tap_index(c.shape[-1], filt)
    t = c[..., idx]
    lo = t @ filt.lowpass
    hi = t @ filt.highpass
    return np.moveaxis(lo, -1, axis), np.moveaxis(hi, -1, axis)


def _synthesize(lo, hi, filt, axis):
    lo = np.moveaxis(lo, axis, -1)
    hi = np.moveaxis(hi, axis, -1)
    N = 2 * lo.shape[-1]
    idx = _tap_index(N, filt)
    out = np.zeros(lo.shape[:-1] + (N,))
    # fixed tap -> distinct output indices, so += is a plain scatter
    for l in range(filt.taps):
        out[..., idx[:, l]] += lo * filt.lowpass[l] + hi * filt.highpass[l]
    return np.moveaxis(out, -1, axis)


def _forward_step(c, filt, n):
    parts = {(): c}
    for axis in range(n):
        nxt = {}
        for key, arr in parts.items():
            lo, hi = _analyze(arr, filt, axis)
            nxt[key + (0,)] = lo
            nxt[key + (1,)] = hi
        parts = nxt
    return parts[(0,) * n], np.stack([parts[lam] for lam in labels(n)])


def _inverse_step(scaling, detail, filt, n):
    parts = {(0,) * n: scaling}
    for i, lam in enumerate(labels(n)):
        parts[lam] = detail[i]
    for axis in reversed(range(n)):
        prefixes = {key[:axis] for key in parts}
        parts = {p: _synthesize(parts[p + (0,)], parts[p + (1,)], filt, axis) for p in prefixes}
    return parts[()]


@dataclass(frozen=True, eq=False)
class WaveletCoeffs:
    """Coefficients ``<f, psi_I^lam>`` for ``j0 <= j < J`` plus ``<f, phi_I>`` at ``j0``.

    Stored densely: ``detail[j]`` has shape ``(len(E),) + (N_j,)*n`` and
    ``scaling`` has shape ``(N_j0,)*n``.  ``items()`` gives the sparse view.
    """

    box: Box
    J: int
    j0: int
    filter: FilterPair
    scaling: np.ndarray = field(repr=False)
    detail: dict = field(repr=False)

    @property
    def n(self):
        return self.box.dims

    @property
    def levels(self):
        return range(self.j0, self.J)

    @property
    def labels(self):
        return labels(self.n)

    @classmethod
    def zeros(cls, box, J, j0, filt=DEFAULT_FILTER):
        filt = load_filter(filt)
        n = box.dims
        scaling = np.zeros((cells_at_level(box, j0),) * n)
        detail = {
            j: np.zeros((2**n - 1,) + (cells_at_level(box, j),) * n) for j in range(j0, J)
        }
        return cls(box, J, j0, filt, scaling, detail)

    @classmethod
    def from_items(cls, box, J, j0, items, filt=DEFAULT_FILTER):
        """Build from a ``{DyadicCube: value}`` mapping."""
        c = cls.zeros(box, J, j0, filt)
        for cube, value in dict(items).items():
            c._set(cube, value)
        return c

    def _locate(self, cube: DyadicCube):
        if cube.n != self.n:
            raise GeometryError("cube dimension does not match coefficients")
        if cube.lam is None:
            if cube.j != self.j0:
                raise LevelError(f"scaling coefficients live at level {self.j0}, not {cube.j}")
            N = self.scaling.shape[0]
            if any(not 0 <= v < N for v in cube.k):
                raise GeometryError(f"cube corner {cube.k} outside the box at level {cube.j}")
            return self.scaling, cube.k
        if cube.j not in self.detail:
            raise LevelError(f"no detail level {cube.j} in [{self.j0}, {self.J})")
        N = self.detail[cube.j].shape[1]
        if any(not 0 <= v < N for v in cube.k):
            raise GeometryError(f"cube corner {cube.k} outside the box at level {cube.j}")
        return self.detail[cube.j], (self.labels.index(cube.lam),) + cube.k

    def _set(self, cube, value):
        arr, idx = self._locate(cube)
        arr[idx] = value

    def __getitem__(self, cube: DyadicCube) -> float:
        arr, idx = self._locate(cube)
        return float(arr[idx])

    def items(self, include_scaling=True, nonzero=True):
        """Yield ``(DyadicCube, value)`` pairs, skipping zeros by default."""
        if include_scaling:
            for k in zip(*np.nonzero(self.scaling)) if nonzero else np.ndindex(self.scaling.shape):
                yield DyadicCube(self.j0, k), float(self.scaling[k])
        labs = self.labels
        for j in self.levels:
            arr = self.detail[j]
            idxs = zip(*np.nonzero(arr)) if nonzero else np.ndindex(arr.shape)
            for idx in idxs:
                yield DyadicCube(j, idx[1:], labs[idx[0]]), float(arr[idx])

    def energy(self) -> float:
        return float(np.sum(self.scaling**2) + sum(np.sum(d**2) for d in self.detail.values()))

    def detail_energy(self) -> float:
        return float(sum(np.sum(d**2) for d in self.detail.values()))

    def copy(self, scaling=None, detail=None) -> "WaveletCoeffs":
        return replace(
            self,
            scaling=np.array(self.scaling if scaling is None else scaling, dtype=float),
            detail={j: np.array(d, dtype=float) for j, d in (detail or self.detail).items()},
        )

    def with_zero_scaling(self) -> "WaveletCoeffs":
        return self.copy(scaling=np.zeros_like(self.scaling))

    def compatible(self, other: "WaveletCoeffs") -> bool:
        return (
            self.box == other.box
            and self.J == other.J
            and self.j0 == other.j0
            and self.filter.name == other.filter.name
        )

    def _combine(self, other, op):
        if not self.compatible(other):
            raise GeometryError("wavelet coefficient sets use different bases")
        return self.copy(
            scaling=op(self.scaling, other.scaling),
            detail={j: op(self.detail[j], other.detail[j]) for j in self.levels},
        )

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return self.copy(
            scaling=self.scaling * scalar, detail={j: d * scalar for j, d in self.detail.items()}
        )

    __rmul__ = __mul__


def _resolve(f: GridFunction, j0: int):
    lo = f.coarsest_level
    if j0 >= f.J:
        raise LevelError(f"j0={j0} must be below the finest level J={f.J}")
    if j0 < lo:
        raise LevelError(f"j0={j0} is coarser than the box (coarsest level {lo})")


def dwt_forward(f: GridFunction, j0: int = 0, filt=DEFAULT_FILTER) -> WaveletCoeffs:
    filt = load_filter(filt)
    _resolve(f, j0)
    n = f.n
    c = f.samples * f.h ** (n / 2)
    detail = {}
    for j in range(f.J - 1, j0 - 1, -1):
        c, detail[j] = _forward_step(c, filt, n)
    return WaveletCoeffs(f.box, f.J, j0, filt, c, detail)


def dwt_inverse(coeffs: WaveletCoeffs) -> GridFunction:
    c = _inverse_cascade(coeffs.scaling, coeffs.detail, coeffs.j0, coeffs.J, coeffs.filter, coeffs.n)
    return GridFunction(coeffs.box, coeffs.J, c * 2.0 ** (coeffs.J * coeffs.n / 2))


def _inverse_cascade(scaling, detail, j_from, J, filt, n):
    c = scaling
    for j in range(j_from, J):
        d = detail.get(j) if detail is not None else None
        if d is None:
            d = np.zeros((2**n - 1,) + c.shape)
        c = _inverse_step(c, d, filt, n)
    return c


def scaling_cascade(f: GridFunction, j0: int, filt=DEFAULT_FILTER):
    """Scaling coefficients ``<f, phi_I>`` for every level ``j0..J`` (dict by level)."""
    filt = load_filter(filt)
    n = f.n
    c = f.samples * f.h ** (n / 2)
    out = {f.J: c}
    for j in range(f.J - 1, j0 - 1, -1):
        c, _ = _forward_step(c, filt, n)
        out[j] = c
    return out


def projections(f: GridFunction, j0: int = 0, filt=DEFAULT_FILTER):
    """Samples of ``P_j f`` for ``j = j0..J`` (list indexed from ``j0``); ``P_J f`` is ``f``."""
    filt = load_filter(filt)
    _resolve(f, j0)
    cascade = scaling_cascade(f, j0, filt)
    norm = 2.0 ** (f.J * f.n / 2)
    out = []
    for j in range(j0, f.J):
        c = _inverse_cascade(cascade[j], None, j, f.J, filt, f.n)
        out.append(f.with_samples(c * norm))
    out.append(f)
    return out


def project(f: GridFunction, j: int, part: str = "P", filt=DEFAULT_FILTER) -> GridFunction:
    """Samples of ``P_j f`` (``part='P'``) or ``Q_j f`` (``part='Q'``)."""
    filt = load_filter(filt)
    part = part.upper()
    if part == "P":
        if j == f.J:
            return f
        if not f.coarsest_level <= j < f.J:
            raise LevelError(f"P_j needs {f.coarsest_level} <= j <= {f.J}, got {j}")
        coeffs = dwt_forward(f, j, filt)
        return dwt_inverse(coeffs.copy(detail={k: np.zeros_like(d) for k, d in coeffs.detail.items()}))
    if part == "Q":
        if not f.coarsest_level <= j < f.J:
            raise LevelError(f"Q_j needs {f.coarsest_level} <= j < {f.J}, got {j}")
        coeffs = dwt_forward(f, j, filt)
        kept = {k: (d if k == j else np.zeros_like(d)) for k, d in coeffs.detail.items()}
        return dwt_inverse(coeffs.copy(scaling=np.zeros_like(coeffs.scaling), detail=kept))
    raise ValueError(f"part must be 'P' or 'Q', got {part!r}")


def synthesize(cube: DyadicCube, box: Box, J: int, filt=DEFAULT_FILTER) -> GridFunction:
    """Grid samples of ``phi_I`` (``cube.lam is None``) or ``psi_I^lam``."""
    filt = load_filter(filt)
    if cube.n != box.dims:
        raise GeometryError("cube and box dimensions differ")
    lo = -int(round(np.log2(box.side)))
    if cube.j < lo:
        raise LevelError(f"cube level {cube.j} is coarser than the box")
    if cube.lam is not None and cube.j >= J:
        raise LevelError(f"wavelet at level {cube.j} is too fine for a grid with J={J}")
    if cube.lam is None and cube.j > J:
        raise LevelError(f"scaling function at level {cube.j} is too fine for J={J}")
    if cube.lam is None and cube.j == J:
        out = np.zeros((cells_at_level(box, J),) * box.dims)
        out[cube.k] = 2.0 ** (J * box.dims / 2)
        return GridFunction(box, J, out)
    return dwt_inverse(WaveletCoeffs.from_items(box, J, cube.j, {cube: 1.0}, filt))
