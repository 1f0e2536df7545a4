"""Dyadic geometry, sampled functions on boxes, quadrature and GFN1 file I/O.

Conventions
-----------
* Lengths are measured in units of the base length 1.
* A grid box has side ``2**s`` for some integer ``s`` and is cut into
  ``2**(J + s)`` cells per axis; samples are values at cell midpoints.
* Dyadic cubes are expressed in *local* coordinates ``x - box.origin`` so the
  coefficient tree of a grid function is aligned with its cells whatever the
  physical origin.  Physical positions only enter through ``GridFunction.points``.
* ``samples[i_1, ..., i_n]`` is the value on the cell whose corner along axis
  ``d`` is ``i_d * h``; array axis ``d`` is coordinate ``x_{d+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError, GridFormatError

MAGIC = "GFN1"


def _is_power_of_two(x: float) -> bool:
    if not x > 0 or not math.isfinite(x):
        return False
    m, _ = math.frexp(x)
    return m == 0.5


@dataclass(frozen=True)
class Box:
    """Axis-aligned cube ``origin + [0, side)**dims``."""

    origin: tuple
    side: float
    dims: int = 1

    def __post_init__(self):
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        if len(origin) == 1 and self.dims > 1:
            origin = origin * self.dims
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "side", float(self.side))
        if len(origin) != self.dims:
            raise GeometryError(f"origin has {len(origin)} coordinates for dims={self.dims}")
        if not self.side > 0:
            raise GeometryError(f"box side must be positive, got {self.side}")

    @classmethod
    def unit(cls, dims=1, origin=0.0):
        return cls((origin,) * dims if np.isscalar(origin) else tuple(origin), 1.0, dims)

    @property
    def volume(self):
        return self.side**self.dims

    @property
    def center(self):
        return tuple(o + self.side / 2 for o in self.origin)

    def contains(self, other: "Box", atol=1e-12) -> bool:
        return all(
            o2 >= o1 - atol and o2 + other.side <= o1 + self.side + atol
            for o1, o2 in zip(self.origin, other.origin)
        )


@dataclass(frozen=True)
class DyadicCube:
    """The cube ``{x : 2**j x - k in [0, 1)**n}`` with optional orientation label.

    ``lam`` is ``None`` for scaling cubes (``phi_I``) and an element of
    ``{0,1}**n \\ {0}`` for wavelet cubes (``psi_I^lam``).
    """

    j: int
    k: tuple
    lam: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "j", int(self.j))
        object.__setattr__(self, "k", tuple(int(v) for v in np.atleast_1d(self.k)))
        if self.lam is not None:
            lam = tuple(int(v) for v in self.lam)
            if len(lam) != len(self.k) or not any(lam) or any(v not in (0, 1) for v in lam):
                raise GeometryError(f"invalid orientation label {self.lam!r}")
            object.__setattr__(self, "lam", lam)

    @property
    def n(self):
        return len(self.k)

    @property
    def side(self):
        return 2.0 ** (-self.j)

    @property
    def volume(self):
        return self.side**self.n

    @property
    def corner(self):
        return tuple(v * self.side for v in self.k)

    @property
    def center(self):
        return tuple((v + 0.5) * self.side for v in self.k)

    def as_box(self) -> Box:
        return Box(self.corner, self.side, self.n)

    def contains(self, other: "DyadicCube") -> bool:
        """True when ``other`` (as a set) lies inside ``self``."""
        if other.j < self.j:
            return False
        shift = other.j - self.j
        return all((b >> shift) == a for a, b in zip(self.k, other.k))

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.j - 1, tuple(v >> 1 for v in self.k), None)

    def ancestor(self, level: int) -> "DyadicCube":
        if level > self.j:
            raise GeometryError("ancestor level finer than the cube")
        shift = self.j - level
        return DyadicCube(level, tuple(v >> shift for v in self.k), None)


def dilate_cube(cube: DyadicCube, k) -> Box:
    """The box with the same center as ``cube`` and ``k`` times its side."""
    if k < 1:
        raise GeometryError(f"dilation factor must be >= 1, got {k}")
    side = k * cube.side
    return Box(tuple(c - side / 2 for c in cube.center), side, cube.n)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Midpoint samples of a function on a dyadic grid over ``box``."""

    box: Box
    J: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not _is_power_of_two(self.box.side):
            raise GeometryError(f"grid box side must be a power of two, got {self.box.side}")
        npa = self.box.side * 2.0**self.J
        if npa < 1 or npa != int(npa):
            raise GeometryError(f"J={self.J} gives a non-integer cell count on side {self.box.side}")
        arr = np.array(self.samples, dtype=np.float64)
        shape = (int(npa),) * self.box.dims
        if arr.size != int(npa) ** self.box.dims:
            raise GeometryError(f"expected {shape} samples, got shape {arr.shape}")
        arr = arr.reshape(shape)
        if not np.all(np.isfinite(arr)):
            raise GeometryError("grid samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    # construction helpers -------------------------------------------------
    @classmethod
    def zeros(cls, box: Box, J: int) -> "GridFunction":
        n = int(box.side * 2**J)
        return cls(box, J, np.zeros((n,) * box.dims))

    @classmethod
    def constant(cls, box: Box, J: int, value: float) -> "GridFunction":
        n = int(box.side * 2**J)
        return cls(box, J, np.full((n,) * box.dims, float(value)))

    @classmethod
    def from_callable(cls, box: Box, J: int, fn, physical=False) -> "GridFunction":
        """Sample ``fn(*coords)`` at cell midpoints (local coordinates unless ``physical``)."""
        coords = _midpoints(box, J, physical)
        return cls(box, J, np.broadcast_to(fn(*coords), coords[0].shape))

    @classmethod
    def indicator(cls, box: Box, J: int, cube) -> "GridFunction":
        """Indicator of a dyadic cube or a Box given in local coordinates."""
        region = cube.as_box() if isinstance(cube, DyadicCube) else cube
        coords = _midpoints(box, J, physical=False)
        inside = np.ones(coords[0].shape, dtype=bool)
        for c, o in zip(coords, region.origin):
            inside &= (c >= o) & (c < o + region.side)
        return cls(box, J, inside.astype(np.float64))

    # geometry --------------------------------------------------------------
    @property
    def n(self):
        return self.box.dims

    @property
    def cells_per_axis(self):
        return self.samples.shape[0]

    @property
    def h(self):
        return 2.0 ** (-self.J)

    @property
    def cell_volume(self):
        return self.h**self.n

    @property
    def coarsest_level(self):
        """Level of the whole box seen as a single dyadic cube."""
        return -int(round(math.log2(self.box.side)))

    def points(self, physical=True):
        return _midpoints(self.box, self.J, physical)

    def same_geometry(self, other: "GridFunction") -> bool:
        return self.box == other.box and self.J == other.J

    def require_same_geometry(self, other: "GridFunction"):
        if not self.same_geometry(other):
            raise GeometryError(
                f"geometry mismatch: {self.box}, J={self.J} vs {other.box}, J={other.J}"
            )

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.box, self.J, samples)

    # arithmetic ------------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, GridFunction):
            self.require_same_geometry(other)
            return other.samples
        return other

    def __add__(self, other):
        return self.with_samples(self.samples + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_samples(self.samples - self._lift(other))

    def __rsub__(self, other):
        return self.with_samples(self._lift(other) - self.samples)

    def __mul__(self, other):
        return self.with_samples(self.samples * self._lift(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self.with_samples(self.samples / scalar)

    def __neg__(self):
        return self.with_samples(-self.samples)

    def __abs__(self):
        return self.with_samples(np.abs(self.samples))

    def shift(self, cells) -> "GridFunction":
        """Periodic translation by an integer number of cells per axis."""
        cells = tuple(np.atleast_1d(cells)) * (self.n if np.isscalar(cells) else 1)
        return self.with_samples(np.roll(self.samples, cells, axis=tuple(range(self.n))))


def _midpoints(box: Box, J: int, physical: bool):
    npa = int(box.side * 2**J)
    h = 2.0**-J
    axes = []
    for d in range(box.dims):
        x = (np.arange(npa) + 0.5) * h
        if physical:
            x = x + box.origin[d]
        axes.append(x)
    return np.meshgrid(*axes, indexing="ij")


def integrate(f: GridFunction) -> float:
    """Midpoint quadrature; exact for functions constant on cells."""
    return float(f.cell_volume * np.sum(f.samples))


def inner_product(f: GridFunction, g: GridFunction) -> float:
    f.require_same_geometry(g)
    return float(f.cell_volume * np.sum(f.samples * g.samples))


# ---------------------------------------------------------------------------
# GFN1 files


def _header(f: GridFunction, fmt=None) -> str:
    lines = [
        MAGIC,
        f"dims {f.n}",
        f"J {f.J}",
        "origin " + " ".join(repr(o) for o in f.box.origin),
        f"side {f.box.side!r}",
    ]
    if fmt:
        lines.append(f"format {fmt}")
    return "\n".join(lines) + "\n\n"


def write_grid(f: GridFunction, path, csv=False):
    """Write ``f`` as GFN1: text header, blank line, little-endian float64 payload.

    With ``csv=True`` the payload is one ``%.17g`` decimal per line, which also
    round-trips float64 exactly.
    """
    path = Path(path)
    if csv:
        body = "\n".join("%.17g" % v for v in f.samples.ravel()) + "\n"
        path.write_bytes((_header(f, "csv") + body).encode("ascii"))
    else:
        payload = np.ascontiguousarray(f.samples, dtype="<f8").tobytes()
        path.write_bytes(_header(f).encode("ascii") + payload)


def read_grid(path) -> GridFunction:
    data = Path(path).read_bytes()
    sep = data.find(b"\n\n")
    if sep < 0:
        raise GridFormatError("missing blank line terminating the header")
    try:
        lines = data[:sep].decode("ascii").split("\n")
    except UnicodeDecodeError as exc:
        raise GridFormatError("header is not ASCII") from exc
    payload = data[sep + 2 :]
    if not lines or lines[0] != MAGIC:
        raise GridFormatError(f"bad magic {lines[0] if lines else ''!r}, expected {MAGIC}")
    fields = {}
    for line in lines[1:]:
        key, _, value = line.partition(" ")
        if key in fields:
            raise GridFormatError(f"duplicate header key {key!r}")
        fields[key] = value.strip()
    missing = {"dims", "J", "origin", "side"} - fields.keys()
    if missing:
        raise GridFormatError(f"missing header keys {sorted(missing)}")
    unknown = fields.keys() - {"dims", "J", "origin", "side", "format"}
    if unknown:
        raise GridFormatError(f"unknown header keys {sorted(unknown)}")
    try:
        dims = int(fields["dims"])
        J = int(fields["J"])
        origin = tuple(float(v) for v in fields["origin"].split())
        side = float(fields["side"])
    except ValueError as exc:
        raise GridFormatError(f"unparseable header value: {exc}") from exc
    if dims not in (1, 2, 3):
        raise GridFormatError(f"unsupported dims {dims}")
    if len(origin) != dims:
        raise GridFormatError("origin length does not match dims")
    try:
        box = Box(origin, side, dims)
        npa = box.side * 2.0**J
    except GeometryError as exc:
        raise GridFormatError(str(exc)) from exc
    if npa < 1 or npa != int(npa):
        raise GridFormatError("J and side give a non-integer cell count")
    count = int(npa) ** dims
    fmt = fields.get("format", "binary")
    if fmt == "binary":
        if len(payload) != 8 * count:
            raise GridFormatError(f"expected {8 * count} payload bytes, got {len(payload)}")
        samples = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    elif fmt == "csv":
        try:
            samples = np.array([float(v) for v in payload.decode("ascii").split()])
        except (UnicodeDecodeError, ValueError) as exc:
            raise GridFormatError(f"bad csv payload: {exc}") from exc
        if samples.size != count:
            raise GridFormatError(f"expected {count} samples, got {samples.size}")
    else:
        raise GridFormatError(f"unknown format {fmt!r}")
    if not np.all(np.isfinite(samples)):
        raise GridFormatError("non-finite sample values")
    return GridFunction(box, J, samples.reshape((int(npa),) * dims))
