"""Wavelet paraproduct decomposition of pointwise products on the grid.

With ``a_j = P_j f`` and ``b_j = P_j g`` sampled on the finest grid::

    pi1 = sum_j a_j (b_{j+1} - b_j)
    pi2 = sum_j (a_{j+1} - a_j) b_j
    pi3 = sum_j (a_{j+1} - a_j)(b_{j+1} - b_j)
    coarse = a_{j0} b_{j0}

and the four pieces telescope to ``f g`` because grid functions lie in
``V_J``.  ``S = pi3`` and ``T = pi1 + pi2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GeometryError
from .filters import DEFAULT_FILTER, load_filter
from .grid import Box, DyadicCube, GridFunction, integrate, inner_product
from .spaces import bmo_wavelet_norm, h1_square_norm, lp_norm
from .wavelet import WaveletCoeffs, dwt_forward, dwt_inverse, projections, synthesize


@dataclass(frozen=True, eq=False)
class ProductSplit:
    pi1: GridFunction
    pi2: GridFunction
    pi3: GridFunction
    coarse_term: GridFunction
    j0: int
    folded: bool = False

    @property
    def S(self):
        return self.pi3

    @property
    def T(self):
        return self.pi1 + self.pi2

    def total(self) -> GridFunction:
        return self.pi1 + self.pi2 + self.pi3 + self.coarse_term


def paraproduct_split(f: GridFunction, g: GridFunction, j0: int = 0, filt=DEFAULT_FILTER, fold_coarse=None):
    """Split ``f g`` into ``pi1 + pi2 + pi3 + coarse_term``.

    ``fold_coarse='pi2'`` adds ``P_{j0}f P_{j0}g`` to ``pi2`` (then
    ``coarse_term`` is zero); when ``P_{j0} f = 0`` this is exactly
    ``f P_{j0} g + sum_j Q_j f sum_{j0 <= i < j} Q_i g``.
    """
    f.require_same_geometry(g)
    if fold_coarse not in (None, "pi2"):
        raise ValueError("fold_coarse must be None or 'pi2'")
    filt = load_filter(filt)
    a = [p.samples for p in projections(f, j0, filt)]
    b = [p.samples for p in projections(g, j0, filt)]
    pi1 = np.zeros_like(f.samples)
    pi2 = np.zeros_like(f.samples)
    pi3 = np.zeros_like(f.samples)
    for i in range(len(a) - 1):
        da = a[i + 1] - a[i]
        db = b[i + 1] - b[i]
        pi1 += a[i] * db
        pi2 += da * b[i]
        pi3 += da * db
    coarse = a[0] * b[0]
    if fold_coarse == "pi2":
        pi2 = pi2 + coarse
        coarse = np.zeros_like(coarse)
    w = f.with_samples
    return ProductSplit(w(pi1), w(pi2), w(pi3), w(coarse), j0, fold_coarse == "pi2")


def detail_projections(f: GridFunction, j0: int = 0, filt=DEFAULT_FILTER):
    """``Q_j f = P_{j+1} f - P_j f`` for ``j = j0..J-1``."""
    p = projections(f, j0, filt)
    return [p[i + 1] - p[i] for i in range(len(p) - 1)]


def pi3_l1_bound(f: GridFunction, g: GridFunction, j0: int = 0, filt=DEFAULT_FILTER):
    """``(||pi3||_1, sum_j ||Q_j f||_2 ||Q_j g||_2, ||f||_2 ||g||_2)``."""
    split = paraproduct_split(f, g, j0, filt)
    qf = detail_projections(f, j0, filt)
    qg = detail_projections(g, j0, filt)
    middle = sum(lp_norm(x, 2) * lp_norm(y, 2) for x, y in zip(qf, qg))
    return lp_norm(split.pi3, 1), float(middle), lp_norm(f, 2) * lp_norm(g, 2)


# ---------------------------------------------------------------------------
# diagonal part S0 and molecules


_PROFILE_CACHE: dict = {}


def _profiles(filt, side, J, j):
    """1D samples of ``phi_{j,0}`` and ``psi_{j,0}`` on a box of the given side."""
    key = (filt.name, filt.lowpass.tobytes(), float(side), J, j)
    hit = _PROFILE_CACHE.get(key)
    if hit is None:
        box = Box((0.0,), side, 1)
        phi = synthesize(DyadicCube(j, (0,)), box, J, filt).samples
        psi = synthesize(DyadicCube(j, (0,), (1,)), box, J, filt).samples
        hit = _PROFILE_CACHE.setdefault(key, (phi, psi))
    return hit


def _spread(w, profiles, stride):
    """``sum_a w[a] prod_d p_d(x_d - a_d stride)`` by periodic convolution per axis."""
    out = w
    for axis, p in enumerate(profiles):
        N = p.shape[0]
        up_shape = list(out.shape)
        up_shape[axis] = N
        up = np.zeros(up_shape)
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(0, N, stride)
        up[tuple(sl)] = out
        kern = np.fft.rfft(p).reshape([1] * axis + [-1] + [1] * (out.ndim - axis - 1))
        out = np.fft.irfft(np.fft.rfft(up, axis=axis) * kern, n=N, axis=axis)
    return out


def s0(fc: WaveletCoeffs, gc: WaveletCoeffs) -> GridFunction:
    """``sum_{I,lam} <f,psi_I^lam> <g,psi_I^lam> |psi_I^lam|^2`` on the finest grid."""
    if not fc.compatible(gc):
        raise GeometryError("s0 needs coefficients in the same basis")
    n = fc.n
    N = 2 ** fc.J * int(fc.box.side)
    out = np.zeros((N,) * n)
    for j in fc.levels:
        w = fc.detail[j] * gc.detail[j]
        if not np.any(w):
            continue
        phi, psi = _profiles(fc.filter, fc.box.side, fc.J, j)
        sq = (phi**2, psi**2)
        stride = 2 ** (fc.J - j)
        for i, lam in enumerate(fc.labels):
            if np.any(w[i]):
                out += _spread(w[i], [sq[b] for b in lam], stride)
    return GridFunction(fc.box, fc.J, out)


def neighbor_offsets(m: int, n: int):
    """Integer points of ``(-m, m]**n``."""
    return list(itertools.product(range(-m + 1, m + 1), repeat=n))


def _min_image(k, N):
    k = k % N
    return k - N if k > N // 2 else k


@dataclass
class MoleculeReport:
    remainder: GridFunction
    max_cross_mean: float
    supports_ok: bool
    offsets_in_K: bool
    integral: float
    checked: int = 0

    def __iter__(self):
        yield self.remainder
        yield self.max_cross_mean


def _cross_factor_checks(filt, side, J, j, m):
    """Per-axis products ``q_b(x) q_b'(x - k stride)`` for 1D profiles.

    Returns ``{(b, b2, k): (integral, support_ok, nonzero)}`` for min-image
    offsets ``|k| <= m + 1``.
    """
    phi, psi = _profiles(filt, side, J, j)
    prof = (phi, psi)
    N = phi.shape[0]
    Nj = N // 2 ** (J - j)
    stride = N // Nj
    h = side / N
    centers = (np.arange(N) + 0.5) * h
    half = m * 2.0 ** (-j) / 2
    c0 = 0.5 * 2.0 ** (-j)
    dist = np.abs((centers - c0 + side / 2) % side - side / 2)
    inside = dist < half + 1e-12
    out = {}
    ks = sorted({_min_image(k, Nj) for k in range(-m - 1, m + 2)})
    for b, b2 in itertools.product((0, 1), repeat=2):
        for k in ks:
            prod = prof[b] * np.roll(prof[b2], k * stride)
            out[(b, b2, k)] = (h * float(np.sum(prod)), bool(np.all(prod[~inside] == 0)), bool(np.any(prod)))
    return out


def molecule_remainder(f: GridFunction, g: GridFunction, j0: int = 0, filt=DEFAULT_FILTER) -> MoleculeReport:
    """``pi3 - S0`` together with checks on every off-diagonal product ``psi_I psi_I'``.

    Cross products at one scale are checked through one representative per
    (level, labels, offset); for tensor wavelets both the integral and the
    support factor over axes.
    """
    filt = load_filter(filt)
    fc = dwt_forward(f, j0, filt)
    gc = dwt_forward(g, j0, filt)
    rem = paraproduct_split(f, g, j0, filt).pi3 - s0(fc, gc)
    m, n = filt.m, f.n
    labs = fc.labels
    worst, supports_ok, offsets_ok, checked = 0.0, True, True, 0
    for j in fc.levels:
        df = fc.detail[j]
        dg = gc.detail[j]
        if not (np.any(df) and np.any(dg)):
            continue
        Nj = df.shape[1]
        factors = _cross_factor_checks(filt, f.box.side, f.J, j, m)
        ks = sorted({_min_image(k, Nj) for k in range(-m - 1, m + 2)})
        for (i1, lam), (i2, lam2) in itertools.product(enumerate(labs), repeat=2):
            for koff in itertools.product(ks, repeat=n):
                if lam == lam2 and not any(koff):
                    continue
                # only pairs actually present in f and g contribute
                shifted = np.roll(dg[i2], tuple(-k for k in koff), axis=tuple(range(n)))
                if not np.any(df[i1] * shifted):
                    continue
                parts = [factors[(lam[d], lam2[d], koff[d])] for d in range(n)]
                integral = math.prod(p[0] for p in parts)
                nonzero = all(p[2] for p in parts)
                checked += 1
                worst = max(worst, abs(integral))
                supports_ok &= all(p[1] for p in parts)
                if nonzero and not all(-m < k <= m for k in koff):
                    offsets_ok = False
    return MoleculeReport(rem, worst, supports_ok, offsets_ok, integrate(rem), checked)


# ---------------------------------------------------------------------------
# almost-diagonal matrix and the bilinear form B


def p_delta(I: DyadicCube, I2: DyadicCube, delta: float = 1.0, period=None) -> float:
    """``2^{-|j-j'|(delta+n/2)} ((l+l')/(l+l'+|x_I-x_I'|))^{n+delta}`` with sides ``l, l'``.

    ``period`` switches to minimal-image distance on a periodic box.
    """
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if I.n != I2.n:
        raise GeometryError("cubes of different dimension")
    n = I.n
    diff = np.subtract(I.center, I2.center)
    if period is not None:
        diff = (diff + period / 2) % period - period / 2
    dist = float(np.sqrt(np.sum(diff**2)))
    s = I.side + I2.side
    return 2.0 ** (-abs(I.j - I2.j) * (delta + n / 2)) * (s / (s + dist)) ** (n + delta)


def _require_odd(A):
    if not getattr(A, "odd", False):
        raise DomainError(f"operator {getattr(A, 'name', A)!r} is not odd")


@dataclass
class BFormReport:
    B: GridFunction
    h1_B: float
    mean_B: float
    h1_f: float
    bmo_g: float
    ratio: float
    pairing_sum: float
    pairing_ratio: float
    skew_residual: float


def bilinear_B(fc: WaveletCoeffs, gc: WaveletCoeffs, A) -> BFormReport:
    """``B(f, g) = S0(Af, g) + S0(f, Ag)`` with its ``H^1`` proxy.

    ``h1_B`` is the square-function norm of B after removing its coarse
    projection (``mean_B`` reports what was removed).  ``pairing_sum`` is
    ``sum |<f,psi_I>| |<g,psi_I>|`` and ``pairing_ratio`` divides it by
    ``||f||_H1 ||g||_BMO``.
    """
    _require_odd(A)
    if not fc.compatible(gc):
        raise GeometryError("bilinear_B needs coefficients in the same basis")
    f = dwt_inverse(fc)
    g = dwt_inverse(gc)
    Af = A.apply(f)
    Ag = A.apply(g)
    Afc = dwt_forward(Af, fc.j0, fc.filter)
    Agc = dwt_forward(Ag, fc.j0, fc.filter)
    B = s0(Afc, gc) + s0(fc, Agc)
    Bc = dwt_forward(B, fc.j0, fc.filter)
    h1_B = h1_square_norm(Bc.with_zero_scaling())
    h1_f = h1_square_norm(fc.with_zero_scaling())
    bmo_g = bmo_wavelet_norm(gc)
    pairing = float(sum(np.sum(np.abs(fc.detail[j] * gc.detail[j])) for j in fc.levels))
    denom = h1_f * bmo_g
    skew = inner_product(Af, f) / max(inner_product(f, f), 1e-300)
    return BFormReport(
        B=B,
        h1_B=h1_B,
        mean_B=integrate(B) / B.box.volume,
        h1_f=h1_f,
        bmo_g=bmo_g,
        ratio=h1_B / denom if denom > 0 else math.inf,
        pairing_sum=pairing,
        pairing_ratio=pairing / denom if denom > 0 else math.inf,
        skew_residual=skew,
    )


@dataclass
class CZMatrixReport:
    constant: float
    delta: float
    pairs: int
    worst_pair: tuple = field(default=())


def cz_matrix_constant(A, box: Box, J: int, levels, delta=1.0, filt=DEFAULT_FILTER, max_per_level=None):
    """``max |<A psi_I, psi_I'>| / p_delta(I, I')`` over wavelets at the given levels.

    Distances are periodic (the transforms live on the torus).
    """
    _require_odd(A)
    filt = load_filter(filt)
    from .wavelet import labels as _labels

    n = box.dims
    cubes = []
    for j in levels:
        Nj = int(box.side * 2**j)
        ks = list(itertools.product(range(Nj), repeat=n))
        if max_per_level is not None:
            ks = ks[:max_per_level]
        cubes.extend(DyadicCube(j, k, lam) for k in ks for lam in _labels(n))
    funcs = [synthesize(c, box, J, filt) for c in cubes]
    images = [A.apply(fn) for fn in funcs]
    worst, arg = 0.0, ()
    for a, Ia in enumerate(cubes):
        for b, Ib in enumerate(cubes):
            val = abs(inner_product(images[a], funcs[b]))
            ratio = val / p_delta(Ia, Ib, delta, period=box.side)
            if ratio > worst:
                worst, arg = ratio, (Ia, Ib)
    return CZMatrixReport(worst, delta, len(cubes) ** 2, arg)
