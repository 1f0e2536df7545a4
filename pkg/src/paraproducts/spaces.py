"""Function-space functionals on grid functions and wavelet coefficients.

Musielak-Orlicz growth ``theta(x, t) = t / (log(e + |x|) + log(e + t))``, the
Luxemburg gauge of ``L^log``, quadrature ``L^p`` norms, dyadic BMO and BMO+
through wavelet coefficients, the ``H^1`` square-function norm, a
single-kernel grand maximal proxy and the ``H^log`` gauge built on it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, GeometryError, NumericalError
from .grid import DyadicCube, GridFunction
from .wavelet import WaveletCoeffs, cells_at_level

E = math.e


def _radius(x):
    x = np.asarray(x, dtype=float)
    return np.abs(x) if x.ndim == 0 else np.sqrt(np.sum(x**2, axis=-1))


def theta(x, t):
    """Growth function at point(s) ``x`` (last axis = coordinates; scalar in 1D)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("theta is defined for t >= 0 only")
    return _theta_r(_radius(x), t)


def _theta_r(r, t):
    return t / (np.log(E + r) + np.log(E + t))


def _weights_radius(f: GridFunction):
    pts = f.points(physical=True)
    return np.sqrt(sum(p**2 for p in pts))


def log_modular(f: GridFunction, lam: float) -> float:
    """``int theta(x, |f(x)| / lam) dx`` by midpoint quadrature."""
    return float(f.cell_volume * np.sum(_theta_r(_weights_radius(f), np.abs(f.samples) / lam)))


def luxemburg_log_norm(f: GridFunction, rtol=1e-12, max_iter=200) -> float:
    """``inf{lam > 0 : int theta(x, |f|/lam) <= 1}`` by geometric bisection.

    The modular is continuous and strictly decreasing in ``lam`` wherever it
    is positive, so the root is bracketed by ``[tiny, ||f||_inf |box| + 1]``
    (``theta(x, t) <= t/2`` forces the modular below 1/2 at the upper end).
    """
    a = np.abs(f.samples).ravel()
    sup = float(a.max()) if a.size else 0.0
    if sup == 0.0:
        return 0.0
    r = _weights_radius(f).ravel()
    w = f.cell_volume

    def modular(lam):
        return w * float(np.sum(_theta_r(r, a / lam)))

    lo = sup * 1e-280
    hi = sup * f.box.volume + 1.0
    if modular(lo) <= 1.0 or modular(hi) > 1.0:
        raise NumericalError("Luxemburg bracket does not enclose the root", bracket=(lo, hi))
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        if modular(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 <= rtol:
            return math.sqrt(lo * hi)
    raise NumericalError("Luxemburg bisection did not converge", bracket=(lo, hi))


def lp_norm(f: GridFunction, p=2) -> float:
    if p in (np.inf, "inf", "∞"):
        return float(np.max(np.abs(f.samples)))
    if p == 1:
        return float(f.cell_volume * np.sum(np.abs(f.samples)))
    if p == 2:
        return float(math.sqrt(f.cell_volume * np.sum(f.samples**2)))
    raise ValueError(f"p must be 1, 2 or inf, got {p!r}")


# ---------------------------------------------------------------------------
# dyadic BMO and H^1 via wavelet coefficients


def _coarse_sum(arr, n):
    """Sum each 2**n block of children into its parent cube."""
    N = arr.shape[0] // 2
    return arr.reshape(sum(((N, 2) for _ in range(n)), ())).sum(axis=tuple(range(1, 2 * n, 2)))


def _upsample(arr, n):
    for axis in range(n):
        arr = np.repeat(arr, 2, axis=axis)
    return arr


def tree_energies(c: WaveletCoeffs):
    """``{level: array}`` of ``sum_{I subset R} sum_lam c_I^2`` for every dyadic ``R``."""
    n = c.n
    top = -int(round(math.log2(c.box.side)))
    out = {}
    acc = np.zeros((cells_at_level(c.box, c.J),) * n)
    out[c.J] = acc
    for j in range(c.J - 1, top - 1, -1):
        acc = _coarse_sum(acc, n)
        if j in c.detail:
            acc = acc + np.sum(c.detail[j] ** 2, axis=0)
        out[j] = acc
    return out


def bmo_wavelet_norm(c: WaveletCoeffs) -> float:
    """``sup_R (|R|^-1 sum_{I subset R, lam} |c_I^lam|^2)^(1/2)`` over dyadic ``R`` in the box."""
    best = 0.0
    for j, energy in tree_energies(c).items():
        vol = 2.0 ** (-j * c.n)
        best = max(best, float(np.max(energy)) / vol)
    return math.sqrt(best)


def mean_over(f: GridFunction, cube=None) -> float:
    """Mean of ``f`` over a dyadic cube (default the unit cube at the box origin)."""
    cube = cube if cube is not None else DyadicCube(0, (0,) * f.n)
    if cube.j < f.coarsest_level or cube.j > f.J:
        raise GeometryError(f"cube {cube} does not fit the grid")
    npa = cells_at_level(f.box, cube.j)
    if any(not 0 <= k < npa for k in cube.k):
        raise GeometryError(f"cube {cube} lies outside the box")
    s = 2 ** (f.J - cube.j)
    block = f.samples[tuple(slice(k * s, (k + 1) * s) for k in cube.k)]
    return float(np.mean(block))


def bmo_plus_norm(f: GridFunction, c: WaveletCoeffs, base_cube=None) -> float:
    """``|f_Q| + ||f||_BMO`` with ``Q = [0,1)^n`` at the box origin unless given."""
    return abs(mean_over(f, base_cube)) + bmo_wavelet_norm(c)


def square_function_sq(c: WaveletCoeffs) -> np.ndarray:
    """``sum_{I,lam} |c_I^lam|^2 |I|^-1 chi_I`` sampled on the finest grid."""
    n = c.n
    acc = np.zeros_like(c.scaling)
    for j in c.levels:
        acc = acc + np.sum(c.detail[j] ** 2, axis=0) * 2.0 ** (j * n)
        acc = _upsample(acc, n)
    return acc


def h1_square_norm(c: WaveletCoeffs, scaling_tol=1e-12) -> float:
    """L1 norm of the wavelet square function.

    Only the oscillatory content is measured: a nonzero scaling part is
    rejected (subtract the coarse projection first, e.g. ``c.with_zero_scaling()``).
    """
    size = math.sqrt(c.detail_energy())
    if np.sqrt(np.sum(c.scaling**2)) > scaling_tol * max(1.0, size):
        raise DomainError("h1_square_norm needs a zero scaling part; remove the coarse projection")
    h = 2.0 ** (-c.J)
    return float(h**c.n * np.sum(np.sqrt(square_function_sq(c))))


# ---------------------------------------------------------------------------
# grand maximal proxy


def _gaussian_fclass_amplitude(n):
    """Largest ``c`` with ``c (1+r) e^{-r^2/2} <= (1+r)^-(n+1)`` for all ``r``."""
    r = (-1 + math.sqrt(1 + 4 * (n + 2))) / 2
    return 1.0 / ((1 + r) ** (n + 2) * math.exp(-(r**2) / 2))


@dataclass(frozen=True)
class GrandMaximalParams:
    """Kernel ``Phi(x) = amplitude * exp(-|x|^2/2)`` at dyadic scales ``2**-j``.

    ``levels=None`` uses every level from the whole box down to the cell size.
    The default amplitude sits 10% under the largest admissible value for
    ``|Phi| + |grad Phi| <= (1+|x|)^-(n+1)``.
    """

    n: int = 1
    amplitude: float | None = None
    levels: tuple | None = None
    margin: float = 0.10
    images: int = 8

    def __post_init__(self):
        if self.amplitude is None:
            object.__setattr__(
                self, "amplitude", (1 - self.margin) * _gaussian_fclass_amplitude(self.n)
            )

    def kernel(self, x):
        r = _radius(x)
        return self.amplitude * np.exp(-(r**2) / 2)

    def fclass_excess(self, r=None) -> float:
        """max over ``r`` of ``(|Phi| + |grad Phi|) / (1+r)^-(n+1)``; must be <= 1."""
        if r is None:
            r = np.concatenate([np.linspace(0, 60, 120001), [(-1 + math.sqrt(4 * self.n + 9)) / 2]])
        val = self.amplitude * np.exp(-(r**2) / 2) * (1 + r)
        return float(np.max(val * (1 + r) ** (self.n + 1)))

    def validate(self, f: GridFunction | None = None):
        excess = self.fclass_excess()
        if f is not None:
            excess = max(excess, self.fclass_excess(_weights_radius(f).ravel()))
        if excess > 1.0:
            raise ConfigurationError(f"kernel violates the F-class bound by factor {excess:.4f}")
        return excess


def _periodic_gaussian_hat(N, h, t, images):
    """FFT of the 1D periodized Gaussian ``exp(-x^2/(2t^2))`` sampled at cell offsets."""
    d = np.arange(N) * h
    period = N * h
    k = np.zeros(N)
    for m in range(-images, images + 1):
        k += np.exp(-((d + m * period) ** 2) / (2 * t * t))
    return np.fft.fft(k)


def grand_maximal(f: GridFunction, params: GrandMaximalParams | None = None) -> GridFunction:
    """``max_t |f * Phi_t|`` over the dyadic scales, periodized on the box.

    A lower bound for the true grand maximal function, with one kernel only.
    """
    params = params or GrandMaximalParams(n=f.n)
    if params.n != f.n:
        raise ConfigurationError("kernel dimension does not match the grid")
    params.validate()
    levels = params.levels
    if levels is None:
        levels = range(f.coarsest_level, f.J + 1)
    N = f.cells_per_axis
    fhat = np.fft.fftn(f.samples)
    out = np.zeros_like(f.samples)
    for j in levels:
        t = 2.0 ** (-j)
        khat = _periodic_gaussian_hat(N, f.h, t, params.images)
        kern = khat
        for _ in range(f.n - 1):
            kern = np.multiply.outer(kern, khat)
        scale = params.amplitude * (f.h / t) ** f.n
        conv = np.real(np.fft.ifftn(fhat * kern)) * scale
        np.maximum(out, np.abs(conv), out=out)
    return f.with_samples(out)


def hlog_norm(f: GridFunction, params: GrandMaximalParams | None = None) -> float:
    return luxemburg_log_norm(grand_maximal(f, params))


# ---------------------------------------------------------------------------
# scalar inequality and generalized Holder ratio


def check_scalar_log_inequality(s, t, M):
    """Evaluate ``st/(M + log(e + st)) <= e^(t-M) + s``; returns ``(lhs, rhs, holds)``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    M = np.asarray(M, dtype=float)
    if np.any(M < 1):
        raise DomainError("M must be >= 1")
    if np.any(s <= 0) or np.any(t <= 0):
        raise DomainError("s and t must be positive")
    st = s * t
    lhs = st / (M + np.log(E + st))
    rhs = np.exp(t - M) + s
    holds = lhs <= rhs
    if lhs.ndim == 0:
        return float(lhs), float(rhs), bool(holds)
    return lhs, rhs, holds


@dataclass
class HolderReport:
    product_llog: float
    f_l1: float
    g_bmo_plus: float
    ratio: float


def holder_product_bound(f: GridFunction, g: GridFunction, g_coeffs: WaveletCoeffs) -> HolderReport:
    """``||fg||_{L^log} / (||f||_1 ||g||_{BMO+})``."""
    l1 = lp_norm(f, 1)
    bp = bmo_plus_norm(g, g_coeffs)
    if l1 == 0 or bp == 0:
        raise DomainError("generalized Holder ratio needs ||f||_1 > 0 and ||g||_BMO+ > 0")
    num = luxemburg_log_norm(f * g)
    return HolderReport(num, l1, bp, num / (l1 * bp))


# ---------------------------------------------------------------------------
# reports


@dataclass
class NormReport:
    norm: str
    value: float
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


NORM_NAMES = ("l1", "l2", "linf", "bmo", "bmo+", "h1", "llog", "hlog")


def norm_reports(f: GridFunction, names=("l1", "l2", "bmo", "bmo+", "h1", "llog", "hlog"), j0=0, filt="db3"):
    """Evaluate the requested norms of ``f`` as a list of :class:`NormReport`."""
    from .wavelet import dwt_forward

    coeffs = dwt_forward(f, j0, filt)
    wparams = {"filter": coeffs.filter.name, "j0": j0, "J": f.J}
    out = []
    for name in names:
        if name == "l1":
            out.append(NormReport(name, lp_norm(f, 1), {}, {"quadrature": "midpoint"}))
        elif name == "l2":
            out.append(NormReport(name, lp_norm(f, 2), {}, {"quadrature": "midpoint"}))
        elif name == "linf":
            out.append(NormReport(name, lp_norm(f, np.inf)))
        elif name == "bmo":
            out.append(NormReport(name, bmo_wavelet_norm(coeffs), {**wparams, "cubes": "dyadic"}))
        elif name == "bmo+":
            out.append(NormReport(name, bmo_plus_norm(f, coeffs), {**wparams, "base_cube": "[0,1)^n"}))
        elif name == "h1":
            out.append(
                NormReport(
                    name,
                    h1_square_norm(coeffs.with_zero_scaling()),
                    {**wparams, "coarse_projection_removed": True},
                )
            )
        elif name == "llog":
            out.append(NormReport(name, luxemburg_log_norm(f), {}, {"bisection_rtol": 1e-12}))
        elif name == "hlog":
            p = GrandMaximalParams(n=f.n)
            out.append(
                NormReport(
                    name,
                    hlog_norm(f, p),
                    {"kernel": "gaussian", "amplitude": p.amplitude, "scales": "dyadic"},
                    {"bisection_rtol": 1e-12},
                )
            )
        else:
            raise ValueError(f"unknown norm {name!r}; choose from {', '.join(NORM_NAMES)}")
    return out
