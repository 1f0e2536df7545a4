"""Fourier multipliers on the periodic grid and the curl-free / div-free
product pipeline.

Frequencies are ``xi = fftfreq(N, h)`` in cycles per unit length.  Modes with
a Nyquist coordinate are dropped by every odd multiplier: there the symbol
cannot be odd and the output real at the same time.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, GeometryError, NumericalError
from .filters import DEFAULT_FILTER
from .grid import GridFunction, integrate
from .paraproduct import paraproduct_split
from .spaces import GrandMaximalParams, bmo_plus_norm, h1_square_norm, hlog_norm, lp_norm
from .wavelet import dwt_forward


def _frequencies(f: GridFunction):
    N = f.cells_per_axis
    xi = np.fft.fftfreq(N, d=f.h)
    grids = np.meshgrid(*([xi] * f.n), indexing="ij")
    nyq = np.zeros(grids[0].shape, dtype=bool)
    if N % 2 == 0:
        idx = np.meshgrid(*([np.arange(N)] * f.n), indexing="ij")
        for ix in idx:
            nyq |= ix == N // 2
    return grids, nyq


@dataclass(frozen=True, eq=False)
class MultiplierOperator:
    """``f -> ifft(symbol(xi) * fft(f))``; ``symbol`` takes the list of frequency grids."""

    symbol: object
    odd: bool
    name: str = "multiplier"
    residue_tol: float = 1e-10

    def multiplier(self, f: GridFunction):
        xi, nyq = _frequencies(f)
        m = np.asarray(self.symbol(xi), dtype=complex)
        if self.odd:
            m = np.where(nyq, 0.0, m)
        return m

    def apply(self, f: GridFunction) -> GridFunction:
        out = np.fft.ifftn(self.multiplier(f) * np.fft.fftn(f.samples))
        scale = max(1.0, float(np.max(np.abs(f.samples))))
        residue = float(np.max(np.abs(out.imag))) / scale
        if residue > self.residue_tol:
            raise NumericalError(f"{self.name}: imaginary residue {residue:.3g}", residue=residue)
        return f.with_samples(out.real.copy())

    __call__ = apply

    def oddness_defect(self, f: GridFunction) -> float:
        """``max |m(-xi) + m(xi)|`` over the grid frequencies."""
        m = self.multiplier(f)
        flipped = m
        for axis in range(f.n):
            flipped = np.roll(np.flip(flipped, axis=axis), 1, axis=axis)
        return float(np.max(np.abs(m + flipped)))


def _riesz_symbol(axis):
    def symbol(xi):
        r = np.sqrt(sum(x * x for x in xi))
        safe = np.where(r == 0, 1.0, r)
        return np.where(r == 0, 0.0, -1j * xi[axis] / safe)

    return symbol


def riesz_operator(axis: int) -> MultiplierOperator:
    return MultiplierOperator(_riesz_symbol(axis), odd=True, name=f"riesz[{axis}]")


def hilbert_operator() -> MultiplierOperator:
    return MultiplierOperator(_riesz_symbol(0), odd=True, name="hilbert")


def riesz_transform(f: GridFunction, axis: int) -> GridFunction:
    if not 0 <= axis < f.n:
        raise DomainError(f"axis {axis} out of range for n={f.n}")
    return riesz_operator(axis).apply(f)


def hilbert_transform(f: GridFunction) -> GridFunction:
    if f.n != 1:
        raise DomainError("the Hilbert transform is one-dimensional; use riesz_transform")
    return hilbert_operator().apply(f)


def derivative_operator(axis: int) -> MultiplierOperator:
    return MultiplierOperator(lambda xi: 2j * math.pi * xi[axis], odd=True, name=f"d/dx{axis}")


def _d(f, axis):
    return derivative_operator(axis).apply(f)


@dataclass(frozen=True, eq=False)
class VectorField:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise GeometryError("empty vector field")
        for c in comps[1:]:
            comps[0].require_same_geometry(c)
        object.__setattr__(self, "components", comps)

    @property
    def n(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def dot(self, other: "VectorField") -> GridFunction:
        out = self[0] * other[0]
        for a, b in zip(self.components[1:], other.components[1:]):
            out = out + a * b
        return out

    def l2_norm(self) -> float:
        return math.sqrt(sum(lp_norm(c, 2) ** 2 for c in self))


def curl_residual(F: VectorField) -> float:
    """Sup norm of ``d1 F2 - d2 F1``, relative to the largest first derivative."""
    if F.n != 2:
        raise DomainError("curl is implemented for n = 2")
    a, b = _d(F[1], 0), _d(F[0], 1)
    scale = max(1.0, float(np.max(np.abs(a.samples))), float(np.max(np.abs(b.samples))))
    return float(np.max(np.abs((a - b).samples))) / scale


def div_residual(G: VectorField) -> float:
    parts = [_d(G[i], i) for i in range(G.n)]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    scale = max([1.0] + [float(np.max(np.abs(p.samples))) for p in parts])
    return float(np.max(np.abs(total.samples))) / scale


def potential_fields(u: GridFunction, v: GridFunction, tol=1e-10):
    """``F = grad u`` (curl-free) and ``G = (-d2 v, d1 v)`` (div-free), both spectral."""
    u.require_same_geometry(v)
    if u.n != 2:
        raise DomainError("potential_fields needs n = 2")
    F = VectorField((_d(u, 0), _d(u, 1)))
    G = VectorField((-_d(v, 1), _d(v, 0)))
    rc, rd = curl_residual(F), div_residual(G)
    if rc > tol or rd > tol:
        raise NumericalError(f"potential fields: curl {rc:.3g}, div {rd:.3g}", curl=rc, div=rd)
    return F, G


@dataclass
class DivCurlReport:
    curl_residual: float
    div_residual: float
    riesz_identity_residual: float
    integral_FG: float
    hlog: float
    h1_F: float
    bmo_plus_G: float
    ratio: float
    # library-only diagnostics
    l2_F: float = 0.0
    l2_G: float = 0.0
    potential_recovery_residual: float = 0.0
    split_residual: float = 0.0
    cancellation_residual: float = 0.0
    h1_G: float = 0.0
    bmo_plus_F: float = 0.0
    ratio_swapped: float = 0.0
    product: GridFunction | None = field(default=None, repr=False)

    SCHEMA = ("curl_residual", "div_residual", "riesz_identity_residual", "integral_FG", "hlog", "h1_F", "bmo_plus_G", "ratio")

    def to_dict(self):
        return {k: float(getattr(self, k)) for k in self.SCHEMA}

    def full_dict(self):
        d = asdict(self)
        d.pop("product")
        return d


def _h1_proxy(F: VectorField, j0, filt):
    """Sum over components of the square-function norm with the coarse part removed."""
    return sum(h1_square_norm(dwt_forward(c, j0, filt).with_zero_scaling()) for c in F)


def _bmo_plus(F: VectorField, j0, filt):
    return sum(bmo_plus_norm(c, dwt_forward(c, j0, filt)) for c in F)


def divcurl_product(F: VectorField, G: VectorField, j0: int = 0, filt=DEFAULT_FILTER, params: GrandMaximalParams | None = None, tol=1e-8) -> DivCurlReport:
    """Run the curl-free/div-free product pipeline and collect its identities and norms."""
    if F.n != G.n:
        raise GeometryError("F and G have different numbers of components")
    F[0].require_same_geometry(G[0])
    n = F.n
    rc = curl_residual(F) if n == 2 else 0.0
    rd = div_residual(G)
    if rc > tol or rd > tol:
        raise DomainError(f"inputs are not curl-free/div-free: curl {rc:.3g}, div {rd:.3g}")

    RG = riesz_transform(G[0], 0)
    for i in range(1, n):
        RG = RG + riesz_transform(G[i], i)
    riesz_res = float(np.max(np.abs(RG.samples)))

    # scalar potential with F_j = R_j f
    f = -riesz_transform(F[0], 0)
    for i in range(1, n):
        f = f - riesz_transform(F[i], i)
    recovery = max(float(np.max(np.abs((riesz_transform(f, i) - F[i]).samples))) for i in range(n))

    FG = F.dot(G)
    total = None
    S_sum = None
    for i in range(n):
        sp = paraproduct_split(F[i], G[i], j0, filt, fold_coarse="pi2")
        piece = sp.S + sp.T
        total = piece if total is None else total + piece
        S_sum = sp.S if S_sum is None else S_sum + sp.S
    split_res = float(np.max(np.abs((total - FG).samples)))

    # S(R_j f, G_j) + S(f, R_j G_j) summed over j, against sum_j S(F_j, G_j)
    alt = None
    for i in range(n):
        t = paraproduct_split(riesz_transform(f, i), G[i], j0, filt).S
        t = t + paraproduct_split(f, riesz_transform(G[i], i), j0, filt).S
        alt = t if alt is None else alt + t
    cancel = float(np.max(np.abs((alt - S_sum).samples)))

    integral = integrate(FG)
    hl = hlog_norm(FG, params)
    h1F = _h1_proxy(F, j0, filt)
    bpG = _bmo_plus(G, j0, filt)
    h1G = _h1_proxy(G, j0, filt)
    bpF = _bmo_plus(F, j0, filt)
    return DivCurlReport(
        curl_residual=rc,
        div_residual=rd,
        riesz_identity_residual=riesz_res,
        integral_FG=integral,
        hlog=hl,
        h1_F=h1F,
        bmo_plus_G=bpG,
        ratio=hl / (h1F * bpG) if h1F * bpG > 0 else 0.0,
        l2_F=F.l2_norm(),
        l2_G=G.l2_norm(),
        potential_recovery_residual=recovery,
        split_residual=split_res,
        cancellation_residual=cancel,
        h1_G=h1G,
        bmo_plus_F=bpF,
        ratio_swapped=hl / (h1G * bpF) if h1G * bpF > 0 else 0.0,
        product=FG,
    )
