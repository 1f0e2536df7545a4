"""psi-atoms, their validation, the level-set atomic decomposition and the
splitting of ``pi2(a, g)`` for an atom ``a``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AtomError, DomainError, GeometryError
from .grid import Box, DyadicCube, GridFunction, dilate_cube, integrate
from .paraproduct import paraproduct_split
from .spaces import (
    GrandMaximalParams,
    _coarse_sum,
    bmo_wavelet_norm,
    grand_maximal,
    h1_square_norm,
    lp_norm,
    mean_over,
    square_function_sq,
)
from .wavelet import WaveletCoeffs, cells_at_level, dwt_forward, dwt_inverse, scaling_cascade, synthesize


def _box_level(box: Box) -> int:
    return -int(round(math.log2(box.side)))


def dilation_mask(box: Box, J: int, center, side) -> np.ndarray:
    """Cells whose midpoints lie in the cube of given center/side, modulo the box period.

    ``center`` is in box-local coordinates, like every ``DyadicCube``.
    """
    N = cells_at_level(box, J)
    h = box.side / N
    mids = (np.arange(N) + 0.5) * h
    mask = np.ones((N,) * box.dims, dtype=bool)
    for d in range(box.dims):
        if side >= box.side:
            continue
        c = center[d]
        dist = np.abs((mids - c + box.side / 2) % box.side - box.side / 2)
        inside = dist < side / 2 + 1e-12 * box.side
        shape = [1] * box.dims
        shape[d] = N
        mask &= inside.reshape(shape)
    return mask


@dataclass(frozen=True, eq=False)
class PsiAtom:
    coeffs: WaveletCoeffs
    R: DyadicCube
    l2_norm: float
    mean: float = 0.0
    function: GridFunction | None = field(default=None, repr=False)

    def synthesize(self) -> GridFunction:
        return self.function if self.function is not None else dwt_inverse(self.coeffs)


def _cube_in(I: DyadicCube, R: DyadicCube) -> bool:
    return R.contains(I)


def validate_psi_atom(a: WaveletCoeffs, R: DyadicCube, raise_on_error=True):
    """Check ``I subset R`` for all nonzero coefficients, ``||a||_2 <= |R|^-1/2``,
    zero mean and support in ``m R`` (periodically).

    Returns the :class:`PsiAtom`, or raises :class:`AtomError` listing every
    violation (with ``raise_on_error=False`` the list is returned instead).
    """
    violations = []
    if R.lam is not None:
        R = DyadicCube(R.j, R.k)
    if R.n != a.n:
        raise GeometryError("atom cube and coefficients differ in dimension")
    if np.any(a.scaling != 0):
        violations.append("nonzero scaling part: a psi-atom is a pure wavelet sum")
    outside = [cube for cube, _ in a.items(include_scaling=False) if not _cube_in(cube, R)]
    if outside:
        violations.append(f"{len(outside)} coefficient(s) on cubes not contained in R, e.g. {outside[0]}")
    l2 = math.sqrt(a.energy())
    bound = R.volume ** -0.5
    if l2 > bound * (1 + 1e-12):
        violations.append(f"L2 norm {l2:.6g} exceeds |R|^-1/2 = {bound:.6g}")
    fn = dwt_inverse(a)
    mean = integrate(fn)
    if abs(mean) > 1e-10 * max(1.0, lp_norm(fn, 1)):
        violations.append(f"integral {mean:.3g} is not zero")
    m = a.filter.m
    mR = dilate_cube(R, m)
    if not np.all(fn.samples[~dilation_mask(a.box, a.J, mR.center, mR.side)] == 0):
        violations.append(f"synthesis leaks outside the {m}-dilate of R")
    if violations:
        if raise_on_error:
            raise AtomError(f"not a psi-atom for {R}: " + "; ".join(violations), violations)
        return violations
    return PsiAtom(a, R, l2, mean, fn)


# ---------------------------------------------------------------------------
# level-set decomposition


@dataclass
class AtomicDecomposition:
    terms: list  # (mu, PsiAtom, R)
    l1_mass: float
    h1: float
    source: WaveletCoeffs = field(repr=False, default=None)

    @property
    def ratio(self):
        return self.l1_mass / self.h1 if self.h1 > 0 else (0.0 if self.l1_mass == 0 else math.inf)

    def reconstruct(self) -> WaveletCoeffs:
        out = WaveletCoeffs.zeros(self.source.box, self.source.J, self.source.j0, self.source.filter)
        for mu, atom, _ in self.terms:
            out = out + atom.coeffs * mu
        return out

    def reconstruction_error(self) -> float:
        diff = self.reconstruct() - self.source
        return math.sqrt(diff.energy())


def _blocks(arr, s, n):
    """View ``arr`` as ``(N/s,)*n + (s**n,)`` blocks of side ``s``."""
    N = arr.shape[0] // s
    x = arr.reshape(sum(((N, s) for _ in range(n)), ()))
    x = x.transpose(tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2)))
    return x.reshape((N,) * n + (s**n,))


def _generation(w):
    """Largest integer ``k`` with ``2**k < w`` (``w > 0``)."""
    mant, e = np.frexp(w)
    return np.where(mant == 0.5, e - 2, e - 1).astype(int)


def atomic_decompose(c: WaveletCoeffs, validate=True) -> AtomicDecomposition:
    """Level-set decomposition of a finite wavelet expansion into psi-atoms.

    ``Omega_k = {S > 2**k}`` with ``S`` the wavelet square function.  A cube
    ``I`` belongs to generation ``k`` when ``|I cap Omega_k| > |I|/2 >=
    |I cap Omega_{k+1}|``; cubes of one generation are grouped under the
    coarsest dyadic ancestor ``R`` still meeting ``Omega_k`` in more than half
    its volume (the maximal dyadic cubes of that set).  Each group becomes
    ``mu * a`` with ``mu = ||group||_2 |R|^(1/2)``.
    """
    size = math.sqrt(c.detail_energy())
    if np.any(np.abs(c.scaling) > 1e-12 * max(1.0, size)):
        raise DomainError("atomic_decompose needs a zero scaling part")
    n, J = c.n, c.J
    h1 = h1_square_norm(c) if size > 0 else 0.0
    if size == 0:
        return AtomicDecomposition([], 0.0, 0.0, c)
    S = np.sqrt(square_function_sq(c))
    top = _box_level(c.box)

    # generation of every cube carrying a coefficient
    gen = {}
    for j in c.levels:
        live = np.any(c.detail[j] != 0, axis=0)
        if not live.any():
            continue
        s = 2 ** (J - j)
        blocks = _blocks(S, s, n)
        half = s**n // 2
        # (half+1)-th largest value: |I cap {S > x}| > |I|/2 iff x < w
        w = -np.partition(-blocks, half, axis=-1)[..., half]
        gen[j] = (live, _generation(w))

    ks = sorted({int(k) for live, g in gen.values() for k in np.unique(g[live])})
    qualifies = {}
    for k in ks:
        above = (S > math.ldexp(1.0, k)).astype(np.int64)
        counts = {J: above}
        for j in range(J - 1, top - 1, -1):
            counts[j] = _coarse_sum(counts[j + 1], n)
        qualifies[k] = {j: 2 * counts[j] > 2 ** ((J - j) * n) for j in counts}

    groups: dict = {}
    for j, (live, g) in gen.items():
        for idx in zip(*np.nonzero(live)):
            k = int(g[idx])
            q = qualifies[k]
            R = None
            for jr in range(top, j + 1):
                anc = tuple(int(i) >> (j - jr) for i in idx)
                if q[jr][anc]:
                    R = DyadicCube(jr, anc)
                    break
            groups.setdefault((R, k), []).append((j, idx))

    terms = []
    for (R, k) in sorted(groups, key=lambda key: (key[0].j, key[0].k, key[1])):
        detail = {j: np.zeros_like(d) for j, d in c.detail.items()}
        for j, idx in groups[(R, k)]:
            sl = (slice(None),) + tuple(idx)
            detail[j][sl] = c.detail[j][sl]
        piece = c.copy(scaling=np.zeros_like(c.scaling), detail=detail)
        mu = math.sqrt(piece.energy()) * R.volume**0.5
        atom_c = piece * (1.0 / mu)
        atom = validate_psi_atom(atom_c, R) if validate else PsiAtom(atom_c, R, math.sqrt(atom_c.energy()))
        terms.append((mu, atom, R))
    l1 = float(sum(abs(t[0]) for t in terms))
    return AtomicDecomposition(terms, l1, h1, c)


# ---------------------------------------------------------------------------
# pi2(a, g) = h1 + kappa g_R h2


@dataclass
class Pi2AtomDiagnostics:
    g_R: float
    kappa: float
    b_l2: float
    b_bound: float
    bmo_g: float
    h_means: list
    h_norm_ratios: list
    h_norm_bound: float
    h_support_ok: bool
    gamma_integrals: list
    corrections: list
    correction_ratios: list
    split_residual: float
    neighbors: list

    @property
    def localization_ok(self):
        return self.b_l2 <= self.b_bound * (1 + 1e-10) + 1e-300

    @property
    def means_ok(self):
        return all(abs(v) <= 1e-8 for v in self.h_means)

    @property
    def gamma_ok(self):
        return all(abs(v) <= 1e-10 for v in self.gamma_integrals)

    @property
    def norms_ok(self):
        return all(r <= self.h_norm_bound * (1 + 1e-9) for r in self.h_norm_ratios)

    @property
    def passed(self):
        return self.localization_ok and self.means_ok and self.gamma_ok and self.norms_ok and self.h_support_ok


def _phi_profile(filt, depth=8):
    """Samples of ``phi`` at ``2**depth`` points per unit, on a box wide enough
    that the periodization does not overlap."""
    side = 2.0 ** math.ceil(math.log2(filt.m + 1))
    return synthesize(DyadicCube(0, (0,)), Box((0.0,), side, 1), depth, filt).samples


def _periodic_offset(a, b, N):
    d = (a - b) % N
    return d - N if d > N // 2 else d


def pi2_atom_split(a: PsiAtom, g: GridFunction, g_coeffs: WaveletCoeffs | None = None):
    """Write ``pi2(a, g) = h1 + kappa g_R h2`` at ``j0 = `` scale of ``R``.

    ``h1 = pi2(a, b) + sum_I (|I|^-1/2 <g,phi_I> - g_R) h_I`` where ``b`` keeps
    the wavelet coefficients of ``g`` on cubes inside ``2mR`` and
    ``h_I = |I|^(1/2) phi_I a`` runs over the scale-``R`` cubes whose
    ``m``-dilates meet ``mR``.  The second part is ``g_R a`` and
    ``h2 = a / kappa`` with ``kappa = ||a||_2 |mR|^(1/2)``, a unit classical
    atom for ``mR``.  Returns ``(h1, second, diagnostics)``.
    """
    if not isinstance(a, PsiAtom):
        raise AtomError("pi2_atom_split needs a validated PsiAtom")
    R = a.R
    fa = a.synthesize()
    fa.require_same_geometry(g)
    filt = a.coeffs.filter
    m, n = filt.m, g.n
    mR = dilate_cube(R, m)
    if not Box((0.0,) * n, g.box.side, n).contains(mR):
        raise GeometryError(f"the {m}-dilate of {R} leaves the box")
    j0 = R.j
    if g_coeffs is None:
        g_coeffs = dwt_forward(g, g.coarsest_level, filt)
    bmo = bmo_wavelet_norm(g_coeffs)

    # localized part b: coefficients of g on cubes I subset 2mR, levels >= j0
    gc = dwt_forward(g, j0, filt)
    L = R.side
    center_R = np.asarray(R.center)
    detail = {}
    for j in gc.levels:
        Nj = cells_at_level(g.box, j)
        ell = 2.0 ** (-j)
        keep = np.ones((Nj,) * n, dtype=bool)
        for d in range(n):
            cI = (np.arange(Nj) + 0.5) * ell
            dist = np.abs((cI - center_R[d] + g.box.side / 2) % g.box.side - g.box.side / 2)
            ok = dist <= m * L - ell / 2 + 1e-12
            shape = [1] * n
            shape[d] = Nj
            keep = keep & ok.reshape(shape)
        detail[j] = np.where(keep[None], gc.detail[j], 0.0)
    bc = gc.copy(scaling=np.zeros_like(gc.scaling), detail=detail)
    b = dwt_inverse(bc)
    b_l2 = math.sqrt(bc.energy())
    b_bound = (2 * m + 1) ** (n / 2) * R.volume**0.5 * bmo

    split_ab = paraproduct_split(fa, b, j0, filt, fold_coarse="pi2")

    g_R = mean_over(g, R)
    phi_coeffs = scaling_cascade(g, j0, filt)[j0]
    Nj0 = cells_at_level(g.box, j0)
    # scale-R cubes with offsets in (-m, m)^n, deduplicated modulo the period
    span = range(-(m - 1), m)
    offs = sorted({tuple(_periodic_offset(o, 0, Nj0) for o in off) for off in itertools.product(span, repeat=n)})
    support = dilation_mask(g.box, g.J, mR.center, mR.side)
    chiR = GridFunction.indicator(g.box, g.J, R) * (1.0 / R.volume)
    h1 = split_ab.pi2
    h_means, h_ratios, gammas, corrs, neighbors = [], [], [], [], []
    h_support_ok = True
    for o in offs:
        I = DyadicCube(j0, tuple((R.k[d] + o[d]) % Nj0 for d in range(n)))
        phi_I = synthesize(I, g.box, g.J, filt)
        hI = phi_I * fa * (I.volume**0.5)
        coef = float(phi_coeffs[I.k])
        corr = I.volume**-0.5 * coef - g_R
        h1 = h1 + hI * corr
        gamma = chiR - phi_I * (I.volume**-0.5)
        neighbors.append(I)
        h_means.append(integrate(hI))
        h_ratios.append(lp_norm(hI, 2) * mR.volume**0.5)
        h_support_ok &= bool(np.all(hI.samples[~support] == 0))
        gammas.append(integrate(gamma))
        corrs.append(corr)
    # |h_I| <= ||phi||_inf |a| gives ||h_I||_2 |mR|^1/2 <= ||phi||_inf^n m^(n/2)
    phi0 = _phi_profile(filt, g.J - j0)
    h_norm_bound = float(np.max(np.abs(phi0))) ** n * m ** (n / 2)
    second = fa * g_R
    kappa = a.l2_norm * mR.volume**0.5
    target = paraproduct_split(fa, g, j0, filt, fold_coarse="pi2").pi2
    scale = max(1.0, float(np.max(np.abs(target.samples))))
    resid = float(np.max(np.abs((h1 + second - target).samples))) / scale
    diag = Pi2AtomDiagnostics(
        g_R=g_R,
        kappa=kappa,
        b_l2=b_l2,
        b_bound=b_bound,
        bmo_g=bmo,
        h_means=h_means,
        h_norm_ratios=h_ratios,
        h_norm_bound=h_norm_bound,
        h_support_ok=h_support_ok,
        gamma_integrals=gammas,
        corrections=corrs,
        correction_ratios=[abs(cr) / bmo if bmo > 0 else (0.0 if cr == 0 else math.inf) for cr in corrs],
        split_residual=resid,
        neighbors=neighbors,
    )
    return h1, second, diag


def classical_atom_pairing(a, g: GridFunction, params: GrandMaximalParams | None = None, cube=None) -> float:
    """``int |g - g_Q| M(a)`` with the grand-maximal proxy; ``Q`` defaults to the atom's ``R``."""
    if isinstance(a, PsiAtom):
        fa, Q = a.synthesize(), cube or a.R
    else:
        fa, Q = a, cube
        if Q is None:
            raise DomainError("a plain grid function needs the cube Q")
    fa.require_same_geometry(g)
    Ma = grand_maximal(fa, params)
    osc = abs(g - mean_over(g, Q))
    return integrate(osc * Ma)
