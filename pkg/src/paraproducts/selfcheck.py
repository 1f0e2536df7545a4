"""The acceptance suite: eleven criteria, each returning a measured result.

``run_selfcheck(config)`` runs all of them and returns ``(exit_code, summary)``
where the exit code is 0 iff every criterion passes.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .atoms import atomic_decompose, pi2_atom_split, validate_psi_atom
from .config import RunConfig
from .corpus import CorpusSpec, PhiloxStream, gen_corpus
from .divcurl import hilbert_operator, hilbert_transform, divcurl_product, potential_fields
from .errors import ParaproductError
from .filters import filter_defects, load_filter, make_filter
from .grid import Box, DyadicCube, GridFunction, integrate
from .paraproduct import bilinear_B, molecule_remainder, p_delta, paraproduct_split, pi3_l1_bound
from .spaces import (
    _theta_r,
    check_scalar_log_inequality,
    holder_product_bound,
    lp_norm,
    luxemburg_log_norm,
)
from .wavelet import dwt_forward, dwt_inverse, synthesize

DB_FILTERS = tuple(f"db{k}" for k in range(2, 9))


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        meas = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] criterion {self.id:2d} {self.name}: {meas}" + (f" ({self.detail})" if self.detail else "")

    def to_dict(self):
        return asdict(self)


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    try:
        return f"{float(v):.3e}"
    except (TypeError, ValueError):
        return str(v)


def config_filter(cfg: RunConfig):
    """The configured filter, with ``filter_perturbation`` added to its first tap."""
    filt = load_filter(cfg.filter)
    if cfg.filter_perturbation:
        taps = np.array(filt.lowpass, dtype=float)
        taps[0] += cfg.filter_perturbation
        filt = make_filter(filt.name + "~", taps, filt.vanishing_moments, check=False)
    return filt


def _box(cfg, n):
    return Box((cfg.origin,) * n, cfg.side, n)


def _pairs(cfg, count, n, J, filt, seed_offset=0, levels=(0, 7)):
    box = _box(cfg, n)
    lo = -int(round(math.log2(box.side)))
    spec = CorpusSpec("finite-wavelet-random", {"levels": [lo + levels[0], min(lo + levels[1], J)]})
    items = gen_corpus(spec, cfg.seed + seed_offset, 2 * count, box, J, filt)
    return [(items[2 * i], items[2 * i + 1]) for i in range(count)]


def _stable(values_a, values_b, factor):
    a, b = max(values_a), max(values_b)
    finite = math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0
    change = max(a / b, b / a) if finite else math.inf
    return finite, change


# ---------------------------------------------------------------------------


def criterion_1(cfg: RunConfig) -> CriterionResult:
    """Filter bank: orthonormality, perfect reconstruction, Gram matrix, moments."""
    tol_rec, tol_gram, tol_mom, tol_orth = (cfg.tol(k) for k in ("reconstruction", "gram", "moment", "orthonormality"))
    filters = [load_filter(n) for n in DB_FILTERS]
    own = config_filter(cfg)
    if own.name not in DB_FILTERS or cfg.filter_perturbation:
        filters.append(own)
    J = cfg.J
    box = _box(cfg, 1)
    stream = PhiloxStream(cfg.seed, 0, 101)
    worst_orth = worst_rec = worst_gram = worst_mom = 0.0
    for filt in filters:
        d = filter_defects(filt.lowpass, filt.vanishing_moments)
        worst_orth = max(worst_orth, d["orthogonality"], d["sum"])
        f = GridFunction(box, J, stream.normal(2**J * int(box.side)))
        rec = dwt_inverse(dwt_forward(f, box_level(box), filt))
        worst_rec = max(worst_rec, np.max(np.abs(rec.samples - f.samples)) / np.max(np.abs(f.samples)))
        # 50 random wavelets, including repeats of nearby cubes
        cubes = set()
        while len(cubes) < 50:
            j = stream.integers(0, J)
            cubes.add(DyadicCube(j, (stream.integers(0, 2**j),), (1,)))
        cubes = sorted(cubes, key=lambda c: (c.j, c.k))
        mat = np.array([synthesize(c, box, J, filt).samples for c in cubes])
        gram = mat @ mat.T * (box.side / 2**J)
        worst_gram = max(worst_gram, float(np.max(np.abs(gram - np.eye(len(cubes))))))
        if filt.vanishing_moments >= 2:
            x = GridFunction.zeros(box, J).points(physical=False)[0]
            for j in (3, 5, 7):
                Nj = 2**j
                margin = math.ceil((filt.m - 1) / 2)
                if Nj <= 2 * margin:
                    continue
                k = stream.integers(margin, Nj - margin)
                psi = synthesize(DyadicCube(j, (k,), (1,)), box, J, filt).samples
                worst_mom = max(worst_mom, abs(float(np.sum(x * psi)) * box.side / 2**J))
    # tensor transform on the 2D grid
    box2 = _box(cfg, 2)
    f2 = GridFunction(box2, cfg.J2, stream.normal((2**cfg.J2,) * 2))
    rec2 = dwt_inverse(dwt_forward(f2, box_level(box2), own))
    worst_rec = max(worst_rec, np.max(np.abs(rec2.samples - f2.samples)) / np.max(np.abs(f2.samples)))
    passed = worst_orth <= tol_orth and worst_rec <= tol_rec and worst_gram <= tol_gram and worst_mom <= tol_mom
    return CriterionResult(
        1,
        "wavelet correctness",
        bool(passed),
        {"orthonormality": worst_orth, "reconstruction": worst_rec, "gram_offdiag": worst_gram, "moment": worst_mom},
        {"orthonormality": tol_orth, "reconstruction": tol_rec, "gram_offdiag": tol_gram, "moment": tol_mom},
        f"filters {', '.join(f.name for f in filters)}",
    )


def box_level(box):
    return -int(round(math.log2(box.side)))


def _split_corpus(cfg, filt):
    pairs = [(p, cfg.J) for p in _pairs(cfg, 90, 1, cfg.J, filt)]
    pairs += [(p, cfg.J2) for p in _pairs(cfg, 10, 2, cfg.J2, filt, seed_offset=1, levels=(0, 5))]
    return pairs


def criterion_2(cfg: RunConfig) -> CriterionResult:
    tol = cfg.tol("split")
    filt = config_filter(cfg)
    worst = 0.0
    sym = 0.0
    for (a, b), _ in _split_corpus(cfg, filt):
        f, g = a.function, b.function
        j0 = max(cfg.j0, f.coarsest_level)
        sp = paraproduct_split(f, g, j0, filt)
        scale = np.max(np.abs(f.samples)) * np.max(np.abs(g.samples))
        worst = max(worst, float(np.max(np.abs(sp.total().samples - (f * g).samples)) / scale))
        rev = paraproduct_split(g, f, j0, filt)
        sym = max(sym, float(np.max(np.abs(sp.pi2.samples - rev.pi1.samples))))
    return CriterionResult(
        2, "exact product splitting", bool(worst <= tol and sym == 0.0),
        {"split_residual": worst, "symmetry_defect": sym, "pairs": 100},
        {"split_residual": tol, "symmetry_defect": 0.0},
    )


def criterion_3(cfg: RunConfig) -> CriterionResult:
    tol = cfg.tol("chain")
    filt = config_filter(cfg)
    gap1 = gap2 = -math.inf
    for (a, b), _ in _split_corpus(cfg, filt):
        f, g = a.function, b.function
        l1, mid, cs = pi3_l1_bound(f, g, max(cfg.j0, f.coarsest_level), filt)
        gap1 = max(gap1, l1 - mid)
        gap2 = max(gap2, mid - cs)
    return CriterionResult(
        3, "pi3 chain", bool(gap1 <= tol and gap2 <= tol),
        {"max(l1-sum)": gap1, "max(sum-cauchy_schwarz)": gap2},
        {"slack": tol},
    )


def criterion_4(cfg: RunConfig) -> CriterionResult:
    tol_c, tol_m = cfg.tol("cancellation"), cfg.tol("cross_mean")
    filt = config_filter(cfg)
    worst_T = 0.0
    worst_cross = 0.0
    worst_rem = 0.0
    structure_ok = True
    corpus = _split_corpus(cfg, filt)
    for i, ((a, b), _) in enumerate(corpus):
        f, g = a.function, b.function
        j0 = f.coarsest_level
        norm = lp_norm(f, 2) * lp_norm(g, 2)
        sp = paraproduct_split(f, g, j0, filt)
        worst_T = max(worst_T, abs(integrate(sp.T)) / norm)
        if i % 5 == 0 or f.n == 2:
            rep = molecule_remainder(f, g, j0, filt)
            worst_cross = max(worst_cross, rep.max_cross_mean)
            worst_rem = max(worst_rem, abs(rep.integral) / norm)
            structure_ok &= rep.supports_ok and rep.offsets_in_K
    passed = worst_T <= tol_c and worst_cross <= tol_m and worst_rem <= tol_m and structure_ok
    return CriterionResult(
        4, "cancellation of T and molecule means", bool(passed),
        {"int_T": worst_T, "cross_mean": worst_cross, "int_remainder": worst_rem, "supports_and_offsets": structure_ok},
        {"int_T": tol_c, "cross_mean": tol_m},
    )


def _indicator_oracle(pieces, c, origin):
    """Independent root of ``lam -> int_E theta(x, c/lam) dx - 1`` (1D, continuous quadrature)."""
    from scipy.integrate import quad
    from scipy.optimize import brentq

    def modular(loglam):
        t = c / math.exp(loglam)
        total = 0.0
        for a, b in pieces:
            lo, hi = origin + a, origin + b
            total += quad(lambda x: _theta_r(abs(x), t), lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        return total - 1.0

    size = sum(b - a for a, b in pieces)
    top = math.log(c * size) + 1
    return math.exp(brentq(modular, top - 600, top, xtol=1e-15, rtol=1e-15, maxiter=500))


def criterion_5(cfg: RunConfig) -> CriterionResult:
    tol_o, tol_h = cfg.tol("luxemburg_oracle"), cfg.tol("homogeneity")
    box = _box(cfg, 1)
    J = cfg.J
    L = box.side
    families = [[(0.0, L)], [(0.25 * L, 0.5 * L)], [(0.0, 0.125 * L), (0.5 * L, 0.75 * L)], [(0.75 * L, 0.78125 * L)]]
    worst = 0.0
    x = GridFunction.zeros(box, J).points(physical=False)[0]
    for pieces in families:
        chi = np.zeros_like(x)
        for a, b in pieces:
            chi[(x >= a) & (x < b)] = 1.0
        for e in range(-3, 4):
            c = 10.0**e
            got = luxemburg_log_norm(GridFunction(box, J, c * chi))
            ref = _indicator_oracle(pieces, c, box.origin[0])
            worst = max(worst, abs(got - ref) / ref)
    hom = 0.0
    for item in gen_corpus(CorpusSpec("finite-wavelet-random"), cfg.seed + 5, 50, box, J, "db3"):
        f = item.function
        a, b = luxemburg_log_norm(f), luxemburg_log_norm(f * 2.0)
        hom = max(hom, abs(b - 2 * a) / (2 * a))
    return CriterionResult(
        5, "Luxemburg norm", bool(worst <= tol_o and hom <= tol_h),
        {"oracle_rel_error": worst, "homogeneity": hom},
        {"oracle_rel_error": tol_o, "homogeneity": tol_h},
    )


def criterion_6(cfg: RunConfig) -> CriterionResult:
    stream = PhiloxStream(cfg.seed, 0, 106)
    n = 10_000
    s = 100.0 * (1.0 - stream.uniform(n))
    t = 100.0 * (1.0 - stream.uniform(n))
    M = 1.0 + 19.0 * stream.uniform(n)
    lhs, rhs, ok = check_scalar_log_inequality(s, t, M)
    Mb = np.repeat(np.linspace(1.0, 20.0, 20), 100)
    frac = np.tile((np.arange(100) + 1) / 100.0, 20)
    tb = 4 * Mb * frac
    sb = np.exp(tb - Mb)
    lb, rb, okb = check_scalar_log_inequality(sb, tb, Mb)
    worst = float(max(np.max(lhs / rhs), np.max(lb / rb)))
    return CriterionResult(
        6, "scalar log inequality", bool(ok.all() and okb.all()),
        {"max_lhs_over_rhs": worst, "random": n, "boundary": len(tb)},
        {"max_lhs_over_rhs": 1.0},
    )


def _holder_sup(cfg, J, count=200):
    box = _box(cfg, 1)
    fs = gen_corpus(CorpusSpec("finite-wavelet-random"), cfg.seed + 7, count, box, J, "db3")
    gs = gen_corpus(CorpusSpec("bmo-log-exemplar"), cfg.seed + 7, count, box, J, config_filter(cfg))
    ratios = []
    for a, b in zip(fs, gs):
        ratios.append(holder_product_bound(a.function, b.function, b.coeffs).ratio)
    return ratios


def criterion_7(cfg: RunConfig) -> CriterionResult:
    factor = cfg.tol("stability_factor")
    r_lo = _holder_sup(cfg, cfg.J - 1)
    r_hi = _holder_sup(cfg, cfg.J)
    finite, change = _stable(r_lo, r_hi, factor)
    return CriterionResult(
        7, "generalized Holder", bool(finite and change < factor),
        {f"sup_J{cfg.J - 1}": max(r_lo), f"sup_J{cfg.J}": max(r_hi), "change": change},
        {"change": factor},
    )


def criterion_8(cfg: RunConfig) -> CriterionResult:
    tol_r, factor = cfg.tol("atom_reconstruction"), cfg.tol("stability_factor")
    filt = config_filter(cfg)
    box = _box(cfg, 1)
    items = gen_corpus(CorpusSpec("finite-wavelet-random"), cfg.seed + 8, 200, box, cfg.J, filt)
    ratios, rec = [], 0.0
    lower_ok = True
    try:
        for it in items:
            dec = atomic_decompose(it.coeffs)
            rec = max(rec, dec.reconstruction_error() / math.sqrt(it.coeffs.energy()))
            ratios.append(dec.ratio)
            lower_ok &= dec.ratio >= 1 - 1e-12
        error = ""
    except ParaproductError as exc:
        error = str(exc)
    if error:
        return CriterionResult(8, "atomic decomposition", False, {}, {}, error)
    consts = {size: max(ratios[:size]) for size in (50, 100, 200)}
    change = max(consts.values()) / min(consts.values())
    passed = rec <= tol_r and change < factor and lower_ok
    return CriterionResult(
        8, "atomic decomposition", bool(passed),
        {"reconstruction": rec, "C50": consts[50], "C100": consts[100], "C200": consts[200], "change": change},
        {"reconstruction": tol_r, "change": factor},
    )


def criterion_9(cfg: RunConfig) -> CriterionResult:
    tol_s, tol_g = cfg.tol("atom_split"), cfg.tol("gamma")
    filt = config_filter(cfg)
    worst_split = worst_gamma = worst_mean = 0.0
    diag_ok = True
    count = 0
    runs = [(1, cfg.J, {"levels": [3, 6], "depth": 4}, 40), (2, cfg.J2, {"levels": [3, 4], "depth": 2}, 6)]
    for n, J, params, size in runs:
        box = _box(cfg, n)
        atoms = gen_corpus(CorpusSpec("atom", params), cfg.seed + 9, size, box, J, filt)
        gs = gen_corpus(CorpusSpec("bmo-log-exemplar"), cfg.seed + 9, size, box, J, filt)
        for at, g in zip(atoms, gs):
            a = validate_psi_atom(at.coeffs, at.cube)
            _, _, d = pi2_atom_split(a, g.function, g.coeffs)
            worst_split = max(worst_split, d.split_residual)
            worst_gamma = max(worst_gamma, max(abs(v) for v in d.gamma_integrals))
            worst_mean = max(worst_mean, max(abs(v) for v in d.h_means))
            diag_ok &= d.localization_ok and d.means_ok and d.norms_ok and d.h_support_ok
            count += 1
    passed = worst_split <= tol_s and worst_gamma <= tol_g and diag_ok
    return CriterionResult(
        9, "pi2 atom split", bool(passed),
        {"split_residual": worst_split, "gamma_integral": worst_gamma, "h_mean": worst_mean, "diagnostics": diag_ok, "atoms": count},
        {"split_residual": tol_s, "gamma_integral": tol_g, "h_mean": 1e-8},
    )


def _divcurl_run(cfg, J, count):
    box = _box(cfg, 2)
    items = gen_corpus(CorpusSpec("band-limited-potential"), cfg.seed + 10, count, box, J)
    filt = config_filter(cfg)
    out = []
    for it in items:
        F, G = potential_fields(it.function, it.partner)
        out.append(divcurl_product(F, G, box_level(box), filt))
    return out


def criterion_10(cfg: RunConfig) -> CriterionResult:
    tol_r, tol_i, tol_h, factor = (cfg.tol(k) for k in ("riesz_identity", "integral_FG", "hilbert", "stability_factor"))
    lo = _divcurl_run(cfg, cfg.J2 - 1, 50)
    hi = _divcurl_run(cfg, cfg.J2, 50)
    riesz = max(r.riesz_identity_residual for r in lo + hi)
    integ = max(abs(r.integral_FG) / (r.l2_F * r.l2_G) for r in lo + hi)
    finite, change = _stable([r.ratio for r in lo], [r.ratio for r in hi], factor)
    box = _box(cfg, 1)
    c = GridFunction.from_callable(box, cfg.J, lambda x: np.cos(2 * np.pi * x / box.side))
    s = GridFunction.from_callable(box, cfg.J, lambda x: np.sin(2 * np.pi * x / box.side))
    hil = float(np.max(np.abs((hilbert_transform(c) - s).samples)))
    passed = riesz <= tol_r and integ <= tol_i and finite and change < factor and hil <= tol_h
    return CriterionResult(
        10, "div-curl product", bool(passed),
        {"riesz_identity": riesz, "integral_FG": integ, f"sup_ratio_J{cfg.J2 - 1}": max(r.ratio for r in lo),
         f"sup_ratio_J{cfg.J2}": max(r.ratio for r in hi), "change": change, "hilbert_cos_sin": hil},
        {"riesz_identity": tol_r, "integral_FG": tol_i, "change": factor, "hilbert_cos_sin": tol_h},
    )


def _bform_sup(cfg, J, count=12):
    A = hilbert_operator()
    filt = config_filter(cfg)
    ratios, skew = [], 0.0
    for a, b in _pairs(cfg, count, 1, J, filt, seed_offset=11, levels=(0, 7)):
        rep = bilinear_B(a.coeffs, b.coeffs, A)
        ratios.append(rep.ratio)
        skew = max(skew, abs(rep.skew_residual))
    return ratios, skew


def criterion_11(cfg: RunConfig) -> CriterionResult:
    factor = cfg.tol("stability_factor")
    stream = PhiloxStream(cfg.seed, 0, 111)
    diag_exact = True
    sym_exact = True
    for _ in range(200):
        n = 1 + stream.integers(0, 2)
        cubes = []
        for _ in range(2):
            j = stream.integers(0, 8)
            cubes.append(DyadicCube(j, tuple(stream.integers(0, 2**j) for _ in range(n))))
        delta = 1.0 - stream.uniform()
        I, I2 = cubes
        diag_exact &= p_delta(I, I, delta) == 1.0
        sym_exact &= p_delta(I, I2, delta) == p_delta(I2, I, delta)
    r_lo, skew_lo = _bform_sup(cfg, cfg.J - 1)
    r_hi, skew_hi = _bform_sup(cfg, cfg.J)
    finite, change = _stable(r_lo, r_hi, factor)
    skew = max(skew_lo, skew_hi)
    passed = diag_exact and sym_exact and finite and change < factor and skew <= 1e-10
    return CriterionResult(
        11, "p_delta and B-form", bool(passed),
        {"p_diag_exact": diag_exact, "p_symmetric": sym_exact, f"sup_B_J{cfg.J - 1}": max(r_lo),
         f"sup_B_J{cfg.J}": max(r_hi), "change": change, "skew": skew},
        {"change": factor, "skew": 1e-10},
    )


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criterion(cid: int, cfg: RunConfig) -> CriterionResult:
    t = time.perf_counter()
    try:
        res = CRITERIA[cid](cfg)
    except ParaproductError as exc:
        res = CriterionResult(cid, CRITERIA[cid].__name__, False, {}, {}, f"{type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t
    return res


def run_selfcheck(config: RunConfig | None = None, only=None, echo=None):
    """Run the criteria; returns ``(exit_code, summary_dict)``."""
    cfg = config or RunConfig()
    ids = sorted(only) if only else sorted(CRITERIA)
    results = []
    for cid in ids:
        res = run_criterion(cid, cfg)
        results.append(res)
        if echo is not None:
            echo(res.line())
    failed = [r for r in results if not r.passed]
    summary = {
        "passed": not failed,
        "first_failure": None if not failed else {"id": failed[0].id, "name": failed[0].name},
        "config": cfg.to_dict(),
        "criteria": [r.to_dict() for r in results],
    }
    return (0 if not failed else 1), summary
