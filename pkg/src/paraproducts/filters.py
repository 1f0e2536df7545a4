"""Orthonormal Daubechies filter catalog.

Low-pass taps are stored as decimal strings (22 significant digits, obtained
by spectral factorization of the Daubechies polynomial in 60-digit
arithmetic) and re-validated every time a filter is built.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FilterError

_SQRT_HALF = "0.7071067811865475244008"

LOWPASS_TAPS = {
    "haar": (_SQRT_HALF, _SQRT_HALF),
    "db2": (
        "0.4829629131445341433749",
        "0.8365163037378079055753",
        "0.224143868042013381026",
        "-0.1294095225512603811744",
    ),
    "db3": (
        "0.3326705529500826159985",
        "0.8068915093110925764945",
        "0.4598775021184915700952",
        "-0.1350110200102545886964",
        "-0.08544127388202666169282",
        "0.03522629188570953660274",
    ),
    "db4": (
        "0.2303778133088965008633",
        "0.7148465705529156470899",
        "0.6308807679298589078817",
        "-0.02798376941685985421141",
        "-0.1870348117190930840796",
        "0.03084138183556076362722",
        "0.03288301166688519973541",
        "-0.01059740178506903210488",
    ),
    "db5": (
        "0.1601023979741929144807",
        "0.6038292697971896705401",
        "0.7243085284377729277281",
        "0.1384281459013207315054",
        "-0.2422948870663820318626",
        "-0.03224486958463837464848",
        "0.07757149384004571352313",
        "-0.006241490212798274274191",
        "-0.01258075199908199946851",
        "0.003335725285473771277998",
    ),
    "db6": (
        "0.1115407433501094636213",
        "0.4946238903984530856772",
        "0.7511339080210953506789",
        "0.315250351709197629086",
        "-0.2262646939654398200763",
        "-0.1297668675672619355623",
        "0.09750160558732304910234",
        "0.02752286553030572862554",
        "-0.03158203931748602956508",
        "0.0005538422011614961392519",
        "0.004777257510945510639636",
        "-0.001077301085308479564853",
    ),
    "db7": (
        "0.07785205408500917901996",
        "0.396539319481917306539",
        "0.7291320908462351199169",
        "0.4697822874051931224716",
        "-0.1439060039285649754051",
        "-0.2240361849938749826381",
        "0.07130921926683026475088",
        "0.08061260915108307191292",
        "-0.03802993693501441357959",
        "-0.01657454163066688065411",
        "0.01255099855609984061299",
        "0.0004295779729213665211321",
        "-0.001801640704047490915268",
        "0.0003537137999745202484463",
    ),
    "db8": (
        "0.05441584224310400995501",
        "0.3128715909142999706592",
        "0.6756307362972898068078",
        "0.5853546836542067127713",
        "-0.01582910525634930566738",
        "-0.2840155429615469265162",
        "0.0004724845739132827703606",
        "0.128747426620478458857",
        "-0.01736930100180754616962",
        "-0.04408825393079475150676",
        "0.01398102791739828164872",
        "0.008746094047405776716383",
        "-0.004870352993451574310422",
        "-0.0003917403733769470462981",
        "0.0006754494064505693663695",
        "-0.0001174767841247695337306",
    ),
}

DEFAULT_FILTER = "db3"


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Quadrature-mirror pair ``(h, g)`` with ``g_l = (-1)**l h_{L-1-l}``.

    ``m = len(h) - 1`` is the support parameter: after centering, ``phi`` and
    ``psi`` live in ``1/2 + m * (-1/2, 1/2]``.
    """

    name: str
    lowpass: np.ndarray = field(repr=False)
    highpass: np.ndarray = field(repr=False)
    vanishing_moments: int
    violates_moment_condition: bool = False

    @property
    def taps(self):
        return len(self.lowpass)

    @property
    def m(self):
        return self.taps - 1

    @property
    def shift(self):
        """Index offset centering ``phi_I`` and ``psi_I`` on the cube ``I``."""
        return self.taps // 2 - 1


def _highpass(h):
    return h[::-1] * (-1.0) ** np.arange(len(h))


def filter_defects(lowpass, vanishing_moments=None) -> dict:
    """Measured deviations from the MRA invariants (all zero for exact taps).

    ``sum``: ``|sum h - sqrt 2|``; ``orthogonality``: worst
    ``|sum_i h_i h_{i+2k} - delta_k|``; ``moments``: worst relative highpass
    moment below the vanishing order.
    """
    h = np.asarray(lowpass, dtype=np.float64)
    L = len(h)
    g = _highpass(h)
    N = L // 2 if vanishing_moments is None else int(vanishing_moments)
    ortho = 0.0
    for k in range(L // 2):
        auto = float(np.dot(h[: L - 2 * k], h[2 * k :]))
        ortho = max(ortho, abs(auto - (1.0 if k == 0 else 0.0)))
    # centered abscissae keep the high moments well conditioned
    l = np.arange(L) - (L - 1) / 2
    moments = 0.0
    for p in range(N):
        scale = float(np.dot(np.abs(g), np.abs(l) ** p))
        moments = max(moments, abs(float(np.dot(g, l**p))) / scale)
    return {"sum": abs(float(h.sum()) - math.sqrt(2)), "orthogonality": ortho, "moments": moments}


def make_filter(name, lowpass, vanishing_moments=None, tol=1e-12, check=True) -> FilterPair:
    """Build a filter pair from low-pass taps, checking every MRA invariant.

    ``check=False`` skips validation (used to exercise failure reporting).
    """
    h = np.array(lowpass, dtype=np.float64)
    L = len(h)
    if L < 2 or L % 2:
        raise FilterError(f"{name}: need an even number of taps, got {L}")
    g = _highpass(h)
    N = L // 2 if vanishing_moments is None else int(vanishing_moments)
    if check:
        d = filter_defects(h, N)
        problems = []
        if d["sum"] > tol:
            problems.append(f"|sum(h) - sqrt(2)| = {d['sum']:.3e}")
        if d["orthogonality"] > tol:
            problems.append(f"orthogonality defect {d['orthogonality']:.3e}")
        if d["moments"] > 1e-10:
            problems.append(f"highpass moment defect {d['moments']:.3e}")
        if problems:
            raise FilterError(f"{name}: invalid taps ({'; '.join(problems)})")
    h.setflags(write=False)
    g.setflags(write=False)
    return FilterPair(name, h, g, N, violates_moment_condition=N < 2)


def load_filter(name: str = DEFAULT_FILTER) -> FilterPair:
    if isinstance(name, FilterPair):
        return name
    key = name.lower()
    if key == "db1":
        key = "haar"
    if key not in LOWPASS_TAPS:
        raise FilterError(f"unknown filter {name!r}; known: {', '.join(LOWPASS_TAPS)}")
    taps = [float(t) for t in LOWPASS_TAPS[key]]
    return make_filter(key, taps, vanishing_moments=1 if key == "haar" else None)


def filter_catalog_csv() -> str:
    """The catalog as ``name,tap_index,lowpass_value`` rows (17 significant digits)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "tap_index", "lowpass_value"])
    for name in LOWPASS_TAPS:
        for i, v in enumerate(load_filter(name).lowpass):
            writer.writerow([name, i, "%.17g" % v])
    return buf.getvalue()
