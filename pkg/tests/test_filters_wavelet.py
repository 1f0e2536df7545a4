import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from paraproducts import (
    Box,
    DyadicCube,
    FilterError,
    GridFunction,
    LevelError,
    WaveletCoeffs,
    dwt_forward,
    dwt_inverse,
    filter_catalog_csv,
    inner_product,
    integrate,
    labels,
    load_filter,
    make_filter,
    project,
    projections,
    synthesize,
)
from paraproducts.filters import LOWPASS_TAPS, filter_defects

NAMES = ["db2", "db3", "db4", "db5", "db6", "db7", "db8"]


def test_db2_published_taps():
    s3, r2 = math.sqrt(3.0), math.sqrt(2.0)
    expected = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * r2)
    assert np.allclose(load_filter("db2").lowpass, expected, rtol=0, atol=1e-15)


def test_haar_taps_and_alias():
    f = load_filter("db1")
    assert f.name == "haar" and f.violates_moment_condition
    assert np.allclose(f.lowpass, [2**-0.5, 2**-0.5])


@pytest.mark.parametrize("name", NAMES)
def test_catalog_invariants(name):
    f = load_filter(name)
    L = f.taps
    assert L == 2 * int(name[2:])
    assert abs(f.lowpass.sum() - math.sqrt(2)) < 1e-14
    for k in range(L // 2):
        auto = np.dot(f.lowpass[: L - 2 * k], f.lowpass[2 * k :])
        assert abs(auto - (k == 0)) < 1e-14
    l = np.arange(L) - (L - 1) / 2
    for p in range(f.vanishing_moments):
        scale = np.dot(np.abs(f.highpass), np.abs(l) ** p)
        assert abs(np.dot(f.highpass, l**p)) <= 1e-12 * scale
    assert f.m == L - 1 and not f.violates_moment_condition


def test_make_filter_rejects_bad_taps():
    taps = list(load_filter("db3").lowpass)
    taps[0] += 1e-6
    with pytest.raises(FilterError):
        make_filter("bad", taps)
    with pytest.raises(FilterError):
        make_filter("odd", [1.0, 0.0, 0.0])
    unchecked = make_filter("bad", taps, check=False)
    assert filter_defects(unchecked.lowpass)["sum"] > 5e-7


def test_unknown_filter():
    with pytest.raises(FilterError):
        load_filter("sym4")


def test_catalog_csv_roundtrip():
    lines = filter_catalog_csv().splitlines()
    assert lines[0] == "name,tap_index,lowpass_value"
    assert len(lines) == 1 + sum(len(v) for v in LOWPASS_TAPS.values())
    for row in lines[1:]:
        name, i, v = row.split(",")
        assert float(v) == load_filter(name).lowpass[int(i)]


# ---------------------------------------------------------------------------
# independent oracle: explicit periodized analysis matrix


def analysis_matrix(N, filt):
    """Rows 0..N/2-1 low-pass, N/2..N-1 high-pass, centered with the filter shift."""
    W = np.zeros((N, N))
    s = filt.taps // 2 - 1
    for a in range(N // 2):
        for l in range(filt.taps):
            W[a, (2 * a - s + l) % N] += filt.lowpass[l]
            W[N // 2 + a, (2 * a - s + l) % N] += filt.highpass[l]
    return W


@pytest.mark.parametrize("name", ["haar", "db2", "db4"])
def test_one_level_1d_matches_matrix(name, rng):
    filt = load_filter(name)
    J = 5
    N = 2**J
    x = rng.standard_normal(N)
    c = dwt_forward(GridFunction(Box.unit(1), J, x), J - 1, filt)
    y = analysis_matrix(N, filt) @ (x * 2.0 ** (-J / 2))
    assert np.allclose(c.scaling, y[: N // 2], atol=1e-14)
    assert np.allclose(c.detail[J - 1][0], y[N // 2 :], atol=1e-14)


def test_one_level_2d_is_tensor_product(rng):
    filt = load_filter("db3")
    J = 4
    N = 2**J
    x = rng.standard_normal((N, N))
    c = dwt_forward(GridFunction(Box.unit(2), J, x), J - 1, filt)
    W = analysis_matrix(N, filt)
    Y = W @ (x * 2.0**-J) @ W.T
    h = N // 2
    blocks = {(0, 1): Y[:h, h:], (1, 0): Y[h:, :h], (1, 1): Y[h:, h:]}
    assert labels(2) == [(0, 1), (1, 0), (1, 1)]
    assert np.allclose(c.scaling, Y[:h, :h], atol=1e-14)
    for i, lam in enumerate(labels(2)):
        assert np.allclose(c.detail[J - 1][i], blocks[lam], atol=1e-14)


def test_multilevel_matches_iterated_matrix(rng):
    filt = load_filter("db2")
    J = 6
    x = rng.standard_normal(2**J)
    c = dwt_forward(GridFunction(Box.unit(1), J, x), 2, filt)
    v = x * 2.0 ** (-J / 2)
    for j in range(J - 1, 1, -1):
        y = analysis_matrix(2 ** (j + 1), filt) @ v
        assert np.allclose(c.detail[j][0], y[2**j :], atol=1e-13)
        v = y[: 2**j]
    assert np.allclose(c.scaling, v, atol=1e-13)


# ---------------------------------------------------------------------------
# properties


@given(st.sampled_from(NAMES + ["haar"]), st.integers(0, 2**32), st.integers(0, 5), st.sampled_from([1, 2]))
def test_perfect_reconstruction_and_parseval(name, seed, j0, n):
    rng = np.random.default_rng(seed)
    J = 6 if n == 1 else 5
    f = GridFunction(Box.unit(n), J, rng.standard_normal((2**J,) * n))
    c = dwt_forward(f, min(j0, J - 1), name)
    assert np.max(np.abs(dwt_inverse(c).samples - f.samples)) < 1e-12
    assert abs(c.energy() - inner_product(f, f)) <= 1e-12 * inner_product(f, f)


@given(st.integers(0, 2**32), st.floats(-3, 3), st.floats(-3, 3))
def test_transform_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    box = Box.unit(1)
    f = GridFunction(box, 7, rng.standard_normal(128))
    g = GridFunction(box, 7, rng.standard_normal(128))
    lhs = dwt_forward(f * a + g * b, 1)
    rhs = dwt_forward(f, 1) * a + dwt_forward(g, 1) * b
    diff = lhs - rhs
    assert math.sqrt(diff.energy()) < 1e-12 * (1 + abs(a) + abs(b)) * 16


@given(st.integers(0, 2**32))
def test_projections_telescope_and_nest(seed):
    rng = np.random.default_rng(seed)
    f = GridFunction(Box.unit(1), 7, rng.standard_normal(128))
    P = projections(f, 2)
    assert np.array_equal(P[-1].samples, f.samples)
    for j in range(2, 7):
        pj = project(f, j)
        assert np.allclose(P[j - 2].samples, pj.samples, atol=1e-12)
        # P_j is a projection and P_j P_{j+1} = P_j
        assert np.allclose(project(pj, j).samples, pj.samples, atol=1e-12)
        assert np.allclose(project(P[j - 1], j).samples, pj.samples, atol=1e-12)


def test_orthonormal_system_small_grid():
    box, J, filt = Box.unit(1), 6, load_filter("db3")
    cubes = [DyadicCube(2, (k,)) for k in range(4)]
    cubes += [DyadicCube(j, (k,), (1,)) for j in range(2, 6) for k in range(2**j)]
    fns = np.array([synthesize(c, box, J, filt).samples for c in cubes]) * 2.0 ** (-J / 2)
    G = fns @ fns.T
    assert np.max(np.abs(G - np.eye(len(cubes)))) < 1e-12


@pytest.mark.parametrize("name", ["db2", "db3", "db5"])
def test_wavelet_support_and_moments(name):
    filt = load_filter(name)
    box, J, j = Box.unit(1), 10, 4
    cube = DyadicCube(j, (7,), (1,))
    psi = synthesize(cube, box, J, filt)
    x = (np.arange(2**J) + 0.5) * 2.0**-J
    nz = x[np.abs(psi.samples) > 0]
    half = filt.m * cube.side / 2
    assert nz.min() >= cube.center[0] - half - 1e-12
    assert nz.max() <= cube.center[0] + half + 1e-12
    scale = integrate(abs(psi))
    for p in range(filt.vanishing_moments):
        mom = integrate(psi.with_samples(psi.samples * (x - cube.center[0]) ** p))
        assert abs(mom) < 1e-10 * scale
    phi = synthesize(DyadicCube(j, (7,)), box, J, filt)
    assert abs(integrate(phi) - cube.side**0.5) < 1e-12


def test_synthesize_levels():
    box = Box.unit(1)
    with pytest.raises(LevelError):
        synthesize(DyadicCube(5, (0,), (1,)), box, 5)
    with pytest.raises(LevelError):
        synthesize(DyadicCube(-1, (0,)), box, 5)
    phi = synthesize(DyadicCube(5, (3,)), box, 5)
    assert np.count_nonzero(phi.samples) == 1


def test_coeffs_item_access(rng):
    box = Box.unit(2)
    f = GridFunction(box, 4, rng.standard_normal((16, 16)))
    c = dwt_forward(f, 1)
    for cube, val in c.items(include_scaling=True, nonzero=False):
        assert c[cube] == val
    rebuilt = WaveletCoeffs.from_items(box, 4, 1, dict(c.items()))
    assert np.allclose(dwt_inverse(rebuilt).samples, f.samples)
    with pytest.raises(LevelError):
        dwt_forward(f, 7)
