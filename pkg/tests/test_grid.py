import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from paraproducts import (
    Box,
    DyadicCube,
    GeometryError,
    GridFormatError,
    GridFunction,
    dilate_cube,
    inner_product,
    integrate,
    read_grid,
    write_grid,
)


def test_dilate_examples():
    b = dilate_cube(DyadicCube(0, (0,)), 1)
    assert b.origin == (0.0,) and b.side == 1.0
    b = dilate_cube(DyadicCube(0, (0,)), 3)
    assert b.origin == (-1.0,) and b.side == 3.0
    b = dilate_cube(DyadicCube(1, (0, 0)), 2)
    assert b.origin == (-0.25, -0.25) and b.side == 1.0


def test_dilate_rejects_bad_factor():
    with pytest.raises(GeometryError):
        dilate_cube(DyadicCube(0, (0,)), 0)


@given(st.integers(-3, 8), st.integers(-20, 20), st.integers(-20, 20), st.integers(1, 9), st.sampled_from([1, 2]))
def test_dilate_preserves_center(j, k1, k2, k, n):
    cube = DyadicCube(j, (k1, k2)[:n])
    box = dilate_cube(cube, k)
    assert np.allclose(box.center, cube.center, rtol=0, atol=1e-12 * 2.0 ** max(0, -j))
    assert math.isclose(box.side, k * 2.0**-j)


def test_cube_geometry():
    c = DyadicCube(2, (1, 3))
    assert c.side == 0.25 and c.volume == 0.0625
    assert c.center == (0.375, 0.875)
    assert c.parent() == DyadicCube(1, (0, 1))
    assert DyadicCube(0, (0, 0)).contains(c)
    assert not DyadicCube(1, (1, 1)).contains(c)


def test_bad_label_rejected():
    with pytest.raises(GeometryError):
        DyadicCube(0, (0,), (0,))


def test_integrate_examples(unit1):
    assert integrate(GridFunction.constant(unit1, 8, 1.0)) == 1.0
    g = GridFunction.from_callable(unit1, 8, np.sin)
    assert inner_product(GridFunction.zeros(unit1, 8), g) == 0.0
    haar = GridFunction.from_callable(unit1, 8, lambda x: np.where(x < 0.5, 1.0, -1.0))
    assert inner_product(haar, haar) == 1.0


def test_inner_product_geometry_mismatch(unit1):
    with pytest.raises(GeometryError):
        inner_product(GridFunction.zeros(unit1, 8), GridFunction.zeros(unit1, 7))


@given(st.integers(0, 6), st.data())
def test_indicator_integral_exact(j, data):
    box = Box.unit(2)
    k = (data.draw(st.integers(0, 2**j - 1)), data.draw(st.integers(0, 2**j - 1)))
    cube = DyadicCube(j, k)
    assert integrate(GridFunction.indicator(box, 6, cube)) == cube.volume


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_quadrature_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    box = Box.unit(1)
    f = GridFunction(box, 7, rng.standard_normal(128))
    g = GridFunction(box, 7, rng.standard_normal(128))
    lhs = integrate(f * a + g * b)
    rhs = a * integrate(f) + b * integrate(g)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(a) * integrate(abs(f)) + abs(b) * integrate(abs(g)))


def test_gridfunction_validation(unit1):
    with pytest.raises(GeometryError):
        GridFunction(unit1, 4, np.zeros(15))
    with pytest.raises(GeometryError):
        GridFunction(unit1, 4, np.full(16, np.nan))
    with pytest.raises(GeometryError):
        GridFunction(Box((0.0,), 3.0, 1), 4, np.zeros(48))


def test_samples_read_only(unit1):
    f = GridFunction.zeros(unit1, 3)
    with pytest.raises(ValueError):
        f.samples[0] = 1.0


def test_physical_origin():
    box = Box((2.0,), 1.0, 1)
    f = GridFunction.from_callable(box, 2, lambda x: x, physical=True)
    assert np.allclose(f.samples, [2.125, 2.375, 2.625, 2.875])
    local = GridFunction.from_callable(box, 2, lambda x: x)
    assert np.allclose(local.samples, [0.125, 0.375, 0.625, 0.875])


def test_shift_is_periodic_roll(unit1):
    f = GridFunction(unit1, 2, np.arange(4.0))
    assert list(f.shift(1).samples) == [3.0, 0.0, 1.0, 2.0]


@given(arrays(np.float64, 1024, elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
def test_gfn_roundtrip_1d_bitexact(tmp_path_factory, samples):
    path = tmp_path_factory.mktemp("gfn") / "f.gfn"
    f = GridFunction(Box((0.3,), 1.0, 1), 10, samples)
    write_grid(f, path)
    g = read_grid(path)
    assert g.samples.tobytes() == f.samples.tobytes()
    assert g.box == f.box and g.J == f.J


def test_gfn_roundtrip_2d_and_csv(tmp_path, rng):
    f = GridFunction(Box((0.0, -1.0), 1.0, 2), 6, rng.standard_normal((64, 64)) * 1e-300)
    for csv in (False, True):
        p = tmp_path / f"f{csv}.gfn"
        write_grid(f, p, csv=csv)
        g = read_grid(p)
        assert g.samples.tobytes() == f.samples.tobytes()
        write_grid(g, tmp_path / "again.gfn", csv=csv)
        assert (tmp_path / "again.gfn").read_bytes() == p.read_bytes()


def test_gfn_header(tmp_path):
    f = GridFunction.constant(Box.unit(1), 2, 1.5)
    p = tmp_path / "f.gfn"
    write_grid(f, p)
    head, _, payload = p.read_bytes().partition(b"\n\n")
    assert head.decode().splitlines() == ["GFN1", "dims 1", "J 2", "origin 0.0", "side 1.0"]
    assert payload == np.full(4, 1.5, dtype="<f8").tobytes()


@pytest.mark.parametrize(
    "mutate",
    [
        lambda b: b.replace(b"GFN1", b"GFN2", 1),
        lambda b: b[:-8],
        lambda b: b.replace(b"J 2", b"J 3", 1),
        lambda b: b.replace(b"dims 1\n", b"", 1),
        lambda b: b.replace(b"side 1.0", b"side 1.0\nside 1.0", 1),
        lambda b: b.replace(b"side 1.0", b"side 1.0\ncolor red", 1),
        lambda b: b[: b.index(b"\n\n") + 2] + np.array([1.0, np.inf, 0, 0], "<f8").tobytes(),
    ],
)
def test_gfn_rejects_malformed(tmp_path, mutate):
    f = GridFunction.constant(Box.unit(1), 2, 1.5)
    p = tmp_path / "f.gfn"
    write_grid(f, p)
    p.write_bytes(mutate(p.read_bytes()))
    with pytest.raises(GridFormatError):
        read_grid(p)
