import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from paraproducts import (
    Box,
    CorpusSpec,
    DomainError,
    GridFunction,
    MultiplierOperator,
    NumericalError,
    VectorField,
    divcurl_product,
    gen_corpus,
    hilbert_transform,
    inner_product,
    integrate,
    potential_fields,
    riesz_transform,
)
from paraproducts.divcurl import curl_residual, div_residual


def rand(n, J, seed):
    rng = np.random.default_rng(seed)
    return GridFunction(Box.unit(n), J, rng.standard_normal((2**J,) * n))


def test_hilbert_of_cosine():
    box = Box.unit(1)
    f = GridFunction.from_callable(box, 8, lambda x: np.cos(2 * np.pi * 3 * x))
    Hf = hilbert_transform(f)
    assert np.allclose(Hf.samples, np.sin(2 * np.pi * 3 * f.points()[0]), atol=1e-12)


def test_hilbert_only_1d():
    with pytest.raises(DomainError):
        hilbert_transform(rand(2, 4, 0))
    with pytest.raises(DomainError):
        riesz_transform(rand(1, 4, 0), 1)


@given(st.integers(0, 2**32))
def test_riesz_square_sum(seed):
    f = rand(2, 5, seed)
    total = riesz_transform(riesz_transform(f, 0), 0) + riesz_transform(riesz_transform(f, 1), 1)
    # Nyquist modes are dropped by each odd multiplier
    spec = np.fft.fftn(f.samples)
    N = 32
    spec[N // 2, :] = 0
    spec[:, N // 2] = 0
    spec[0, 0] = 0
    expected = -np.real(np.fft.ifftn(spec))
    assert np.allclose(total.samples, expected, atol=1e-12)


@given(st.integers(0, 2**32), st.sampled_from([0, 1]))
def test_riesz_skew_adjoint(seed, axis):
    f, g = rand(2, 5, seed), rand(2, 5, seed + 1)
    a = inner_product(riesz_transform(f, axis), g)
    b = inner_product(f, riesz_transform(g, axis))
    assert abs(a + b) < 1e-12 * 32


@given(st.integers(0, 2**32))
def test_hilbert_isometry_on_mean_zero_band(seed):
    f = rand(1, 7, seed)
    spec = np.fft.fft(f.samples)
    spec[0] = 0
    spec[64] = 0
    f = f.with_samples(np.real(np.fft.ifft(spec)))
    Hf = hilbert_transform(f)
    assert inner_product(Hf, Hf) == pytest.approx(inner_product(f, f), rel=1e-12)
    assert np.allclose(hilbert_transform(Hf).samples, -f.samples, atol=1e-12)


def test_non_odd_imaginary_symbol_rejected():
    op = MultiplierOperator(lambda xi: 1j * np.ones_like(xi[0]), odd=False, name="bad")
    with pytest.raises(NumericalError):
        op.apply(rand(1, 5, 0))
    ok = MultiplierOperator(lambda xi: 1j * np.sign(xi[0]), odd=True)
    assert ok.oddness_defect(rand(1, 5, 0)) == 0.0


def band_pair(seed, J=6):
    item = gen_corpus(CorpusSpec("band-limited-potential"), seed, 1, Box.unit(2), J)[0]
    return item.function, item.partner


def test_potential_fields_free():
    u, v = band_pair(1)
    F, G = potential_fields(u, v)
    assert curl_residual(F) < 1e-12
    assert div_residual(G) < 1e-12


def test_divcurl_product_identities():
    u, v = band_pair(2)
    F, G = potential_fields(u, v)
    rep = divcurl_product(F, G)
    # both fields are derivatives of periodic potentials, so the integral of F.G vanishes
    assert abs(rep.integral_FG) < 1e-8
    assert abs(integrate(F.dot(G))) < 1e-8
    assert rep.riesz_identity_residual < 1e-8
    assert rep.split_residual < 1e-10
    assert rep.potential_recovery_residual < 1e-10
    assert rep.cancellation_residual < 1e-8
    assert set(rep.to_dict()) == set(rep.SCHEMA)
    assert rep.ratio > 0 and math.isfinite(rep.ratio)


def test_divcurl_rejects_non_free_fields():
    u, v = band_pair(3)
    F, G = potential_fields(u, v)
    bad = VectorField((G[0], G[1]))
    with pytest.raises(DomainError):
        divcurl_product(bad, bad)


def test_vector_field_geometry():
    with pytest.raises(Exception):
        VectorField((rand(2, 4, 0), rand(2, 5, 0)))
    F = VectorField((rand(2, 4, 0), rand(2, 4, 1)))
    assert F.l2_norm() == pytest.approx(math.sqrt(sum(inner_product(c, c) for c in F)))
