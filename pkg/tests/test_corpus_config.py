import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from paraproducts import Box, ConfigurationError, CorpusSpec, RunConfig, gen_corpus, validate_psi_atom
from paraproducts.corpus import PhiloxStream


def test_philox_stream_conversion():
    s = PhiloxStream(7, 3, 1)
    raw = np.random.Philox(key=7, counter=np.array([0, 0, 3, 1], dtype=np.uint64)).random_raw(4)
    expected = (raw >> np.uint64(11)).astype(float) * 2.0**-53
    assert np.array_equal(s.uniform(4), expected)


@given(st.integers(0, 2**64 - 1), st.integers(0, 1000))
def test_uniform_range_and_normal_finite(seed, item):
    s = PhiloxStream(seed, item, 2)
    u = s.uniform(64)
    assert np.all((u >= 0) & (u < 1))
    assert np.all(np.isfinite(s.normal(64)))
    k = s.integers(3, 9)
    assert 3 <= k < 9


def test_seed_range():
    with pytest.raises(ConfigurationError):
        PhiloxStream(2**64)
    with pytest.raises(ConfigurationError):
        PhiloxStream(-1)


@pytest.mark.parametrize("kind", ["finite-wavelet-random", "atom", "bmo-log-exemplar", "band-limited-potential"])
def test_corpus_deterministic_and_prefix_stable(kind):
    n = 2 if kind == "band-limited-potential" else 1
    box = Box.unit(n)
    J = 6 if n == 2 else 8
    a = gen_corpus(CorpusSpec(kind), 11, 3, box, J)
    b = gen_corpus(CorpusSpec(kind), 11, 3, box, J)
    c = gen_corpus(CorpusSpec(kind), 11, 1, box, J, start=2)
    for x, y in zip(a, b):
        assert x.function.samples.tobytes() == y.function.samples.tobytes()
    assert c[0].function.samples.tobytes() == a[2].function.samples.tobytes()
    d = gen_corpus(CorpusSpec(kind), 12, 1, box, J)
    assert d[0].function.samples.tobytes() != a[0].function.samples.tobytes()


def test_atom_corpus_items_are_atoms():
    for n, J in ((1, 9), (2, 6)):
        for item in gen_corpus(CorpusSpec("atom"), 4, 5, Box.unit(n), J):
            atom = validate_psi_atom(item.coeffs, item.cube)
            assert atom.l2_norm <= item.cube.volume**-0.5


def test_wavelet_random_levels():
    item = gen_corpus(CorpusSpec("finite-wavelet-random", {"levels": [2, 4], "sparsity": 1.0}), 1, 1, Box.unit(1), 8)[0]
    c = item.coeffs
    for j in c.levels:
        assert np.any(c.detail[j]) == (2 <= j < 4)
    assert not np.any(c.scaling)


@pytest.mark.parametrize(
    "kind,params",
    [
        ("nope", {}),
        ("atom", {"colour": 1}),
        ("finite-wavelet-random", {"levels": [3, 3]}),
        ("finite-wavelet-random", {"sparsity": 0}),
        ("finite-wavelet-random", {"law": "cauchy"}),
        ("bmo-log-exemplar", {"truncation": -1}),
        ("band-limited-potential", {"modes": 0}),
    ],
)
def test_corpus_spec_validation(kind, params):
    with pytest.raises(ConfigurationError):
        CorpusSpec(kind, params)


def test_config_defaults_and_overrides(tmp_path):
    cfg = RunConfig()
    assert cfg.filter == "db3" and cfg.tol("reconstruction") == 1e-10
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"filter": "db4", "J": 9, "tolerances": {"split": 1e-9}}))
    cfg = RunConfig.load(str(p), filter="db5", seed=None)
    assert cfg.filter == "db5" and cfg.J == 9 and cfg.tol("split") == 1e-9
    assert RunConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


@pytest.mark.parametrize(
    "data",
    [
        {"filter": "haar"},
        {"filter": "sym4"},
        {"dims": 3},
        {"j0": 10},
        {"seed": -1},
        {"tolerances": {"nope": 1}},
        {"unknown": 1},
        {"side": 0},
    ],
)
def test_config_rejects(data):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(data)


def test_config_haar_opt_in(tmp_path):
    assert RunConfig(filter="haar", allow_haar=True).filter == "haar"
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigurationError):
        RunConfig.load(str(p))
