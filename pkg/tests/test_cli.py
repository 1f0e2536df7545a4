import json
import subprocess
import sys

import numpy as np
import pytest

from paraproducts import Box, GridFunction, read_grid, write_grid
from paraproducts.cli import main


@pytest.fixture
def pair(tmp_path):
    rng = np.random.default_rng(0)
    box = Box.unit(1)
    f = GridFunction(box, 8, rng.standard_normal(256))
    g = GridFunction(box, 8, rng.standard_normal(256))
    write_grid(f, tmp_path / "f.gfn")
    write_grid(g, tmp_path / "g.gfn")
    return tmp_path, f, g


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_split_writes_pieces(pair, capsys):
    d, f, g = pair
    code, _, _ = run(["split", "--f", d / "f.gfn", "--g", d / "g.gfn", "--out-prefix", d / "out/s"], capsys)
    assert code == 0
    pieces = [read_grid(d / f"out/s_{k}.gfn") for k in ("pi1", "pi2", "pi3", "coarse")]
    total = sum(p.samples for p in pieces)
    assert np.max(np.abs(total - (f * g).samples)) < 1e-10
    rep = json.loads((d / "out/s_report.json").read_text())
    assert rep["residuals"]["split"] < 1e-10
    assert rep["residuals"]["symmetry_pi2_vs_pi1_swapped"] < 1e-12


def test_transform_report_and_catalog(pair, capsys):
    d, f, _ = pair
    code, out, _ = run(["transform", "--in", d / "f.gfn"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["filter"] == "db3"
    assert rep["reconstruction_residual"] < 1e-12 and rep["parseval_residual"] < 1e-12
    code, out, _ = run(["transform", "--catalog"], capsys)
    assert out.startswith("name,tap_index,lowpass_value\n")


def test_norms_and_unknown_norm(pair, capsys):
    d, _, _ = pair
    code, out, _ = run(["norms", "--in", d / "f.gfn", "--norms", "l1,l2,bmo"], capsys)
    assert code == 0 and [r["norm"] for r in json.loads(out)] == ["l1", "l2", "bmo"]
    code, _, err = run(["norms", "--in", d / "f.gfn", "--norms", "l7"], capsys)
    assert code == 2 and "ConfigurationError" in err


def test_atoms_and_holder(pair, capsys):
    d, _, _ = pair
    code, out, _ = run(["atoms", "--in", d / "f.gfn"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["count"] == len(rep["atoms"]) and rep["reconstruction_error"] < 1e-12
    code, out, _ = run(["holder", "--f", d / "f.gfn", "--g", d / "g.gfn"], capsys)
    assert code == 0 and json.loads(out)["ratio"] > 0


def test_gen_then_divcurl_schema(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dims": 2, "J2": 6}))
    code, _, _ = run(["--config", cfg, "--seed", 5, "--out", tmp_path, "gen", "--kind", "band-limited-potential", "--count", 1], capsys)
    assert code == 0
    entry = json.loads((tmp_path / "corpus.json").read_text())["items"][0]
    code, out, _ = run(["divcurl", "--u", tmp_path / entry["file"], "--v", tmp_path / entry["partner"]], capsys)
    rep = json.loads(out)
    assert code == 0
    assert list(rep) == sorted(
        ["curl_residual", "div_residual", "riesz_identity_residual", "integral_FG", "hlog", "h1_F", "bmo_plus_G", "ratio"]
    )
    assert abs(rep["integral_FG"]) < 1e-8 and rep["riesz_identity_residual"] < 1e-8


def test_gen_is_deterministic(tmp_path, capsys):
    for sub in ("a", "b"):
        code, _, _ = run(["--seed", 9, "--out", tmp_path / sub, "gen", "--kind", "atom", "--count", 2, "--J", 8], capsys)
        assert code == 0
    for name in ("atom_00000.gfn", "atom_00001.gfn", "corpus.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bad_inputs_exit_2(tmp_path, capsys):
    (tmp_path / "junk.gfn").write_bytes(b"nonsense")
    code, _, err = run(["norms", "--in", tmp_path / "junk.gfn"], capsys)
    assert code == 2 and "GridFormatError" in err
    code, _, err = run(["--filter", "haar", "transform", "--catalog"], capsys)
    assert code == 2 and "haar" in err
    code, _, err = run(["gen", "--kind", "atom", "--params", "{bad"], capsys)
    assert code == 2


def test_selfcheck_detects_perturbation(capsys):
    code, out, err = run(["selfcheck", "--only", "1", "--perturb", "1e-3"], capsys)
    assert code == 1 and "criterion 1" in err
    code, out, _ = run(["selfcheck", "--only", "1,6"], capsys)
    assert code == 0 and out.count("[PASS]") == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "paraproducts", "transform", "--catalog"], capture_output=True, text=True, check=True
    )
    assert "db8" in res.stdout
