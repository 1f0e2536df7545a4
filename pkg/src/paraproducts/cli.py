"""Command-line front end: ``paraproducts <subcommand> ...``.

Reports are JSON; function payloads are GFN1 files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .atoms import atomic_decompose
from .config import DEFAULT_TOLERANCES, RunConfig
from .corpus import KINDS, CorpusSpec, gen_corpus
from .divcurl import potential_fields, divcurl_product
from .errors import ConfigurationError, ParaproductError
from .filters import filter_catalog_csv
from .grid import Box, integrate, read_grid, write_grid
from .paraproduct import paraproduct_split
from .selfcheck import run_selfcheck
from .spaces import NORM_NAMES, holder_product_bound, lp_norm, norm_reports
from .wavelet import dwt_forward, dwt_inverse


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _emit(report, path, out_dir, default_name):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if path is None and out_dir is not None:
        path = os.path.join(out_dir, default_name)
    if path is None:
        print(text)
    else:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return path


def _config(args) -> RunConfig:
    return RunConfig.load(args.config, seed=args.seed, filter=args.filter)


def _coarse(f, cfg):
    return max(cfg.j0, f.coarsest_level)


# ---------------------------------------------------------------------------


def cmd_transform(args, cfg):
    if args.catalog:
        text = filter_catalog_csv()
        if args.out is None:
            sys.stdout.write(text)
        else:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, "filters.csv"), "w") as fh:
                fh.write(text)
        return 0
    if args.input is None:
        raise ConfigurationError("transform needs --in (or --catalog)")
    f = read_grid(args.input)
    j0 = args.j0 if args.j0 is not None else _coarse(f, cfg)
    c = dwt_forward(f, j0, cfg.filter)
    rec = dwt_inverse(c)
    energy = lp_norm(f, 2) ** 2
    report = {
        "filter": c.filter.name,
        "J": c.J,
        "j0": c.j0,
        "scaling": c.scaling,
        "detail": {str(j): c.detail[j] for j in c.levels},
        "parseval_residual": abs(c.energy() - energy) / max(energy, 1e-300),
        "reconstruction_residual": float(np.max(np.abs(rec.samples - f.samples))),
    }
    _emit(report, args.report, args.out, "transform.json")
    return 0


def cmd_split(args, cfg):
    f, g = read_grid(args.f), read_grid(args.g)
    j0 = args.j0 if args.j0 is not None else _coarse(f, cfg)
    sp = paraproduct_split(f, g, j0, cfg.filter, fold_coarse=args.fold_coarse)
    rev = paraproduct_split(g, f, j0, cfg.filter)
    prefix = args.out_prefix
    d = os.path.dirname(prefix)
    if d:
        os.makedirs(d, exist_ok=True)
    pieces = {"pi1": sp.pi1, "pi2": sp.pi2, "pi3": sp.pi3, "coarse": sp.coarse_term}
    files = {}
    for name, piece in pieces.items():
        files[name] = f"{prefix}_{name}.gfn"
        write_grid(piece, files[name])
    fg = f * g
    report = {
        "j0": j0,
        "filter": cfg.filter,
        "fold_coarse": args.fold_coarse,
        "files": files,
        "norms": {name: {"l1": lp_norm(p, 1), "l2": lp_norm(p, 2), "linf": lp_norm(p, np.inf)} for name, p in pieces.items()},
        "residuals": {
            "split": float(np.max(np.abs((sp.total() - fg).samples))),
            "symmetry_pi2_vs_pi1_swapped": float(np.max(np.abs((sp.pi2 - rev.pi1).samples))) if not sp.folded else None,
            "integral_T": integrate(sp.T),
            "integral_pi1": integrate(sp.pi1),
            "integral_pi2": integrate(sp.pi2),
        },
    }
    _emit(report, args.report or f"{prefix}_report.json", None, None)
    return 0


def cmd_norms(args, cfg):
    f = read_grid(args.input)
    names = [n.strip() for n in args.norms.split(",") if n.strip()]
    bad = [n for n in names if n not in NORM_NAMES]
    if bad:
        raise ConfigurationError(f"unknown norms {bad}; choose from {', '.join(NORM_NAMES)}")
    reps = norm_reports(f, names, _coarse(f, cfg), cfg.filter)
    _emit([r.to_dict() for r in reps], args.report, args.out, "norms.json")
    return 0


def cmd_atoms(args, cfg):
    f = read_grid(args.input)
    c = dwt_forward(f, f.coarsest_level, cfg.filter)
    removed = float(np.sqrt(np.sum(c.scaling**2)))
    dec = atomic_decompose(c.with_zero_scaling())
    report = {
        "filter": cfg.filter,
        "removed_scaling_norm": removed,
        "atoms": [
            {"mu": mu, "R": {"j": R.j, "k": list(R.k)}, "l2_norm": atom.l2_norm, "bound": R.volume**-0.5}
            for mu, atom, R in dec.terms
        ],
        "count": len(dec.terms),
        "l1_mass": dec.l1_mass,
        "h1": dec.h1,
        "ratio": dec.ratio,
        "reconstruction_error": dec.reconstruction_error(),
    }
    _emit(report, args.report, args.out, "atoms.json")
    return 0


def cmd_holder(args, cfg):
    f, g = read_grid(args.f), read_grid(args.g)
    gc = dwt_forward(g, g.coarsest_level, cfg.filter)
    rep = holder_product_bound(f, g, gc)
    _emit(vars(rep), args.report, args.out, "holder.json")
    return 0


def cmd_divcurl(args, cfg):
    u, v = read_grid(args.u), read_grid(args.v)
    F, G = potential_fields(u, v)
    rep = divcurl_product(F, G, u.coarsest_level, cfg.filter)
    _emit(rep.to_dict(), args.report, args.out, "divcurl.json")
    return 0


def cmd_gen(args, cfg):
    try:
        params = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"--params is not valid JSON ({exc})") from exc
    spec = CorpusSpec(args.kind, params)
    box = Box((cfg.origin,) * cfg.dims, cfg.side, cfg.dims)
    J = args.J if args.J is not None else (cfg.J if cfg.dims == 1 else cfg.J2)
    count = args.count if args.count is not None else (cfg.corpus_size or 1)
    items = gen_corpus(spec, cfg.seed, count, box, J, cfg.filter)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    index = []
    for it in items:
        entry = {"index": it.index, "file": f"{args.kind}_{it.index:05d}.gfn"}
        write_grid(it.function, os.path.join(out, entry["file"]))
        if it.partner is not None:
            entry["partner"] = f"{args.kind}_{it.index:05d}_v.gfn"
            write_grid(it.partner, os.path.join(out, entry["partner"]))
        if it.cube is not None:
            entry["R"] = {"j": it.cube.j, "k": list(it.cube.k)}
        index.append(entry)
    _emit({"kind": args.kind, "seed": cfg.seed, "J": J, "params": spec.params, "items": index}, None, out, "corpus.json")
    return 0


def cmd_selfcheck(args, cfg):
    tol = dict(cfg.tolerances)
    for item in args.tolerance or []:
        key, _, value = item.partition("=")
        if key not in DEFAULT_TOLERANCES:
            raise ConfigurationError(f"unknown tolerance {key!r}")
        tol[key] = float(value)
    data = cfg.to_dict()
    data["tolerances"] = tol
    if args.perturb is not None:
        data["filter_perturbation"] = args.perturb
    cfg = RunConfig.from_dict(data)
    only = [int(x) for x in args.only.split(",")] if args.only else None
    code, summary = run_selfcheck(cfg, only=only, echo=print)
    if not summary["passed"]:
        ff = summary["first_failure"]
        print(f"FAILED: criterion {ff['id']} ({ff['name']})", file=sys.stderr)
    if args.report or args.out:
        _emit(summary, args.report, args.out, "selfcheck.json")
    return code


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="paraproducts", description="Wavelet paraproducts on dyadic grids.")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--filter", help="haar, db2 ... db8")
    p.add_argument("--out", help="output directory for reports")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="forward DWT report or filter catalog")
    t.add_argument("--in", dest="input")
    t.add_argument("--j0", type=int)
    t.add_argument("--catalog", action="store_true", help="dump the filter catalog as CSV")
    t.add_argument("--report")
    t.set_defaults(func=cmd_transform)

    s = sub.add_parser("split", help="paraproduct decomposition of f g")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--j0", type=int)
    s.add_argument("--fold-coarse", choices=["pi2"], default=None)
    s.add_argument("--out-prefix", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_split)

    n = sub.add_parser("norms", help="function-space norms of a grid function")
    n.add_argument("--in", dest="input", required=True)
    n.add_argument("--norms", default="l1,l2,bmo,bmo+,h1,llog,hlog")
    n.add_argument("--report")
    n.set_defaults(func=cmd_norms)

    a = sub.add_parser("atoms", help="atomic decomposition")
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--report")
    a.set_defaults(func=cmd_atoms)

    h = sub.add_parser("holder", help="generalized Holder ratio")
    h.add_argument("--f", required=True)
    h.add_argument("--g", required=True)
    h.add_argument("--report")
    h.set_defaults(func=cmd_holder)

    d = sub.add_parser("divcurl", help="curl-free times div-free product pipeline (2D)")
    d.add_argument("--u", required=True)
    d.add_argument("--v", required=True)
    d.add_argument("--report")
    d.set_defaults(func=cmd_divcurl)

    g = sub.add_parser("gen", help="generate a corpus as GFN1 files")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--count", type=int)
    g.add_argument("--J", type=int)
    g.add_argument("--params", help="JSON object of corpus parameters")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("selfcheck", help="run the acceptance criteria")
    c.add_argument("--only", help="comma-separated criterion ids")
    c.add_argument("--tolerance", action="append", help="override, e.g. reconstruction=1e-16")
    c.add_argument("--perturb", type=float, help="add this to the first filter tap")
    c.add_argument("--report")
    c.set_defaults(func=cmd_selfcheck)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except ParaproductError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
