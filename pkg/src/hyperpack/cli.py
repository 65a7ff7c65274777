"""Command-line entry point: ``hyperpack <subcommand> [options]``.

Exit codes: 0 success, 1 validation failure, 2 I/O or file-format error.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import _kernels
from .config import RunConfig
from .errors import ConfigError, FormatError, HyperpackError
from .gallery import Gallery
from .io import (
    atomic_write,
    format_flat_config,
    load_embeddings,
    save_embeddings,
    write_json,
    write_manifest,
    write_trace,
)
from .metrics import compare_runs, format_table, packing_report
from .packing import GallerySubset, UniformRandom, init_references, optimize, verify_unbiasedness
from .sampling import generate_manifest
from .sphere import random_units
from .suites import gradient_suite, tammes_suite, unbiasedness_sweep

log = logging.getLogger("hyperpack")

UNBIASED_TOL = 1e-12
GRAD_TOL = 1e-5
PACKING_RATIO = 0.98

PACKING_KEYS = [
    "n_id", "dim", "iters", "alpha", "lr", "lr_decay", "lr_interval", "batch_size",
    "seed", "reg_refresh", "reg_in_cost",
]
GALLERY_KEYS = ["gallery", "n_gallery", "gallery_clusters", "gallery_concentration", "gallery_seed"]
COMMAND_KEYS = {
    "init": ["n_id", "dim", "seed", "init", *GALLERY_KEYS, "out"],
    "optimize": [*PACKING_KEYS, "init", "refs", *GALLERY_KEYS, "out", "trace"],
    "sample": ["refs", "beta", "per_id", "sample_seed", "manifest", "emb_out"],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_config_flags(p, keys):
    p.add_argument("--config", help="flat key = value config file; flags override it")
    for key in keys:
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar=key.upper())


def build_parser():
    parser = _Parser(prog="hyperpack", description="Max-min packing of identity embeddings on the unit sphere.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("init", help="write initial reference embeddings")
    _add_config_flags(p, COMMAND_KEYS["init"])

    p = sub.add_parser("optimize", help="run the packing optimization")
    _add_config_flags(p, COMMAND_KEYS["optimize"])

    p = sub.add_parser("sample", help="perturbed per-identity samples and manifest")
    _add_config_flags(p, COMMAND_KEYS["sample"])

    p = sub.add_parser("eval", help="packing report for references, or compare traces")
    p.add_argument("--refs", help="HYPF reference file")
    p.add_argument("--gallery", help="HYPF gallery file for the nearest-gallery statistic")
    p.add_argument("--out", help="also write the JSON report here")
    p.add_argument("--traces", nargs="+", help="trace JSONL files to compare")
    p.add_argument("--labels", nargs="+", help="labels for --traces (default: file stems)")

    p = sub.add_parser("verify-theorem", help="exhaustive mini-batch gradient unbiasedness check")
    p.add_argument("--n", type=int, help="number of points (omit for the n <= 8 sweep)")
    p.add_argument("--b", type=int, help="batch size (omit to sweep 2..n)")
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check-grad", help="finite-difference gradient suite")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("tammes", help="known-optima benchmark suite")
    p.add_argument("--max-dim", type=int, default=9)
    p.add_argument("--iters", type=int, default=20_000, help="iterations for simplex cases")
    p.add_argument("--s2-iters", type=int, default=50_000, help="iterations for octahedron/icosahedron")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write results as JSON")
    return parser


def _run_config(args, keys):
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    if args.config:
        return RunConfig.load(args.config, overrides)
    return RunConfig.from_mapping(overrides)


def _echo(cfg, output_path):
    atomic_write(Path(str(output_path) + ".cfg"), format_flat_config(cfg.items()))


def _initial_refs(cfg, gallery):
    pc = cfg.packing_config()
    mode = cfg.init.lower()
    if mode == "uniform":
        return init_references(pc, UniformRandom())
    if mode == "gallery":
        if gallery is None:
            raise ConfigError("init = gallery needs a gallery")
        return init_references(pc, GallerySubset(gallery))
    if mode == "file":
        if not cfg.refs:
            raise ConfigError("init = file needs refs = PATH")
        return load_embeddings(cfg.refs)
    raise ConfigError(f"init must be uniform, gallery or file, got {cfg.init!r}")


def cmd_init(args):
    cfg = _run_config(args, COMMAND_KEYS["init"])
    gallery = cfg.resolve_gallery() if cfg.init.lower() == "gallery" else None
    refs = _initial_refs(cfg, gallery)
    save_embeddings(refs, cfg.out)
    _echo(cfg, cfg.out)
    print(json.dumps({"out": cfg.out, "count": int(refs.shape[0]), "dim": int(refs.shape[1])}))
    return 0


def cmd_optimize(args):
    cfg = _run_config(args, COMMAND_KEYS["optimize"])
    pc = cfg.packing_config()
    gallery = cfg.resolve_gallery()
    refs = _initial_refs(cfg, gallery)
    log.info("optimizing n_id=%d dim=%d iters=%d batch=%d backend=%s",
             pc.n_id, pc.dim, pc.n_itr, pc.batch_size, _kernels.BACKEND)
    start = time.perf_counter()
    refs, trace = optimize(pc, gallery, refs=refs)
    save_embeddings(refs, cfg.out)
    if cfg.trace:
        write_trace(trace, cfg.trace)
    _echo(cfg, cfg.out)
    report = packing_report(refs) if pc.n_id >= 2 else None
    print(json.dumps({
        "out": cfg.out,
        "iters": len(trace),
        "min_dist": report.min_dist if report else None,
        "seconds": round(time.perf_counter() - start, 3),
    }))
    return 0


def cmd_sample(args):
    cfg = _run_config(args, COMMAND_KEYS["sample"])
    if not cfg.refs:
        raise ConfigError("sample needs --refs PATH")
    refs = load_embeddings(cfg.refs)
    manifest = generate_manifest(refs, cfg.sample_spec())
    write_manifest(manifest, cfg.manifest)
    if cfg.emb_out:
        save_embeddings(manifest.embeddings(), cfg.emb_out)
    _echo(cfg, cfg.manifest)
    print(json.dumps({"manifest": cfg.manifest, "entries": len(manifest)}))
    return 0


def cmd_eval(args):
    if args.traces:
        rows = compare_runs(args.traces, args.labels)
        print(format_table(rows))
        return 0
    if not args.refs:
        raise ConfigError("eval needs --refs PATH or --traces FILE...")
    refs = load_embeddings(args.refs)
    gallery = Gallery(load_embeddings(args.gallery), args.gallery) if args.gallery else None
    report = packing_report(refs, gallery).to_json()
    if args.out:
        write_json(report, args.out)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_verify_theorem(args):
    if args.n is not None:
        X = random_units(args.n, args.dim, np.random.default_rng(args.seed))
        bs = [args.b] if args.b is not None else range(2, args.n + 1)
        rows = []
        for b in bs:
            _, _, diff = verify_unbiasedness(X, b)
            rows.append((args.n, b, None, diff))
    else:
        rows = unbiasedness_sweep(8, args.dim, args.seed)
    worst = 0.0
    for n, b, _, diff in rows:
        print(f"n={n} b={b} max_abs_diff={diff:.3e}")
        worst = max(worst, diff)
    ok = worst <= UNBIASED_TOL
    print(f"{'PASS' if ok else 'FAIL'} max_abs_diff={worst:.3e} (tol {UNBIASED_TOL:g})")
    return 0 if ok else 1


def cmd_check_grad(args):
    errors = gradient_suite(args.trials, args.seed)
    worst = max(errors)
    ok = worst <= GRAD_TOL
    print(f"{'PASS' if ok else 'FAIL'} trials={len(errors)} max_rel_err={worst:.3e} (tol {GRAD_TOL:g})")
    return 0 if ok else 1


def cmd_tammes(args):
    rows = tammes_suite(args.max_dim, args.iters, args.s2_iters, args.seed)
    print(f"{'n':>3} {'dim':>3} {'iters':>6} {'target':>9} {'achieved':>9} {'ratio':>7} {'sec':>6}")
    ok = True
    for r in rows:
        flag = "" if r.ratio >= PACKING_RATIO else "  << below 98%"
        ok = ok and not flag
        print(f"{r.n:>3} {r.dim:>3} {r.iters:>6} {r.target:>9.5f} {r.achieved:>9.5f} "
              f"{r.ratio:>7.4f} {r.seconds:>6.2f}{flag}")
    if args.out:
        write_json([dict(vars(r), ratio=r.ratio) for r in rows], args.out)
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


COMMANDS = {
    "init": cmd_init,
    "optimize": cmd_optimize,
    "sample": cmd_sample,
    "eval": cmd_eval,
    "verify-theorem": cmd_verify_theorem,
    "check-grad": cmd_check_grad,
    "tammes": cmd_tammes,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return COMMANDS[args.command](args)
    except (FormatError, OSError) as exc:
        print(f"hyperpack: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (HyperpackError, ValueError) as exc:
        print(f"hyperpack: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def run_cli(argv):
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
