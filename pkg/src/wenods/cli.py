"""Command-line entry point: dataset generation, solving, scheme comparison.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
Diagnostics go to stderr; data products only to files under --out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import metrics
from .cnn import load_weights
from .errors import (MissingModel, NonPhysicalState, SchemaError, UnknownConfiguration,
                     UnknownName, WenodsError)
from .euler import GasModel, conserved_to_primitive
from .riemann import (RiemannSpec, builtin_ic, builtin_names, max_residual,
                      sample_spec, SUPPORTED_TAGS)
from .solver import SchemeConfig, make_reference, restrict, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

WEIGHTS_ENV = "WENO_DS_WEIGHTS"


class _UsageError(Exception):
    pass


def _log(msg: str):
    print(msg, file=sys.stderr)


def _parse_grid(text: str):
    try:
        nx, ny = (int(part) for part in text.lower().split("x"))
        if nx <= 0 or ny <= 0:
            raise ValueError
        return nx, ny
    except ValueError:
        raise _UsageError(f"--grid expects NxN, e.g. 100x100, got {text!r}")


def _load_ic(name_or_path: str) -> RiemannSpec:
    if os.path.exists(name_or_path):
        try:
            return RiemannSpec.from_dict(metrics.read_json(name_or_path))
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise _UsageError(f"bad spec file {name_or_path}: {exc}")
    try:
        return builtin_ic(name_or_path)
    except UnknownName:
        raise _UsageError(
            f"{name_or_path!r} is neither a spec file nor one of {builtin_names()}")


def _scheme_config(args) -> SchemeConfig:
    model = None
    if args.scheme.startswith("ds-"):
        weights = args.weights or os.environ.get(WEIGHTS_ENV)
        if not weights:
            raise _UsageError(
                f"scheme {args.scheme} needs --weights or ${WEIGHTS_ENV}")
        try:
            model = load_weights(weights)
        except (OSError, SchemaError) as exc:
            raise _UsageError(f"cannot load weights {weights}: {exc}")
    eps = getattr(args, "eps", None)
    kwargs = {} if eps is None else {"eps": eps}
    return SchemeConfig(scheme=args.scheme, model=model, **kwargs)


class _OutputDir:
    """Exclusive claim on an output directory for the command's lifetime."""

    def __init__(self, path):
        self.path = path
        self.lock = os.path.join(path, ".wenods.lock")

    def __enter__(self):
        os.makedirs(self.path, exist_ok=True)
        try:
            fd = os.open(self.lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise _UsageError(
                f"output directory {self.path} is in use (found {self.lock})")
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self.path

    def __exit__(self, *exc):
        try:
            os.remove(self.lock)
        except OSError:
            pass
        return False


def _write_solution(out_dir, grid, gas):
    prim = conserved_to_primitive(grid.interior, gas)
    metrics.write_field(os.path.join(out_dir, "final.f64grid"),
                        np.moveaxis(grid.interior, -1, 0))
    for i, name in enumerate(metrics.VARIABLES):
        metrics.write_field(os.path.join(out_dir, f"{name}.f64grid"), prim[..., i])
    return prim


def _read_reference(ref_dir):
    path = os.path.join(ref_dir, "final.f64grid")
    report_path = os.path.join(ref_dir, "report.json")
    if not (os.path.isfile(path) and os.path.isfile(report_path)):
        raise _UsageError(
            f"reference directory {ref_dir} needs final.f64grid and report.json")
    conserved = np.moveaxis(metrics.read_field(path), 0, -1)
    report = metrics.read_json(report_path)
    return conserved, report


def cmd_generate(args) -> int:
    if args.config_tag not in SUPPORTED_TAGS:
        raise _UsageError(
            f"--config-tag must be one of {list(SUPPORTED_TAGS)}, got {args.config_tag}")
    if args.count < 0:
        raise _UsageError("--count must be non-negative")
    rng = np.random.default_rng(args.seed)
    with _OutputDir(args.out) as out_dir:
        problems = []
        for index in range(args.count):
            spec = sample_spec(args.config_tag, rng)
            residual = max_residual(spec)
            _log(f"[generate] problem {index}: T={spec.t_final:.4f} "
                 f"gamma={spec.gamma:.4f} relation residual {residual:.2e}")
            problem_dir = os.path.join(out_dir, f"problem_{index:04d}")
            try:
                entry = make_reference(
                    spec, problem_dir, nx=args.fine_grid, ny=args.fine_grid,
                    snapshot_every=args.snapshot_every, label="t")
            except NonPhysicalState as exc:
                _log(f"[generate] problem {index} blew up: {exc}")
                return EXIT_NUMERICAL
            entry["index"] = index
            entry["relation_residual"] = residual
            entry["dir"] = f"problem_{index:04d}"
            problems.append(entry)
        manifest = {
            "format_version": 1,
            "config_tag": args.config_tag,
            "seed": args.seed,
            "count": args.count,
            "fine_grid": [args.fine_grid, args.fine_grid],
            "snapshot_every": args.snapshot_every,
            "problems": problems,
            "resolved_config": _resolved(args),
        }
        metrics.write_json(os.path.join(out_dir, "manifest.json"), manifest)
        _log(f"[generate] wrote {args.count} problems to {out_dir}")
    return EXIT_OK


def cmd_solve(args) -> int:
    spec = _load_ic(args.ic)
    if args.t_final is not None:
        spec = RiemannSpec(states=spec.states, gamma=spec.gamma,
                           t_final=args.t_final, config_tag=spec.config_tag)
    nx, ny = _parse_grid(args.grid)
    cfg = _scheme_config(args)
    gas = GasModel(spec.gamma)

    reference = None
    if args.reference:
        conserved, report = _read_reference(args.reference)
        fnx, fny = conserved.shape[:2]
        if fnx % nx or fny % ny:
            raise _UsageError(
                f"reference grid {fnx}x{fny} does not nest on {nx}x{ny}")
        reference = conserved_to_primitive(restrict(conserved, nx, ny), gas)

    with _OutputDir(args.out) as out_dir:
        try:
            result = run(spec, nx, ny, cfg, snapshot_every=args.snapshot_every)
        except NonPhysicalState as exc:
            _log(f"[solve] {exc}")
            return EXIT_NUMERICAL
        prim = _write_solution(out_dir, result.grid, gas)
        report = {
            "ic": args.ic,
            "spec": spec.to_dict(),
            "grid": [nx, ny],
            "scheme": cfg.scheme,
            "eps": cfg.eps,
            "n_steps": result.n_steps,
            "wall_time": result.wall_time,
            "resolved_config": _resolved(args),
        }
        if reference is not None:
            report["errors"] = metrics.per_variable_errors(prim, reference)
            for i, name in enumerate(metrics.VARIABLES):
                metrics.write_field(
                    os.path.join(out_dir, f"error_{name}.f64grid"),
                    metrics.pointwise_error(prim[..., i], reference[..., i]))
        metrics.write_json(os.path.join(out_dir, "report.json"), report)
        _log(f"[solve] {cfg.scheme} on {nx}x{ny}: {result.n_steps} steps "
             f"in {result.wall_time:.2f}s -> {out_dir}")
    return EXIT_OK


def cmd_compare(args) -> int:
    spec = _load_ic(args.ic)
    if args.t_final is not None:
        spec = RiemannSpec(states=spec.states, gamma=spec.gamma,
                           t_final=args.t_final, config_tag=spec.config_tag)
    try:
        grids = [int(part) for part in args.grids.split(",") if part]
    except ValueError:
        raise _UsageError(f"--grids expects comma-separated sizes, got {args.grids!r}")
    if not grids:
        raise _UsageError("--grids is empty")

    base_args = argparse.Namespace(scheme=args.baseline, weights=args.weights)
    cand_args = argparse.Namespace(scheme=args.candidate, weights=args.weights)
    baseline_cfg = _scheme_config(base_args)
    candidate_cfg = _scheme_config(cand_args)

    conserved, ref_report = _read_reference(args.reference)
    gas = GasModel(spec.gamma)
    reference = conserved_to_primitive(conserved, gas)
    for n in grids:
        if conserved.shape[0] % n or conserved.shape[1] % n:
            raise _UsageError(
                f"reference grid {conserved.shape[0]}x{conserved.shape[1]} "
                f"does not nest on {n}x{n}")

    with _OutputDir(args.out) as out_dir:
        try:
            table = metrics.compare_table(spec, grids, baseline_cfg,
                                          candidate_cfg, reference)
        except NonPhysicalState as exc:
            _log(f"[compare] {exc}")
            return EXIT_NUMERICAL
        for row in table["rows"]:
            n = row["grid"][0]
            ref_n = restrict(reference, n, n)
            for role in ("baseline", "candidate"):
                prim = row["_fields"][role]
                scheme = row[role]["scheme"]
                metrics.write_field(
                    os.path.join(out_dir, f"error_rho_{scheme}_{n}.f64grid"),
                    metrics.pointwise_error(prim[..., 0], ref_n[..., 0]))
        doc = metrics.table_document(table)
        doc["reference"] = {"dir": args.reference, "report": ref_report}
        doc["resolved_config"] = _resolved(args)
        metrics.write_json(os.path.join(out_dir, "table.json"), doc)
        text = metrics.format_table(table)
        with open(os.path.join(out_dir, "table.txt"), "w") as fh:
            fh.write(text)
        _log(text)
    return EXIT_OK


def _resolved(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _require_flags(args, names):
    for name in names:
        if getattr(args, name.replace("-", "_"), None) in (None, ""):
            raise _UsageError(f"--{name} is required (flag or --config entry)")


def _apply_config_file(parser, submap, args, argv):
    """Fill subcommand defaults from --config JSON; explicit flags win."""
    if not getattr(args, "config", None):
        return args
    try:
        doc = metrics.read_json(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read --config {args.config}: {exc}")
    if not isinstance(doc, dict):
        raise _UsageError("--config file must hold a JSON object")
    defaults = {key.replace("-", "_"): value for key, value in doc.items()}
    unknown = set(defaults) - set(vars(args))
    if unknown:
        raise _UsageError(f"--config has unknown keys {sorted(unknown)}")
    submap[args.command].set_defaults(**defaults)
    return parser.parse_args(argv)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wenods",
        description="WENO solvers for 2D Euler Riemann problems, with "
                    "CNN-adjusted smoothness indicators.")
    sub = parser.add_subparsers(dest="command", required=True)
    submap = {}

    def common(p):
        p.add_argument("--config", help="JSON file with defaults for any flag")
        p.add_argument("--out", help="output directory (required)")

    p = submap["generate"] = sub.add_parser(
        "generate", help="sample Riemann data and store fine references")
    common(p)
    p.add_argument("--config-tag", type=int, default=3,
                   help=f"configuration tag, one of {list(SUPPORTED_TAGS)}")
    p.add_argument("--count", type=int, default=50, help="number of problems")
    p.add_argument("--seed", type=int, default=0, help="sampler seed")
    p.add_argument("--fine-grid", type=int, default=400, help="reference grid size")
    p.add_argument("--snapshot-every", type=int, default=1,
                   help="store every m-th step (1 = every step)")
    p.set_defaults(func=cmd_generate)

    p = submap["solve"] = sub.add_parser(
        "solve", help="integrate one problem and export fields")
    common(p)
    p.add_argument("--ic", help="built-in name (config2, ...) or JSON spec file")
    p.add_argument("--grid", default="100x100", help="grid size NxN")
    p.add_argument("--scheme", default="z", choices=["js", "z", "ds-js", "ds-z"])
    p.add_argument("--weights", help=f"CNN weight file (or ${WEIGHTS_ENV})")
    p.add_argument("--eps", type=float, default=None,
                   help="weight regularisation override")
    p.add_argument("--t-final", type=float, default=None, help="override final time")
    p.add_argument("--reference", help="directory with a fine-grid solve to "
                                       "evaluate errors against")
    p.add_argument("--snapshot-every", type=int, default=0,
                   help="0 keeps only the final state")
    p.set_defaults(func=cmd_solve)

    p = submap["compare"] = sub.add_parser(
        "compare", help="error table of two schemes against a reference")
    common(p)
    p.add_argument("--ic")
    p.add_argument("--grids", default="50,100,200", help="comma-separated sizes")
    p.add_argument("--baseline", default="z", choices=["js", "z", "ds-js", "ds-z"])
    p.add_argument("--candidate", default="ds-z", choices=["js", "z", "ds-js", "ds-z"])
    p.add_argument("--weights", help=f"CNN weight file (or ${WEIGHTS_ENV})")
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--reference",
                   help="directory holding the fine-grid reference solve")
    p.set_defaults(func=cmd_compare)
    return parser, submap


_REQUIRED = {"generate": ("out",), "solve": ("out", "ic"),
             "compare": ("out", "ic", "reference")}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, submap = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(parser, submap, args, argv)
        _require_flags(args, _REQUIRED[args.command])
        return args.func(args)
    except _UsageError as exc:
        _log(f"error: {exc}")
        return EXIT_CONFIG
    except (UnknownConfiguration, UnknownName, SchemaError, MissingModel) as exc:
        _log(f"error: {exc}")
        return EXIT_CONFIG
    except NonPhysicalState as exc:
        _log(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    except WenodsError as exc:
        _log(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
