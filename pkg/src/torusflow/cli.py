"""Command-line interface: ``torusflow <subcommand> [options]``.

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bfld
from .besov import BesovParams, besov_norm_of
from .config import PRESETS, ConfigError, RunConfig, load_config, preset
from .fourier_core import GridError, PeriodicGrid, PhysicalField, random_field, sobolev_norm
from .littlewood_paley import (
    LOW_BLOCK,
    PartitionMode,
    PartitionProfile,
    build_partition,
    project,
    reconstruction_residual,
)
from .quaternion_dynamics import BUILTIN_FAMILIES, BifurcationScan, builtin_family, find_crossing, scan_max_real_part
from .simulation import SCHEMA, simulate, trajectory_csv, trajectory_jsonl
from .spectral_nse import BlowUpError, CFLError
from .verify import LEVELS, format_table, run_suites

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3


class _Failure(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_table(out: Path, stem: str, fmt: str, header: list[str], rows: list[list]) -> Path:
    """Write rows as CSV (with header) or JSONL (one schema-tagged record per row)."""
    if fmt == "jsonl":
        path = out / f"{stem}.jsonl"
        text = "".join(
            json.dumps({"schema": SCHEMA, **dict(zip(header, row))}, sort_keys=True) + "\n"
            for row in rows
        )
    else:
        path = out / f"{stem}.csv"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
        text = buf.getvalue()
    path.write_text(text, encoding="utf-8")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg.with_seed(args.seed)


def _profile(args, cfg: RunConfig, default_mode: str) -> PartitionProfile:
    mode = args.mode or (cfg.partition_mode if args.config else default_mode)
    c1 = cfg.c1 if args.c1 is None else args.c1
    c2 = cfg.c2 if args.c2 is None else args.c2
    return PartitionProfile(PartitionMode(mode), c1, c2)


def _shell_name(j: int) -> str:
    return "shell_low" if j == LOW_BLOCK else f"shell_{j}"


def cmd_generate(args) -> int:
    cfg = _config(args)
    grid = PeriodicGrid(args.dim, args.n)
    rng = np.random.default_rng(cfg.seed)
    if args.kind == "random":
        f = random_field(grid, rng)
    elif args.kind == "zero":
        f = PhysicalField.zeros(grid)
    else:
        k = args.wavenumber * 2.0 * math.pi / grid.length
        f = PhysicalField(grid, np.cos(k * grid.coordinates()[0]))
    out = _out_dir(args)
    path = out / args.name
    bfld.write(path, f)
    print(path)
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg = _config(args)
    f = bfld.read(args.field)
    part = build_partition(f.grid, _profile(args, cfg, "reconstruction"))
    out = _out_dir(args)
    rows = []
    for j in part.indices:
        block = project(part, f, j)
        bfld.write(out / f"{_shell_name(j)}.bfld", block)
        l2 = math.sqrt(f.grid.cell_volume * float(np.sum(block.samples**2)))
        rows.append([j, l2])
    path = _write_table(out, "shells", args.format, ["shell", "l2_norm"], rows)
    print(f"wrote {len(rows)} shells and {path}")
    if args.check_reconstruction:
        if part.mode is not PartitionMode.RECONSTRUCTION:
            raise _Failure("--check-reconstruction needs a reconstruction partition", EXIT_VALIDATION)
        print(f"reconstruction_residual {_fmt(reconstruction_residual(part, f))}")
    return EXIT_OK


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected 's p q', got {text!r}")
    try:
        return tuple(math.inf if x.lower() == "inf" else float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric norm triple {text!r}") from None


def cmd_norms(args) -> int:
    cfg = _config(args)
    f = bfld.read(args.field)
    part = build_partition(f.grid, _profile(args, cfg, "energy"))
    triples = args.triple or list(cfg.besov)
    rows = []
    for s, p, q in triples:
        params = BesovParams(s, p, q)
        rows.append([s, p, q, sobolev_norm(f, s), besov_norm_of(f, params, part)])
    out = _out_dir(args)
    path = _write_table(out, "norms", args.format, ["s", "p", "q", "sobolev", "besov"], rows)
    print(path.read_text(encoding="utf-8"), end="")
    return EXIT_OK


def _initial_fields(cfg: RunConfig):
    if cfg.initial != "files":
        return None
    fields = []
    for k in range(cfg.dim):
        key = f"u{k + 1}"
        if key not in cfg.initial_params:
            raise ConfigError(f"'files' initial condition needs {key} in [initial]")
        fields.append(bfld.read(cfg.initial_params[key]))
    return fields


def cmd_simulate(args) -> int:
    if args.preset and args.config:
        raise _Failure("give either --preset or --config, not both", EXIT_VALIDATION)
    cfg = preset(args.preset) if args.preset else _config(args)
    cfg = cfg.with_seed(args.seed)
    result = simulate(cfg, _initial_fields(cfg))
    out = _out_dir(args)
    if args.format == "jsonl":
        (out / "trajectory.jsonl").write_text(trajectory_jsonl(result), encoding="utf-8")
    else:
        (out / "trajectory.csv").write_text(trajectory_csv(result), encoding="utf-8")
    (out / "bounds.json").write_text(result.bounds_json() + "\n", encoding="utf-8")
    (out / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")
    for k, comp in enumerate(result.trajectory.final.physical_components()):
        bfld.write(out / f"final_u{k + 1}.bfld", comp)
    bad = [name for name, rep in result.bounds.get("bounds", {}).items() if not rep["satisfied"]]
    print(f"{cfg.name}: {result.trajectory.steps} steps, {len(result.trajectory)} samples -> {out}")
    if bad:
        print(f"bound checks not satisfied: {', '.join(bad)}")
    return EXIT_OK


def cmd_bifurcate(args) -> int:
    scan = BifurcationScan(args.parameter, builtin_family(args.family), args.mu_lo, args.mu_hi, args.samples)
    mus, vals = scan_max_real_part(scan)
    crossings = find_crossing(scan, args.tol)
    out = _out_dir(args)
    rows = [[float(m), float(v)] for m, v in zip(mus, vals)]
    _write_table(out, "scan", args.format, ["mu", "max_real_part"], rows)
    doc = {
        "schema": SCHEMA,
        "family": args.family,
        "parameter": args.parameter,
        "range": [args.mu_lo, args.mu_hi],
        "samples": args.samples,
        "tol": args.tol,
        "crossings": [c.as_dict() for c in crossings],
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    (out / "crossings.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suites(args.level, args.inject_fault)
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def _global_options(parser: argparse.ArgumentParser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", metavar="PATH", default=default(None), help="run configuration (INI)")
    parser.add_argument("--out", metavar="DIR", default=default("."), help="output directory")
    parser.add_argument("--seed", type=int, default=default(None), help="override the configured seed")
    parser.add_argument("--format", choices=("csv", "jsonl"), default=default("csv"), help="table format")


def _partition_options(parser: argparse.ArgumentParser):
    parser.add_argument("--mode", choices=[m.value for m in PartitionMode])
    parser.add_argument("--c1", type=float)
    parser.add_argument("--c2", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torusflow", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_options(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = add("generate", cmd_generate, "write a test field as BFLD")
    p.add_argument("kind", choices=("random", "zero", "mode"))
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--wavenumber", type=int, default=4)
    p.add_argument("--name", default="field.bfld")

    p = add("decompose", cmd_decompose, "split a field into dyadic shells")
    p.add_argument("field")
    _partition_options(p)
    p.add_argument("--check-reconstruction", action="store_true")

    p = add("norms", cmd_norms, "Sobolev and Besov norms of a field")
    p.add_argument("field")
    p.add_argument("--triple", action="append", type=_parse_triple, metavar="'S P Q'")
    _partition_options(p)

    p = add("simulate", cmd_simulate, "run a configured or preset simulation")
    p.add_argument("--preset", choices=sorted(PRESETS))

    p = add("bifurcate", cmd_bifurcate, "scan an operator family for crossings")
    p.add_argument("--family", required=True, choices=sorted(BUILTIN_FAMILIES))
    p.add_argument("--mu-lo", type=float, default=-1.0)
    p.add_argument("--mu-hi", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--parameter", default="mu")

    p = add("verify", cmd_verify, "run the self-verification suites")
    p.add_argument("--level", choices=LEVELS, default="default")
    p.add_argument("--inject-fault", choices=("partition",), help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except BlowUpError as exc:
        print(f"numerical failure: {exc} (t={exc.time!r})", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CFLError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except bfld.BFLDFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, GridError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
