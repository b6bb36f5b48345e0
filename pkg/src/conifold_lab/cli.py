"""Command-line front end.

    conifold-lab ct-sample --knot torus:2,3 --eps 0.1 --grid 8 8 4 -o ct.csv
    conifold-lab verify --suite all --config run.json
    conifold-lab report-constants --eps 0.25
    conifold-lab mesh-export --grid 16 16 4 -o mesh.csv

Settings come from an optional JSON config file; command-line flags win.
Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 internal or
numerical error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__, geom
from .conifold import ct_grid
from .distance import build_mesh, embed_resolved, export_csv
from .errors import ConifoldLabError, NumericalError, ParameterError, PreconditionError, UsageError
from .knots import parse_knot_spec
from .suites import RUNNERS, SUITES, FIXTURES, Settings, report_constants
from .verify.samplers import ct_sampler, polar_spec

log = logging.getLogger("conifold_lab")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    knot: str = "unknot"
    eps: float = 0.1
    grid: tuple = (16, 16, 4)
    r_range: tuple = (0.25, 2.0)
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    fixture: str = "all"
    rho: float = 1.0
    neighbors: int = 20
    discs: int = 20
    vector_samples: int = 8

    def validate(self) -> None:
        grid = tuple(self.grid)
        if len(grid) != 3 or any(int(n) != n or n < 2 for n in grid):
            raise ConfigError(f"grid needs three integers >= 2, got {list(grid)}")
        if len(self.r_range) != 2 or not 0 < self.r_range[0] < self.r_range[1]:
            raise ConfigError(f"r-range needs 0 < r_min < r_max, got {list(self.r_range)}")
        if not 0 < self.eps < 1:
            raise ConfigError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.fixture not in FIXTURES and self.fixture != "all":
            raise ConfigError(f"unknown fixture {self.fixture!r}; choose from {sorted(FIXTURES)} or all")
        if self.rho <= 0 or self.neighbors < 2 or self.discs < 1 or self.vector_samples < 1:
            raise ConfigError("rho > 0, neighbors >= 2, discs >= 1 and vector-samples >= 1 are required")
        unknown = set(self.tolerances) - {f.name for f in fields(geom.Tolerances)}
        if unknown:
            raise ConfigError(f"unknown tolerance fields {sorted(unknown)}")
        self.grid = tuple(int(n) for n in grid)
        self.r_range = tuple(float(r) for r in self.r_range)

    def echo(self) -> dict:
        d = asdict(self)
        d["grid"], d["r_range"] = list(self.grid), list(self.r_range)
        d.pop("output")
        return d

    def settings(self) -> Settings:
        return Settings(knot=parse_knot_spec(self.knot), eps=self.eps, grid=self.grid,
                        r_range=self.r_range, seed=int(self.seed),
                        tol=geom.DEFAULT_TOL.replace(**self.tolerances), fixture=self.fixture,
                        rho=self.rho, neighbors=self.neighbors, discs=self.discs,
                        vector_samples=self.vector_samples)


# flag name -> RunConfig field
_OVERRIDES = {"knot": "knot", "eps": "eps", "grid": "grid", "r_range": "r_range", "seed": "seed",
              "output": "output", "fixture": "fixture", "rho": "rho", "neighbors": "neighbors",
              "discs": "discs", "vector_samples": "vector_samples"}


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = set(data) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for flag, name in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = value
    if getattr(args, "tol", None):
        tol = dict(data.get("tolerances", {}))
        for item in args.tol:
            key, _, val = item.partition("=")
            try:
                tol[key] = float(val)
            except ValueError:
                raise ConfigError(f"bad tolerance override {item!r}") from None
        data["tolerances"] = tol
    try:
        cfg = RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg


def worker_count(jobs: int) -> int:
    cap = os.environ.get("CONIFOLD_LAB_THREADS")
    try:
        cap = int(cap) if cap else os.cpu_count() or 1
    except ValueError:
        raise ConfigError("CONIFOLD_LAB_THREADS must be an integer") from None
    return max(1, min(cap, jobs))


def dump_json(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _report(command, cfg, extra, started, timing):
    report = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
              "config": cfg.echo(), **extra}
    if timing:
        report["wall_time_s"] = round(time.perf_counter() - started, 3)
    return report


# ----------------------------------------------------------------- commands


CT_COLUMNS = (["t", "theta", "r", "u_re", "u_im", "v_re", "v_im"]
              + [f"w{i}_{part}" for i in range(1, 5) for part in ("re", "im")] + ["trace_abs"])


def cmd_ct_sample(cfg: RunConfig, args) -> int:
    data = ct_grid(parse_knot_spec(cfg.knot), cfg.eps, cfg.grid, cfg.r_range)
    cols = [data["t"], data["theta"], data["r"], data["u"].real, data["u"].imag,
            data["v"].real, data["v"].imag]
    for i in range(4):
        cols += [data["w"][:, i].real, data["w"][:, i].imag]
    cols.append(data["trace_abs"])
    table = np.stack(cols, -1)
    fh = open(cfg.output, "w", newline="") if cfg.output else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CT_COLUMNS)
        for row in table:
            writer.writerow([repr(float(v)) for v in row])
    finally:
        if cfg.output:
            fh.close()
    return EXIT_OK


def run_suites(names, settings: Settings):
    """Run suites on a thread pool; results come back in the given order."""
    with ThreadPoolExecutor(max_workers=worker_count(len(names))) as pool:
        futures = [pool.submit(RUNNERS[name], settings) for name in names]
        return [f.result() for f in futures]


def cmd_verify(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    names = list(SUITES) if args.suite == "all" else [args.suite]
    settings = cfg.settings()
    results = run_suites(names, settings)
    suites = {}
    failing = []
    for name, records in zip(names, results):
        suites[name] = [r.as_dict() for r in records]
        failing += [f"{name}/{r.name}" for r in records if not r.passed]
    extra = {"suite": args.suite, "suites": suites, "passed": not failing, "failing": failing,
             "excluded_samples": sum(r["excluded"] for recs in suites.values() for r in recs)}
    dump_json(_report("verify", cfg, extra, started, args.timing), cfg.output)
    for name in failing:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_FAIL if failing else EXIT_OK


def cmd_report_constants(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    consts = report_constants(cfg.settings())
    checks = {
        "taming_within_bound": consts["taming_constant"] <= consts["taming_bound"] + 1e-6,
        "bilipschitz_within_bound": consts["bilipschitz_constant"] <= consts["bilipschitz_bound"] + 1e-6,
        "two_point_finite": bool(np.isfinite(consts["two_point_C"])),
        "totally_real": consts["min_totally_real_angle"] > 0,
    }
    consts = {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in consts.items()}
    failing = [k for k, ok in checks.items() if not ok]
    extra = {"constants": consts, "checks": checks, "passed": not failing, "failing": failing}
    dump_json(_report("report-constants", cfg, extra, started, args.timing), cfg.output)
    return EXIT_FAIL if failing else EXIT_OK


def cmd_mesh_export(cfg: RunConfig, args) -> int:
    settings = cfg.settings()
    sampler = ct_sampler(settings.knot, cfg.eps, polar_spec(*cfg.grid, cfg.r_range))
    mesh = build_mesh(sampler, k=cfg.neighbors, embed=embed_resolved)
    export_csv(mesh, cfg.output if cfg.output else sys.stdout)
    return EXIT_OK


COMMANDS = {"ct-sample": cmd_ct_sample, "verify": cmd_verify,
            "report-constants": cmd_report_constants, "mesh-export": cmd_mesh_export}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings (flags override it)")
    common.add_argument("--knot", help="unknot | torus:m,n | fourier:<path>")
    common.add_argument("--eps", type=float, help="regularisation parameter in (0, 1)")
    common.add_argument("--grid", type=int, nargs=3, metavar=("N_T", "N_THETA", "N_R"))
    common.add_argument("--r-range", dest="r_range", type=float, nargs=2, metavar=("R_MIN", "R_MAX"))
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="override a numerical tolerance (repeatable)")
    common.add_argument("-o", "--output", help="output path (default: stdout)")
    common.add_argument("--timing", action="store_true", help="include wall time in JSON reports")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="conifold-lab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ct-sample", parents=[common], help="CSV of conifold-transition samples")
    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", default="all", choices=list(SUITES) + ["all"])
    p.add_argument("--fixture", help=f"curvature fixture: {', '.join(FIXTURES)} or all")
    p.add_argument("--rho", type=float, help="scale of the two-point scan")
    p.add_argument("--neighbors", type=int, help="k of the sample graph")
    p.add_argument("--discs", type=int, help="number of random Stokes discs")
    p.add_argument("--vector-samples", dest="vector_samples", type=int,
                   help="random directions per point in tameness checks")
    p = sub.add_parser("report-constants", parents=[common], help="JSON of measured constants")
    p.add_argument("--rho", type=float)
    p.add_argument("--neighbors", type=int)
    p = sub.add_parser("mesh-export", parents=[common], help="CSV of the CT sample graph vertices")
    p.add_argument("--neighbors", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ParameterError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        # a refused run (e.g. eps above 1/sigma) is a configuration problem
        if str(exc).startswith("refused"):
            print(str(exc), file=sys.stderr)
            return EXIT_CONFIG
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (NumericalError, ConifoldLabError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - the exit code contract covers every failure
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
