"""Command-line front end.

    mapbound curves       --delta 1 --snr-db 0:16:0.25
    mapbound simulate     --delta 1 --snr-db 8,12 --n 16 --trials 2000 --seed 1 --detectors map,mf
    mapbound ao-sample    --delta 1 --sigma2 0.1 --n 4000 --trials 10 --seed 1 --alphas 0.2,0.6
    mapbound verify-props --check all

Exit codes: 0 ok, 1 a requested check failed, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

from . import bounds, gordon, mc_sim, props
from .errors import NumericalError, ParameterError
from .model import ModelParams
from .output import atomic_write, read_config, render_csv, render_json

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("curves", "simulate", "ao-sample", "verify-props")
RANDOMIZED = ("simulate", "ao-sample")


class UsageError(Exception):
    pass


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (stop included when on the grid) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} is not start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise UsageError(f"grid {text!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r} as a number list") from exc


@dataclass(frozen=True)
class RunConfig:
    command: str
    delta: float | None = None
    snr_db_grid: tuple[float, ...] = ()
    sigma2_grid: tuple[float, ...] = ()
    n: int | None = None
    trials: int | None = None
    seed: int | None = None
    output_path: str | None = None
    format: str = "csv"
    detectors: tuple[str, ...] = ("map", "bro", "mf")
    checks: tuple[str, ...] = ("all",)
    alphas: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if self.command == "verify-props":
            return
        if self.delta is None or not self.delta > 0:
            raise UsageError("--delta must be given and positive")
        if self.snr_db_grid and self.sigma2_grid:
            raise UsageError("give either --snr-db or --sigma2, not both")
        if not (self.snr_db_grid or self.sigma2_grid):
            raise UsageError("one of --snr-db or --sigma2 is required")
        if any(not s > 0 for s in self.sigma2_grid):
            raise UsageError("--sigma2 values must be positive")
        if self.command in RANDOMIZED:
            for name in ("n", "trials", "seed"):
                if getattr(self, name) is None:
                    raise UsageError(f"--{name} is required for {self.command}")
            if self.n < 1 or self.trials < 1:
                raise UsageError("--n and --trials must be at least 1")
        bad = [d for d in self.detectors if d not in {m.value for m in mc_sim.Detector}]
        if bad:
            raise UsageError(f"unknown detector(s) {bad}; choose from map,bro,mf")

    def params_grid(self) -> list[tuple[float, ModelParams]]:
        """(snr_db, params) pairs in grid order."""
        if self.snr_db_grid:
            return [(s, ModelParams.from_snr_db(self.delta, s)) for s in self.snr_db_grid]
        return [(-10.0 * math.log10(s), ModelParams(self.delta, s)) for s in self.sigma2_grid]


DEFAULTS = {"delta": None, "snr_db": None, "sigma2": None, "n": None, "trials": None, "seed": None,
            "detectors": "map,bro,mf", "alphas": "0.2,0.4,0.6,0.8", "check": "all", "out": None,
            "format": "csv", "workers": 1}


def build_parser() -> argparse.ArgumentParser:
    # flags default to SUPPRESS so that only explicitly given ones override the config file
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--delta", type=float)
    grid = common.add_mutually_exclusive_group()
    grid.add_argument("--snr-db", dest="snr_db", help="start:stop:step or comma list, in dB")
    grid.add_argument("--sigma2", help="noise variance, single value or comma list")
    common.add_argument("--n", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--detectors", help="comma list from map,bro,mf (default all)")
    common.add_argument("--alphas", help="comma list or start:stop:step (default 0.2,0.4,0.6,0.8)")
    common.add_argument("--check", help="check name, comma list, or all (default)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="default csv")
    common.add_argument("--workers", type=int, help="thread pool size (default 1)")

    parser = argparse.ArgumentParser(prog="mapbound", description="BER bounds and simulation for MAP detection.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("curves", parents=[common], help="analytic BER table: mfb, replica, theta0, regime")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo BER of MAP / BRO / MF-genie")
    sub.add_parser("ao-sample", parents=[common], help="per-trial auxiliary objective against ell")
    sub.add_parser("verify-props", parents=[common], help="run named property checks")
    return parser


def parse_args(argv: list[str]) -> argparse.Namespace:
    """Defaults, then the config file, then explicit flags."""
    given = vars(build_parser().parse_args(argv))
    merged = dict(DEFAULTS)
    if "config" in given:
        try:
            values = read_config(given["config"])
        except (OSError, ValueError) as exc:
            raise UsageError(f"config: {exc}") from exc
        unknown = set(values) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"config: unknown key(s) {sorted(unknown)}")
        merged.update(values)
    if "snr_db" in given or "sigma2" in given:
        merged["snr_db"] = merged["sigma2"] = None
    merged.update(given)
    return argparse.Namespace(**merged)


def _int(v, name):
    if v is None:
        return None
    try:
        return int(v)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{name} must be an integer, got {v!r}") from exc


def _float(v, name):
    if v is None:
        return None
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{name} must be a number, got {v!r}") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        delta=_float(args.delta, "delta"),
        snr_db_grid=parse_grid(str(args.snr_db)) if args.snr_db is not None else (),
        sigma2_grid=parse_grid(str(args.sigma2)) if args.sigma2 is not None else (),
        n=_int(args.n, "n"),
        trials=_int(args.trials, "trials"),
        seed=_int(args.seed, "seed"),
        output_path=args.out,
        format=str(args.format),
        detectors=tuple(d.strip() for d in str(args.detectors).split(",") if d.strip()),
        checks=tuple(c.strip() for c in str(args.check).split(",") if c.strip()),
        alphas=parse_grid(str(args.alphas)),
        workers=_int(args.workers, "workers"),
    )


# -- commands ----------------------------------------------------------------------

def _emit(cfg: RunConfig, header, rows, **meta) -> None:
    text = (render_csv(header, rows) if cfg.format == "csv"
            else render_json(cfg.command, header, rows, **meta))
    if cfg.output_path:
        atomic_write(cfg.output_path, text)
    else:
        sys.stdout.write(text)


def cmd_curves(cfg: RunConfig) -> int:
    header = ("snr_db", "mfb", "replica", "theta0", "regime")
    grid = [s for s, _ in cfg.params_grid()]
    rows = bounds.ber_curves(cfg.delta, grid, workers=cfg.workers)
    for r in rows:
        if r.error:
            print(f"warning: snr_db={r.snr_db:g}: {r.error}", file=sys.stderr)
    _emit(cfg, header, [(r.snr_db, r.mfb, r.replica, r.theta0, r.regime) for r in rows], delta=cfg.delta)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    header = ("snr_db", "detector", "n", "trials", "ber_hat", "ci_lo", "ci_hi", "bit_errors", "bits_total",
              "stderr")
    grid = cfg.params_grid()
    # the genie's draws do not depend on sigma, so all noise levels share them
    mf = (dict(zip([s for s, _ in grid], mc_sim.mf_genie_sweep([p for _, p in grid], cfg.n, cfg.trials, cfg.seed)))
          if "mf" in cfg.detectors else {})
    rows = []
    for snr_db, p in grid:
        for det in cfg.detectors:
            r = (mf[snr_db] if det == "mf"
                 else mc_sim.monte_carlo_ber(det, p, cfg.n, cfg.trials, cfg.seed, workers=cfg.workers))
            rows.append((snr_db, det, r.n, r.trials, r.ber_hat, r.ci95[0], r.ci95[1], r.bit_errors,
                         r.bits_total, r.stderr))
    _emit(cfg, header, rows, delta=cfg.delta, seed=cfg.seed)
    return EXIT_OK


def cmd_ao_sample(cfg: RunConfig) -> int:
    pts = cfg.params_grid()
    if len(pts) != 1:
        raise UsageError("ao-sample takes a single --snr-db or --sigma2 value")
    _, p = pts[0]
    rows = gordon.ao_trial_rows(p, cfg.n, cfg.alphas, cfg.trials, cfg.seed)
    _emit(cfg, ("trial", "alpha", "ao_value", "ell_value"), rows, delta=cfg.delta, sigma2=p.sigma2,
          n=cfg.n, seed=cfg.seed)
    return EXIT_OK


def cmd_verify_props(cfg: RunConfig) -> int:
    try:
        results = props.run_checks(list(cfg.checks))
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    for r in results:
        print(r.line())
    if cfg.output_path:
        rows = [(r.name, r.measured, r.threshold, "PASS" if r.passed else "FAIL") for r in results]
        text = (render_csv(("check", "measured", "threshold", "status"), rows) if cfg.format == "csv"
                else render_json(cfg.command, ("check", "measured", "threshold", "status"), rows))
        atomic_write(cfg.output_path, text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


DISPATCH = {"curves": cmd_curves, "simulate": cmd_simulate, "ao-sample": cmd_ao_sample,
            "verify-props": cmd_verify_props}


def run(cfg: RunConfig) -> int:
    return DISPATCH[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return run(config_from_args(args))
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except (UsageError, ParameterError) as exc:
        print(f"mapbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"mapbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"mapbound: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
