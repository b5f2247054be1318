"""
Command-line entry point.

    minar <command> [--config FILE] [--seed N] [--threads N] [--out PATH] [overrides]

Commands: simulate, fit, ladder, granger, forecast, risk, study, ingest.
Settings come from a JSON config file; flags override config keys. Exit
codes: 0 ok, 1 usage or input error, 2 flagged numerical condition
(non-convergence), 64 unknown command.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from minar import catalog, experiments, forecast as fc, inference
from minar.errors import EstimationError, MinarError
from minar.innovations import BivPoissonParams
from minar.process import CountSeries, ThinningMatrix, spectral_radius, simulate_minar

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_UNKNOWN = 64

COMMANDS = ("simulate", "fit", "ladder", "granger", "forecast", "risk", "study", "ingest")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--threads", type=int, help="worker cap for parallel stages")
    common.add_argument("--out", help="output path (stdout if omitted)")

    p = _Parser(prog="minar", description="Bivariate INAR(1) count-process toolkit.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate a series")
    s.add_argument("--preset", help=f"named parameter set ({', '.join(experiments.PRESETS)})")
    s.add_argument("--steps", type=int)
    s.add_argument("--n0", help="initial counts, comma separated")

    for name, desc in (("fit", "conditional ML fit"), ("ladder", "five-model ladder with LRTs"),
                       ("granger", "causality tests")):
        f = sub.add_parser(name, parents=[common], help=desc)
        f.add_argument("--input", help="count series CSV")
        f.add_argument("--method", choices=["nelder-mead", "bfgs"])
        if name == "fit":
            f.add_argument("--model", help="model name (default full-binar)")
        if name == "granger":
            f.add_argument("--alpha", type=float)

    for name, desc in (("forecast", "analytic h-step mean and covariance"),
                       ("risk", "Monte Carlo exceedance table")):
        f = sub.add_parser(name, parents=[common], help=desc)
        f.add_argument("--preset")
        f.add_argument("--fit", help="take parameters from a fit JSON report")
        f.add_argument("--n0", help="current counts, comma separated")
        f.add_argument("--horizons", help="comma separated")
        if name == "risk":
            f.add_argument("--thresholds", help="comma separated")
            f.add_argument("--paths", type=int)

    st = sub.add_parser("study", parents=[common], help="estimator convergence study")
    st.add_argument("--preset", help="set1 or set2")
    st.add_argument("--sizes", help="comma separated")
    st.add_argument("--replications", type=int)

    ig = sub.add_parser("ingest", parents=[common], help="catalog to count series")
    ig.add_argument("--catalog")
    ig.add_argument("--regions")
    ig.add_argument("--window", type=float, help="window width in hours")
    ig.add_argument("--start")
    ig.add_argument("--end")
    ig.add_argument("--plates", help="two plate names, comma separated")
    return p


# --------------------------------------------------------------------------
# config helpers

def _ints(text) -> list:
    if isinstance(text, str):
        return [int(v) for v in text.split(",") if v.strip()]
    return [int(v) for v in text]


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        base = os.path.dirname(os.path.abspath(args.config))
        for key in ("input", "catalog", "regions", "fit"):
            if isinstance(cfg.get(key), str) and not os.path.isabs(cfg[key]):
                cfg[key] = os.path.join(base, cfg[key])
    for key, val in vars(args).items():
        if key in ("config", "command") or val is None:
            continue
        cfg[{"n0": "N0", "window": "window_hours"}.get(key, key)] = val
    return cfg


def _params(cfg: dict):
    """(P, innov) from a fit report, a preset name, or inline keys."""
    if cfg.get("fit"):
        with open(cfg["fit"]) as fh:
            rep = json.load(fh)
        src = rep.get("params", rep)
    elif cfg.get("preset"):
        try:
            pre = experiments.PRESETS[cfg["preset"]]
        except KeyError:
            raise UsageError(f"unknown preset {cfg['preset']!r}; known: {', '.join(experiments.PRESETS)}") from None
        return pre["P"], pre["innov"]
    else:
        src = cfg
    try:
        if "P" in src:
            P = ThinningMatrix(np.asarray(src["P"], dtype=float))
        else:
            P = ThinningMatrix.bivariate(src["p11"], src["p12"], src["p21"], src["p22"])
        innov = BivPoissonParams(src["lambda1"], src["lambda2"], src.get("phi", 0.0))
    except KeyError as exc:
        raise UsageError(f"missing model parameter {exc.args[0]!r}") from None
    return P, innov


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _companion(path: str, suffix: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}{suffix}{ext or '.csv'}"


def _read_series(cfg: dict) -> CountSeries:
    if not cfg.get("input"):
        raise UsageError("an input series CSV is required (--input or config 'input')")
    return CountSeries.from_csv(cfg["input"])


def _fit_options(cfg: dict) -> inference.FitOptions:
    keys = {"method", "max_evals", "rtol", "max_restarts", "fd_step"}
    return inference.FitOptions(**{k: cfg[k] for k in keys if k in cfg})


def _check_length(series: CountSeries) -> None:
    if series.n_steps < inference.MIN_LENGTH:
        raise UsageError(f"series has {series.n_steps} rows; fitting needs at least {inference.MIN_LENGTH}")


# --------------------------------------------------------------------------
# commands

def cmd_simulate(cfg: dict) -> int:
    P, innov = _params(cfg)
    steps = int(cfg.get("steps", 100))
    if steps < 0:
        raise UsageError("steps must be >= 0")
    seed = int(cfg.get("seed", 0))
    if "N0" in cfg:
        n0 = _ints(cfg["N0"])
    else:
        n0 = [0] * P.d
    rho = spectral_radius(P)
    if not rho < 1.0:
        print(f"warning: spectral radius {rho:.6g} >= 1; the process is not stationary", file=sys.stderr)
    series = simulate_minar(P, innov, n0, steps, seed)
    effective = {"command": "simulate", "P": P.entries.tolist(), "lambda1": innov.lambda1,
                 "lambda2": innov.lambda2, "phi": innov.phi, "N0": list(n0), "steps": steps, "seed": seed}
    _emit(series.to_csv(), cfg.get("out"))
    print(json.dumps(effective), file=sys.stdout if cfg.get("out") else sys.stderr)
    return EXIT_OK


def cmd_fit(cfg: dict) -> int:
    series = _read_series(cfg)
    _check_length(series)
    res = inference.fit_cmle(series, cfg.get("model", "full-binar"), _fit_options(cfg))
    _emit(res.to_json() + "\n", cfg.get("out"))
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_ladder(cfg: dict) -> int:
    series = _read_series(cfg)
    _check_length(series)
    rep = experiments.run_model_ladder(series, _fit_options(cfg))
    _emit(rep.to_json() + "\n", cfg.get("out"))
    return EXIT_OK if rep.converged else EXIT_NUMERIC


def cmd_granger(cfg: dict) -> int:
    series = _read_series(cfg)
    _check_length(series)
    rep = inference.granger_tests(series, _fit_options(cfg), float(cfg.get("alpha", 0.05)))
    _emit(rep.to_json() + "\n", cfg.get("out"))
    return EXIT_OK if all(f.converged for f in rep.fits.values()) else EXIT_NUMERIC


def _require_n0(cfg: dict, d: int) -> list:
    if "N0" not in cfg:
        raise UsageError("initial counts are required (--n0 or config 'N0')")
    n0 = _ints(cfg["N0"])
    if len(n0) != d:
        raise UsageError(f"initial counts must have {d} entries")
    return n0


def cmd_forecast(cfg: dict) -> int:
    P, innov = _params(cfg)
    n0 = _require_n0(cfg, P.d)
    horizons = _ints(cfg.get("horizons", [1]))
    lines = ["horizon,mean_1,mean_2,var_1,cov_12,var_2"]
    for r in fc.forecast(P, innov, n0, horizons):
        vals = [*r.mean, r.cov[0, 0], r.cov[0, 1], r.cov[1, 1]]
        lines.append(",".join([str(r.horizon)] + [repr(float(v)) for v in vals]))
    _emit("\n".join(lines) + "\n", cfg.get("out"))
    return EXIT_OK


def cmd_risk(cfg: dict) -> int:
    P, innov = _params(cfg)
    n0 = _require_n0(cfg, P.d)
    horizons = _ints(cfg.get("horizons", [1, 2, 3, 4, 5, 6, 7, 15, 30]))
    thresholds = _ints(cfg.get("thresholds", [0, 1, 5, 10, 20, 30, 40, 50]))
    table = fc.mc_tail_table(P, innov, n0, horizons, thresholds,
                             paths=int(cfg.get("paths", fc.DEFAULT_PATHS)), rng=int(cfg.get("seed", 0)))
    out = cfg.get("out")
    if out:
        table.to_csv(out)
        table.to_csv(_companion(out, "_se"), std_errors=True)
    else:
        sys.stdout.write(table.to_csv() + "\n" + table.to_csv(std_errors=True))
    return EXIT_OK


def cmd_study(cfg: dict) -> int:
    pre = experiments.PRESETS.get(cfg.get("preset", "set1"))
    if pre is None:
        raise UsageError(f"unknown preset {cfg['preset']!r}")
    if "P" in cfg or "p11" in cfg:
        P, innov = _params(cfg)
        pre = dict(P=P, innov=innov)
    spec = experiments.StudySpec(
        sizes=tuple(_ints(cfg.get("sizes", [25, 50, 100, 250, 500, 1000, 5000, 10000]))),
        replications=int(cfg.get("replications", experiments.DEFAULT_REPLICATIONS)),
        seed=int(cfg.get("seed", 0)),
        **pre,
    )
    opts = _fit_options(cfg)
    opts = inference.FitOptions(**{**vars(opts), "std_errors": False})
    res = experiments.run_estimator_study(spec, opts, workers=int(cfg.get("threads", 1)))
    out = cfg.get("out")
    if out:
        os.makedirs(out, exist_ok=True)
        for name, text in (("means.csv", res.means_csv()), ("stdevs.csv", res.stdevs_csv()),
                           ("estimates.csv", res.estimates_csv())):
            with open(os.path.join(out, name), "w", newline="") as fh:
                fh.write(text)
        with open(os.path.join(out, "spec.json"), "w") as fh:
            json.dump(spec.to_dict(), fh, indent=2)
    else:
        sys.stdout.write(res.means_csv() + "\n" + res.stdevs_csv())
    print(res.format(), file=sys.stderr)
    return EXIT_OK


def cmd_ingest(cfg: dict) -> int:
    for key in ("catalog", "regions", "start", "end"):
        if not cfg.get(key):
            raise UsageError(f"ingest needs '{key}'")
    parsed = catalog.parse_catalog(cfg["catalog"], cfg.get("columns"), cfg.get("delimiter", ","))
    regions = catalog.load_regions(cfg["regions"])
    spec = catalog.BinningSpec(
        float(cfg.get("window_hours", 24)), cfg["start"], cfg["end"],
        float(cfg.get("mag_lo", -np.inf)), cfg.get("mag_hi"), bool(cfg.get("hi_inclusive", False)),
    )
    if cfg.get("bands"):
        b = cfg["bands"]
        series = catalog.bin_magnitude_bands(parsed.events, spec, b.get("lo", 5.0), b.get("mid", 6.0),
                                             b.get("plate"), regions)
    else:
        plates = cfg.get("plates")
        if isinstance(plates, str):
            plates = [v.strip() for v in plates.split(",")]
        if not plates or len(plates) != 2:
            raise UsageError("ingest needs exactly two plate names")
        series = catalog.bin_counts(parsed.events, regions, spec, plates)
    out = cfg.get("out")
    _emit(series.to_csv(), out)
    report = parsed.rejects_report()
    if out:
        with open(_companion(out, "_rejects"), "w", newline="") as fh:
            fh.write(report)
    if parsed.rejects:
        print(f"{len(parsed.rejects)} row(s) rejected", file=sys.stderr)
        if not out:
            sys.stderr.write(report)
    return EXIT_OK


HANDLERS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "ladder": cmd_ladder,
    "granger": cmd_granger,
    "forecast": cmd_forecast,
    "risk": cmd_risk,
    "study": cmd_study,
    "ingest": cmd_ingest,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or argv[0] in ("-h", "--help"):
        parser.print_help(sys.stdout if argv else sys.stderr)
        return EXIT_OK if argv else EXIT_INPUT
    if argv[0] not in COMMANDS:
        print(f"minar: unknown command {argv[0]!r}", file=sys.stderr)
        sys.stderr.write(parser.format_help())
        return EXIT_UNKNOWN
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args)
        return HANDLERS[args.command](cfg)
    except SystemExit as exc:  # --help inside a subcommand
        return int(exc.code or 0)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as exc:
        print(f"minar: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MinarError as exc:
        print(f"minar: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc, ArithmeticError) else EXIT_INPUT
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"minar: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
