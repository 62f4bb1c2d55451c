"""Command line: ``csrsma {gmi,optimize,sweep,modes}``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ..alphabet import make_constellation, mode_from_name, modes_for_complexity, product_alphabet
from ..channel import load_channels_csv, sample_channels, save_channels_csv
from ..gmi import EffectiveChannel, gmi_approx, gmi_exact
from ..optimize import Objective, adaptive_mode_search, optimize
from ..rates import SchemeKind
from .config import ConfigError, ExperimentConfig, load_config
from .report import ReportKind, report
from .sweep import _factors, run_sweep

__all__ = ["main", "build_parser"]


def _complex_list(text):
    return [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, metavar="N", help="master seed (overrides the config)")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker processes")
    common.add_argument("--variant", choices=("printed", "standard"),
                        help="covariance integrand (overrides the config)")

    p = argparse.ArgumentParser(prog="csrsma", description="Finite-alphabet RSMA precoding tools.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gmi", parents=[common], help="GMI of one stream for given effective gains")
    g.add_argument("--x", required=True, help="desired constellation")
    g.add_argument("--i", default="", help="comma-separated enumerated interferer constellations")
    g.add_argument("--j", default="", help="comma-separated Gaussian-treated interferer constellations")
    g.add_argument("--a", type=complex, required=True, help="desired gain, e.g. 1+0.5j")
    g.add_argument("--b", type=_complex_list, default=[], help="gains of the --i interferers")
    g.add_argument("--c", type=_complex_list, default=[], help="gains of the --j interferers")
    g.add_argument("--sigma2", type=float, default=1.0)
    g.add_argument("--method", choices=("exact", "approx"), default="exact")
    g.add_argument("--mc-samples", type=int, default=2000)

    o = sub.add_parser("optimize", parents=[common], help="optimize precoders for one channel")
    o.add_argument("--channels", metavar="FILE", help="channel CSV (default: sample from the config)")
    o.add_argument("--snr-db", type=float, required=True)
    o.add_argument("--scheme", default="cs", help="conv_sic, conv_nonsic or cs")
    o.add_argument("--objective", choices=("sr", "mmf"), default=None)
    mode = o.add_mutually_exclusive_group()
    mode.add_argument("--mode", help="fixed mode, e.g. qpsk/qpsk (private/common)")
    mode.add_argument("--delta", type=int, help="complexity budget for adaptive mode selection")

    s = sub.add_parser("sweep", parents=[common], help="ergodic sweep from a configuration")

    m = sub.add_parser("modes", parents=[common], help="list the modes allowed by a complexity budget")
    m.add_argument("--delta", type=int, required=True)
    return p


def _config(args, required=False) -> ExperimentConfig | None:
    if not args.config:
        if required:
            raise ConfigError("--config is required")
        return None
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.variant is not None:
        overrides["covariance_variant"] = args.variant
    return cfg.with_overrides(**overrides) if overrides else cfg


def _cmd_modes(args, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("mode", "name", "private", "common", "complexity", "rate_cap_bits_per_user"))
    for n, m in enumerate(modes_for_complexity(args.delta), start=1):
        w.writerow((n, m.name, m.private.name, m.common.name, m.complexity, f"{m.rate_cap_bits:g}"))
    return 0


def _cmd_gmi(args, out):
    X = make_constellation(args.x)
    I = product_alphabet([make_constellation(n) for n in _names(args.i)])
    J = product_alphabet([make_constellation(n) for n in _names(args.j)])
    eff = EffectiveChannel(args.a, args.b, args.c, args.sigma2)
    if args.method == "approx":
        res = {"method": "approx", "gmi_bits": gmi_approx(eff, X, I, J)}
    else:
        est = gmi_exact(eff, X, I, J, mc_samples=args.mc_samples, rng_seed=args.seed or 0)
        res = {"method": "exact", "gmi_bits": est.value_bits, "s_opt": est.s_opt,
               "std_error_bits": est.mc_std_error_bits, "samples": est.samples}
    out.write(json.dumps(res) + "\n")
    return 0


def _cmd_optimize(args, out):
    cfg = _config(args)
    seed = args.seed if args.seed is not None else (cfg.master_seed if cfg else 0)
    if args.channels:
        H = load_channels_csv(args.channels)
    elif cfg is not None:
        H = sample_channels(_factors(cfg), seed, 0)
    else:
        raise ConfigError("optimize needs --channels FILE or --config PATH")
    barrier = cfg.barrier if cfg else None
    sigma2 = cfg.sigma2 if cfg else 1.0
    restarts = cfg.restarts if cfg else 3
    objective = Objective.parse(args.objective or (cfg.objective if cfg else "sr"))
    scheme = SchemeKind.parse(args.scheme)
    P_T = 10.0 ** (args.snr_db / 10.0) * sigma2
    kw = {} if barrier is None else {"cfg": barrier}
    if args.mode:
        mode = mode_from_name(args.mode)
        result = optimize(H, mode, scheme, objective, P_T=P_T, sigma2=sigma2, restarts=restarts,
                          rng_seed=seed, **kw)
    else:
        delta = args.delta or (cfg.delta_complexity if cfg else 16)
        mode, result = adaptive_mode_search(H, delta, scheme, objective, P_T=P_T, sigma2=sigma2,
                                            restarts=restarts, rng_seed=seed, **kw)
    summary = {
        "mode": mode.name, "scheme": scheme.value, "objective": objective.value,
        "snr_db": args.snr_db, "objective_bits": result.objective_bits,
        "common_allocation": [float(c) for c in result.c_star], "converged": result.converged,
        "power": result.P_star.power, "power_budget": P_T,
    }
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        save_channels_csv(d / "channels.csv", H)
        (d / "result.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        with open(d / "precoder.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in result.P_star.P:
                w.writerow([repr(float(v)) for v in np.column_stack([row.real, row.imag]).ravel()])
        with open(d / "trace.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("outer", "inner", "objective_bits", "barrier_nats"))
            for t in result.trace:
                w.writerow((t.outer_iter, t.inner_iter, repr(t.rate_bits), repr(t.objective)))
    out.write(json.dumps(summary) + "\n")
    return 0


def _cmd_sweep(args, out):
    cfg = _config(args, required=True)
    if not args.out:
        raise ConfigError("sweep needs --out DIR")

    def progress(done, total):
        print(f"\r{done}/{total} points", end="", file=sys.stderr, flush=True)

    rows = run_sweep(cfg, args.out, threads=args.threads, progress=progress)
    print(file=sys.stderr)
    for kind in ReportKind:
        (Path(args.out) / f"report_{kind.value}.csv").write_text(report(rows, kind), encoding="utf-8")
    failed = sum(r.status != "ok" for r in rows)
    out.write(f"{len(rows)} rows written to {args.out} ({failed} failed)\n")
    return 0


_COMMANDS = {"modes": _cmd_modes, "gmi": _cmd_gmi, "optimize": _cmd_optimize, "sweep": _cmd_sweep}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args, out)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
