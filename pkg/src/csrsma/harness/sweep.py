"""Ergodic sweeps over SNR and channel realizations."""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..alphabet import modes_for_complexity
from ..channel import (
    CovarianceVariant,
    OneRingParams,
    derive_seed,
    one_ring_covariance,
    sample_channels,
)
from ..optimize import Objective, allocate_common_mmf, optimize, select_mode
from ..rates import SchemeKind, min_rate, scheme_roles, stream_rates, sum_rate
from .config import SDMA, ExperimentConfig, dump_config

__all__ = ["SweepRow", "SCHEMA_ROWS", "SCHEMA_SUMMARY", "run_sweep", "run_point", "summarize",
           "write_rows_csv", "write_summary_csv", "rows_to_csv", "read_rows_csv"]

SCHEMA_ROWS = "csrsma.rows/1"
SCHEMA_SUMMARY = "csrsma.summary/1"

_ROW_COLUMNS = ("snr_db", "realization", "scheme", "mode", "objective_bits", "user_rates_bits",
                "common_rate_bits", "private_rate_bits", "approx_objective_bits", "converged",
                "seed", "status", "mode_objectives_bits")


@dataclass(frozen=True)
class SweepRow:
    """Result of one scheme at one (SNR, realization) point.

    ``objective_bits`` is the final objective under the configured GMI
    method; ``approx_objective_bits`` the optimizer's closed-form value.
    ``mode_objectives`` lists ``(mode name, closed-form objective)`` for
    every mode that was optimized. ``wall_time_ms`` is not written to the
    rows file so that reruns are byte-identical.
    """

    scheme: str
    mode_name: str
    snr_db: float
    realization_index: int
    objective_bits: float
    per_user_rates: tuple
    common_rate_carried: float
    private_rate: float
    approx_objective_bits: float
    mode_objectives: tuple
    converged: bool
    seed: int
    status: str = "ok"
    wall_time_ms: float = 0.0

    @property
    def total_rate(self) -> float:
        return float(sum(self.per_user_rates))

    def sort_key(self):
        return (self.snr_db, self.realization_index, self.scheme, self.mode_name)


def _factors(cfg: ExperimentConfig):
    # every user sees the same mean angle and spread
    params = OneRingParams(cfg.n_t, cfg.theta, cfg.delta_spread, cfg.quadrature_points)
    factor = one_ring_covariance(params, CovarianceVariant.parse(cfg.covariance_variant))
    return [factor] * cfg.K


def _final_rates(sr, scheme, objective):
    """Objective, per-user rates and common share for fixed stream rates."""
    K = sr.n_users
    I_p = sr.private(scheme)
    if objective is Objective.SR:
        obj = sum_rate(scheme, sr)
        c = np.full(K, 1.0 / K)
        if scheme is SchemeKind.CS:
            c = np.zeros(K)
            c[int(np.argmax(sr.I_c))] = 1.0
    else:
        I_cp = sr.I_c if scheme is SchemeKind.CS else np.full(K, sr.I_c.min())
        c, _ = allocate_common_mmf(I_cp, I_p)
        obj = min_rate(scheme, sr, c)
    common = c * (sr.I_c if scheme is SchemeKind.CS else sr.I_c.min())
    return float(obj), tuple(float(v) for v in common + I_p), float(common.sum()), float(I_p.sum())


def run_point(cfg: ExperimentConfig, snr_index: int, realization: int, factors=None) -> list:
    """All schemes at one (SNR, realization) point."""
    factors = _factors(cfg) if factors is None else factors
    snr_db = float(cfg.snr_db_grid[snr_index])
    H = sample_channels(factors, cfg.master_seed, realization)
    P_T = 10.0 ** (snr_db / 10.0) * cfg.sigma2
    objective = Objective.parse(cfg.objective)
    init_seed = derive_seed(cfg.master_seed, realization, snr_index, 1)
    mc_seed = derive_seed(cfg.master_seed, realization, snr_index, 2)
    modes = modes_for_complexity(cfg.delta_complexity)
    sdma_mode = next(m for m in modes if m.is_sdma)

    optimized, finals = {}, {}

    def key(mode, scheme):
        # without a common stream every scheme reduces to the same problem
        return mode.name, (SchemeKind.CONV_NONSIC if mode.common.is_null else scheme)

    def run(mode, scheme):
        k = key(mode, scheme)
        if k not in optimized:
            optimized[k] = optimize(H, mode, k[1], objective, cfg.barrier, P_T, cfg.sigma2,
                                    cfg.restarts, init_seed, cfg.init_strategy)
        return optimized[k]

    def final(mode, scheme, result):
        k = key(mode, scheme)
        if k not in finals:
            sr = stream_rates(result.P_star.P, H, mode, cfg.gmi_method, cfg.sigma2, cfg.mc_samples,
                              mc_seed, roles=scheme_roles(k[1]), second_term=cfg.second_term)
            finals[k] = _final_rates(sr, k[1], objective)
        return finals[k]

    rows = []
    for label in sorted(cfg.schemes):
        t0 = time.perf_counter()
        scheme = SchemeKind.CONV_NONSIC if label == SDMA else SchemeKind.parse(label)
        candidates = [sdma_mode] if label == SDMA else modes
        try:
            results = {m: run(m, scheme) for m in candidates}
            best = select_mode(results)
            obj, users, common, private = final(best, scheme, results[best])
            rows.append(SweepRow(
                label, best.name, snr_db, realization, max(obj, 0.0), users, common, private,
                results[best].objective_bits,
                tuple((m.name, results[m].objective_bits) for m in candidates),
                bool(results[best].converged), int(mc_seed), "ok",
                (time.perf_counter() - t0) * 1e3,
            ))
        except Exception as exc:  # recorded, the sweep goes on
            rows.append(SweepRow(label, "", snr_db, realization, 0.0, (), 0.0, 0.0, 0.0, (),
                                 False, int(mc_seed), f"error: {type(exc).__name__}: {exc}",
                                 (time.perf_counter() - t0) * 1e3))
    return rows


def _point_task(args):
    return run_point(*args)


def run_sweep(cfg: ExperimentConfig, out_dir=None, threads: int = 1, progress=None) -> list:
    """Run every (SNR, realization) point and return rows in canonical order.

    With ``out_dir`` the rows, the ergodic summary, the wall times and the
    resolved configuration are written there.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    factors = _factors(cfg)
    tasks = [(cfg, i, r, factors) for i in range(len(cfg.snr_db_grid)) for r in range(cfg.realizations)]
    rows = []
    if threads == 1:
        for n, t in enumerate(tasks):
            rows.extend(_point_task(t))
            if progress:
                progress(n + 1, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for n, part in enumerate(pool.map(_point_task, tasks)):
                rows.extend(part)
                if progress:
                    progress(n + 1, len(tasks))
    rows.sort(key=SweepRow.sort_key)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows_csv(rows, out / "rows.csv")
        write_summary_csv(rows, out / "summary.csv")
        (out / "config.ini").write_text(dump_config(cfg), encoding="utf-8")
        with open(out / "timings.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("snr_db", "realization", "scheme", "wall_time_ms"))
            for r in rows:
                w.writerow((repr(r.snr_db), r.realization_index, r.scheme, f"{r.wall_time_ms:.3f}"))
    return rows


def _f(x: float) -> str:
    return repr(float(x))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA_ROWS}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_ROW_COLUMNS)
    for r in sorted(rows, key=SweepRow.sort_key):
        w.writerow((
            _f(r.snr_db), r.realization_index, r.scheme, r.mode_name, _f(r.objective_bits),
            ";".join(_f(v) for v in r.per_user_rates), _f(r.common_rate_carried), _f(r.private_rate),
            _f(r.approx_objective_bits), int(r.converged), r.seed, r.status,
            ";".join(f"{m}={_f(v)}" for m, v in r.mode_objectives),
        ))
    return buf.getvalue()


def write_rows_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))


def read_rows_csv(path) -> list:
    """Inverse of :func:`write_rows_csv` (wall times are not stored)."""
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# schema={SCHEMA_ROWS}":
            raise ValueError(f"{path}: expected schema {SCHEMA_ROWS}, found {first!r}")
        out = []
        for rec in csv.DictReader(fh):
            mo = tuple((m, float(v)) for m, _, v in
                       (item.partition("=") for item in rec["mode_objectives_bits"].split(";") if item))
            out.append(SweepRow(
                scheme=rec["scheme"], mode_name=rec["mode"], snr_db=float(rec["snr_db"]),
                realization_index=int(rec["realization"]), objective_bits=float(rec["objective_bits"]),
                per_user_rates=tuple(float(v) for v in rec["user_rates_bits"].split(";") if v),
                common_rate_carried=float(rec["common_rate_bits"]),
                private_rate=float(rec["private_rate_bits"]),
                approx_objective_bits=float(rec["approx_objective_bits"]), mode_objectives=mo,
                converged=bool(int(rec["converged"])), seed=int(rec["seed"]), status=rec["status"],
            ))
    return out


def summarize(rows) -> list:
    """Ergodic mean and standard error per (SNR, scheme), canonical order.

    Returns dicts with keys ``snr_db, scheme, mean_bits, stderr_bits, n,
    common_bits, private_bits``.
    """
    if not rows:
        raise ValueError("no rows to summarize")
    groups = {}
    for r in rows:
        groups.setdefault((r.snr_db, r.scheme), []).append(r)
    out = []
    for (snr, scheme), rs in sorted(groups.items()):
        obj = np.array([r.objective_bits for r in rs])
        out.append({
            "snr_db": snr,
            "scheme": scheme,
            "mean_bits": float(obj.mean()),
            "stderr_bits": float(obj.std(ddof=1) / np.sqrt(len(obj))) if len(obj) > 1 else 0.0,
            "n": len(obj),
            "common_bits": float(np.mean([r.common_rate_carried for r in rs])),
            "private_bits": float(np.mean([r.private_rate for r in rs])),
        })
    return out


def write_summary_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema={SCHEMA_SUMMARY}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("snr_db", "scheme", "mean_bits", "stderr_bits", "n", "common_bits", "private_bits"))
        for s in summarize(rows):
            w.writerow((_f(s["snr_db"]), s["scheme"], _f(s["mean_bits"]), _f(s["stderr_bits"]), s["n"],
                        _f(s["common_bits"]), _f(s["private_bits"])))
