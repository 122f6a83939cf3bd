"""Command-line entry point: ``driftfilter <experiment> --config file.json``.

Exit codes: 0 on success, 2 on configuration errors, 3 when every replicate
of a run failed numerically.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .config import ExperimentConfig, REPLICATES, default_config, load_config
from .diagnostics import MAX_WEIGHT_EDGES, RMS_EDGES, histogram
from .errors import ConfigError
from .output import (
    ALPHA_COLUMNS,
    CYCLES_COLUMNS,
    FAILURE_COLUMNS,
    HIST_COLUMNS,
    LINEAR_COLUMNS,
    SNYDER_COLUMNS,
    SUMMARY_COLUMNS,
    emit_csv,
    histogram_rows,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

COMMANDS = {
    "snyder": "snyder",
    "linear": "linear",
    "lorenz63": "lorenz63",
    "line-search": "line_search",
}


def _alpha_text(cfg):
    if isinstance(cfg.alpha, dict):
        return ";".join(f"{n}:{a!r}" for n, a in sorted(cfg.alpha.items()))
    return repr(cfg.alpha)


def run_metadata(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "alpha": _alpha_text(cfg),
        "n_replicates": cfg.n_replicates,
        "n_particles": ";".join(str(n) for n in cfg.n_particles),
        "resampler": cfg.resampler,
        "tau_divisor": "N_e-1",
        "kernel_backend": ex.backend(),
        "rng": "philox4x64(seed,stream_id)+numpy_ziggurat_normals",
    }


def write_snyder(cfg, out):
    res = ex.run_snyder(cfg)
    meta = run_metadata(cfg) | {"n_x": ";".join(map(str, cfg.snyder.n_x))}
    hist_rows, summary_rows = [], []
    for n_x in cfg.snyder.n_x:
        for label in cfg.filters:
            hist_rows.extend(histogram_rows(f"{label}[nx={n_x}]", res.histograms[(label, n_x)]))
            mw = res.max_weights[(label, n_x)]
            summary_rows.append((label, n_x, float(mw.mean()),
                                 res.frac_above(label, n_x, 0.9), mw.size))
    emit_csv(out / "hist_max_weight.csv", HIST_COLUMNS, hist_rows, meta)
    emit_csv(out / "snyder_summary.csv", SNYDER_COLUMNS, summary_rows, meta)
    for row in summary_rows:
        print(f"{row[0]:>13} n_x={row[1]:<4} mean max w={row[2]:.4f}  P(max w > 0.9)={row[3]:.3f}")
    return EXIT_OK


def write_linear(cfg, out):
    rows = ex.run_linear(cfg)
    meta = run_metadata(cfg) | {
        "likelihood_var": cfg.linear.likelihood_var,
        "sigma_obs": cfg.linear.sigma_obs,
    }
    emit_csv(out / "linear_series.csv", LINEAR_COLUMNS,
             [(r.filter, r.step, r.time, r.truth, r.posterior_mean, r.posterior_var)
              for r in rows], meta)
    for r in rows:
        if r.step == cfg.linear.n_steps:
            print(f"{r.filter:>13} t={r.time:g} truth={r.truth:.4f} "
                  f"mean={r.posterior_mean:.4f} var={r.posterior_var:.3g}")
    return EXIT_OK


def write_lorenz(cfg, out):
    res = ex.run_lorenz_cycling(cfg)
    meta = run_metadata(cfg) | {
        "spin_up_cycles": cfg.spin_up_cycles,
        "n_cycles": cfg.n_cycles,
        "obs_every": cfg.obs_every,
        "rms_estimate": "pf=weighted_mean_before_resampling;enkf=analysis_mean",
        "avg_rms": "mean_of_cycle_rms_after_spin_up",
        "tau_n_eff": "mean_over_all_cycles_per_replicate",
    }
    for n in cfg.n_particles:
        for label in cfg.filters:
            meta[f"failures[{label},{n}]"] = len(
                [r for r in res.failures if r.filter == label and r.n_particles == n])

    cycles, hist, rms_hist, summary = [], [], [], []
    multi = len(cfg.n_particles) > 1
    for n in cfg.n_particles:
        for label in cfg.filters:
            tag = f"{label}[ne={n}]" if multi else label
            runs = res.select(label, n, ok_only=False)
            for run in runs:
                cycles.extend((run.replicate, tag, r.cycle_index, r.max_weight, r.tau,
                               r.n_eff, r.analysis_rms) for r in run.records)
            good = [run for run in runs if run.ok]
            maxw = [r.max_weight for run in good for r in run.records]
            hist.extend(histogram_rows(tag, histogram(maxw, MAX_WEIGHT_EDGES)))
            avg = res.per_replicate(label, n, "avg_rms")
            rms_hist.extend(histogram_rows(tag, histogram(avg, RMS_EDGES)))
            metrics = ("avg_rms",) if label == "enkf" else ("avg_rms", "tau", "n_eff")
            for metric in metrics:
                s = res.summary(label, n, metric)
                summary.append((label, n, metric, s.mean, s.median, s.std, s.n))
                print(f"{label:>13} N_e={n:<4} {metric:>8}: mean={s.mean:.4f} "
                      f"median={s.median:.4f} std={s.std:.4f} n={s.n}")
    failures = [(r.replicate, r.filter, r.n_particles, r.failed_cycle, r.failure)
                for r in res.failures]

    emit_csv(out / "cycles.csv", CYCLES_COLUMNS, cycles, meta)
    emit_csv(out / "summary.csv", SUMMARY_COLUMNS, summary, meta)
    emit_csv(out / "hist_max_weight.csv", HIST_COLUMNS, hist, meta)
    emit_csv(out / "hist_avg_rms.csv", HIST_COLUMNS, rms_hist, meta)
    emit_csv(out / "failures.csv", FAILURE_COLUMNS, failures, meta)
    if failures:
        print(f"{len(failures)} replicate run(s) failed; see failures.csv", file=sys.stderr)
    return EXIT_NUMERIC if res.all_failed() else EXIT_OK


def write_line_search(cfg, out):
    res = ex.line_search_alpha(cfg)
    meta = run_metadata(cfg) | {
        "spin_up_cycles": cfg.spin_up_cycles,
        "replicate_offset": ex.LINE_SEARCH_OFFSET,
        "best_alpha": res.best_alpha,
        "tie_break": "smallest_alpha",
    }
    for row in res.table:
        meta[f"failures[alpha={row.alpha!r}]"] = row.n_failed
    emit_csv(out / "alpha_search.csv", ALPHA_COLUMNS,
             [(r.alpha, r.mean_avg_rms, r.std_avg_rms, r.n_replicates) for r in res.table],
             meta)
    for r in res.table:
        print(f"alpha={r.alpha:<8g} mean avg RMS={r.mean_avg_rms:.4f} "
              f"std={r.std_avg_rms:.4f} n={r.n_replicates}")
    print(f"best alpha: {res.best_alpha:g}")
    return EXIT_NUMERIC if all(r.n_replicates == 0 for r in res.table) else EXIT_OK


RUNNERS = {
    "snyder": write_snyder,
    "linear": write_linear,
    "lorenz63": write_lorenz,
    "line_search": write_line_search,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftfilter",
        description="Seeded particle filter / EnKF twin experiments with CSV output.")
    parser.add_argument("experiment", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="JSON config document")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--out-dir", type=Path)
    parser.add_argument("--full-scale", action="store_true",
                        help="use the full replicate counts instead of the desk-scale defaults")
    parser.add_argument("--threads", type=int, help="worker threads for replicates")
    return parser


def resolve_config(args) -> ExperimentConfig:
    experiment = COMMANDS[args.experiment]
    if args.config is not None:
        cfg = load_config(args.config, experiment)
    else:
        cfg = default_config(experiment)
    changes = {}
    if args.full_scale:
        changes["full_scale"] = True
        changes["n_replicates"] = REPLICATES[experiment][1]
    if args.replicates is not None:
        changes["n_replicates"] = args.replicates
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out_dir is not None:
        changes["output_dir"] = str(args.out_dir)
    if args.threads is not None:
        changes["threads"] = args.threads
    return cfg.replace(**changes) if changes else cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    return RUNNERS[cfg.experiment](cfg, out)


if __name__ == "__main__":
    sys.exit(main())
