"""CSV emission with a ``# key=value`` metadata header."""

from __future__ import annotations

import csv
import numbers
from pathlib import Path

CYCLES_COLUMNS = ("replicate", "filter", "cycle", "max_weight", "tau", "n_eff", "analysis_rms")
SUMMARY_COLUMNS = ("filter", "n_particles", "metric", "mean", "median", "std", "n")
HIST_COLUMNS = ("filter", "bin_left", "bin_right", "count")
LINEAR_COLUMNS = ("filter", "step", "time", "truth", "posterior_mean", "posterior_var")
ALPHA_COLUMNS = ("alpha", "mean_avg_rms", "std_avg_rms", "n_replicates")
FAILURE_COLUMNS = ("replicate", "filter", "n_particles", "cycle", "reason")
SNYDER_COLUMNS = ("filter", "n_x", "mean_max_weight", "frac_max_weight_gt_0.9", "n")


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        return format(float(v), ".9g")
    return str(v)


def emit_csv(path, columns, rows, metadata=None) -> Path:
    """Write ``rows`` under ``columns``, overwriting ``path``.

    Floats carry 9 significant digits. Metadata items become leading
    ``# key=value`` lines in insertion order.
    """
    path = Path(path)
    rows = list(rows)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row {row!r} does not match columns {columns}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            for k, v in (metadata or {}).items():
                fh.write(f"# {k}={format_value(v)}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows([format_value(v) for v in row] for row in rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def histogram_rows(label, hist):
    for k, count in enumerate(hist.counts):
        yield (label, hist.edges[k], hist.edges[k + 1], int(count))
