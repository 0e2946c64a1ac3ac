"""CSV / JSON emission of aggregated Monte Carlo records."""

from __future__ import annotations

import csv
import json
import math

from .montecarlo import MetricsRecord

CSV_COLUMNS = ("estimator", "pnr_db", "mse_theta_R", "mse_phi_T", "mse_irs", "mse_gamma",
               "nmse_H", "failure_rate", "trials", "failures")


def format_float(x):
    """17 significant digits: round-trips any double exactly."""
    if math.isnan(x):
        return "nan"
    return format(x, ".16e")


def _csv_row(rec):
    row = []
    for col in CSV_COLUMNS:
        v = getattr(rec, col)
        row.append(format_float(v) if isinstance(v, float) else str(v))
    return row


def write_csv(records, path):
    # runtime is left out so that identical seeds give identical bytes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(_csv_row(rec))


def _json_safe(d):
    # NaN is not valid JSON; missing metrics become null
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


def write_json(records, path):
    with open(path, "w") as fh:
        json.dump([_json_safe(rec.as_dict()) for rec in records], fh, indent=2,
                  allow_nan=False)
        fh.write("\n")


def emit_results(records, fmt, path):
    if fmt == "csv":
        write_csv(records, path)
    elif fmt == "json":
        write_json(records, path)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        kw = {k: (v if k == "estimator" else int(v) if k in ("trials", "failures") else float(v))
              for k, v in row.items()}
        out.append(MetricsRecord(**kw))
    return out


def read_json(path):
    with open(path) as fh:
        data = json.load(fh)
    return [MetricsRecord(**{k: (float("nan") if v is None else v) for k, v in d.items()})
            for d in data]
