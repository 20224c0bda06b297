"""CSV, summary and plot-script emission for run records."""

import csv
import os
from pathlib import Path

import numpy as np

from .simulation import metrics

PLOT_SCRIPTS = {
    "plot_states.py": ("States vs. reference", "state"),
    "plot_control.py": ("Control input", "control"),
    "plot_weights.py": ("Parameter estimates vs. true values", "weights"),
    "plot_excitation.py": ("Window excitation", "excitation"),
}


def csv_header(n, N):
    cols = ["t"]
    cols += [f"x{i}" for i in range(1, n + 1)]
    cols += [f"xr{i}" for i in range(1, n + 1)]
    cols += [f"e{i}" for i in range(1, n + 1)]
    cols += ["u", "u_pd", "u_re", "u_ad"]
    cols += [f"What{i}" for i in range(1, N + 1)]
    cols += ["Wtilde_norm", "sigma_r", "sigma_best", "V"]
    return cols


def _fmt(v):
    # repr gives the shortest string that round-trips to the same double
    return repr(float(v))


def record_rows(record):
    cols = [record.t[:, None], record.x, record.xr, record.e, record.u[:, None], record.u_pd[:, None],
            record.u_re[:, None], record.u_ad[:, None], record.W_hat, record.Wtilde_norm[:, None],
            record.sigma_r[:, None], record.sigma_best[:, None], record.V[:, None]]
    if len(record) == 0:
        return np.zeros((0, len(csv_header(record.scenario.n, record.scenario.N))))
    return np.hstack(cols)


def write_csv(record, path):
    path = Path(path)
    header = csv_header(record.scenario.n, record.scenario.N)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in record_rows(record):
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    """Return ``(header, rows)`` with rows as a float array."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def summary_text(record, tail_start=30.0, report=None):
    sc = record.scenario
    lines = [f"scenario: {sc.name}", f"law: {sc.law}", f"duration: {sc.duration} s, step: {sc.h} s"]
    if len(record) > 1:
        tail = min(tail_start, float(record.t[-1]) - sc.output_period)
        m = metrics(record, max(0.0, tail))
        lines += [
            f"tracking_rmse[{tail:g}, end]: " + ", ".join(f"{v:.6e}" for v in m["tracking_rmse"]),
            f"final_Wtilde_norm: {m['final_Wtilde_norm']:.6e}",
            "final_abs_error: " + ", ".join(f"{v:.6e}" for v in m["final_abs_error"]),
            "W_hat_final: " + ", ".join(repr(float(v)) for v in record.W_hat[-1]),
            f"T_e: {m['T_e']}",
            f"sigma_best: {m['sigma_best']:.6e}",
            f"max_abs_u: {m['max_abs_u']:.6e}",
            f"max_W_norm: {m['max_W_norm']:.6e}",
        ]
    if record.diverged:
        lines.append("status: DIVERGED")
    if report is not None:
        lines.append("theorem check: " + ("PASS" if report.passed else "FAIL"))
        lines += ["  " + s for s in report.lines()]
    return "\n".join(lines) + "\n"


def plot_script(kind, n, N, W_true):
    head = (
        "import csv\n"
        "import matplotlib.pyplot as plt\n\n"
        "with open('run.csv') as fh:\n"
        "    rows = list(csv.DictReader(fh))\n"
        "col = lambda name: [float(r[name]) for r in rows]\n"
        "t = col('t')\n"
        "fig, ax = plt.subplots()\n"
    )
    body = []
    if kind == "state":
        for i in range(1, n + 1):
            body.append(f"ax.plot(t, col('x{i}'), label='x{i}')")
            body.append(f"ax.plot(t, col('xr{i}'), '--', label='xr{i}')")
    elif kind == "control":
        for name in ("u", "u_pd", "u_re", "u_ad"):
            body.append(f"ax.plot(t, col('{name}'), label='{name}')")
    elif kind == "weights":
        for i in range(1, N + 1):
            body.append(f"ax.plot(t, col('What{i}'), label='What{i}')")
            body.append(f"ax.axhline({float(W_true[i - 1])!r}, ls=':', color='k')")
    elif kind == "excitation":
        body.append("ax.plot(t, col('sigma_r'), label='sigma_r')")
        body.append("ax.plot(t, col('sigma_best'), label='sigma_best')")
    tail = "ax.set_xlabel('t [s]')\nax.legend()\nplt.show()\n"
    return head + "\n".join(body) + "\n" + tail


def emit_outputs(record, outdir, emit_plots=False, report=None, tail_start=30.0):
    """Write ``run.csv``, ``summary.txt`` and optionally plot scripts; return written paths."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc}") from exc
    written = [write_csv(record, outdir / "run.csv")]
    summary = outdir / "summary.txt"
    summary.write_text(summary_text(record, tail_start, report))
    written.append(summary)
    if emit_plots:
        sc = record.scenario
        for fname, (_, kind) in PLOT_SCRIPTS.items():
            p = outdir / fname
            p.write_text(plot_script(kind, sc.n, sc.N, sc.plant.W_true))
            written.append(p)
    return written


def default_output_dir():
    return os.environ.get("MRCLC_OUTPUT_DIR", "mrclc_out")
