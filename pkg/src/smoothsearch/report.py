"""Deterministic serialization of run reports, plus matplotlib figures."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import ConfigError, RunReport  # noqa: E402

FORMATS = ("json-lines", "csv", "text-histogram", "svg-histogram")

_SVG_RC = {
    "svg.hashsalt": "smoothsearch",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _json_lines(report: RunReport) -> str:
    lines = [_json({
        "type": "header",
        "command": report.command,
        "version": report.version,
        "seed": report.seed,
        "config": report.config.to_dict(),
    })]
    lines += [_json({"type": "cell", **c}) for c in report.cells]
    lines += [_json({"type": "counts", **c}) for c in report.counts]
    lines += [_json({"type": "census", **c}) for c in report.census]
    return "\n".join(lines) + "\n"


def _csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.command == "gate-count":
        w.writerow(["algorithm", "qubits", "single", "cx", "total"])
        for r in report.census:
            w.writerow([r["algorithm"], r["qubits"], r["single"], r["cx"], r["total"]])
    else:
        w.writerow(["algorithm", "qubits", "noisy_gates", "accuracy"])
        for c in report.cells:
            w.writerow([c["algorithm"], c["qubits"], c["noisy_gates"], f"{c['accuracy']:.2f}"])
    return buf.getvalue()


def histogram_bars(report: RunReport) -> tuple[str, list[tuple[str, float]]]:
    """(title, [(label, value)]) for the report's natural bar chart.

    Search reports chart the observed counts; sweeps chart accuracy per
    cell; gate counts chart total gates.
    """
    if report.command == "search":
        counts = report.counts[0]["counts"]
        return "counts", [(b, float(counts[b])) for b in sorted(counts)]
    if report.command == "gate-count":
        return "total gates", [(f"{r['algorithm']} q={r['qubits']}", float(r["total"])) for r in report.census]
    return "accuracy %", [
        (f"{c['algorithm']} q={c['qubits']} n={c['noisy_gates']}", float(c["accuracy"])) for c in report.cells
    ]


def _text_histogram(report: RunReport, width: int = 50) -> str:
    title, bars = histogram_bars(report)
    if not bars:
        return f"# {report.command}: {title}\n(no data)\n"
    label_w = max(len(b[0]) for b in bars)
    peak = max(v for _, v in bars) or 1.0
    lines = [f"# {report.command}: {title}"]
    for label, value in bars:
        n = int(round(width * value / peak))
        shown = f"{value:.2f}" if title.startswith("accuracy") else f"{int(value)}"
        lines.append(f"{label.rjust(label_w)} | {'#' * n} {shown}")
    return "\n".join(lines) + "\n"


def _save_svg(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _svg_histogram(report: RunReport) -> bytes:
    title, bars = histogram_bars(report)
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(bars) + 2), 3.5))
        labels = [b[0] for b in bars]
        patches = ax.bar(range(len(bars)), [b[1] for b in bars], color="tab:blue")
        for patch, label in zip(patches, labels):
            patch.set_gid(f"bar:{label}")
        ax.set_xticks(range(len(bars)), labels, rotation=90 if len(bars) > 8 else 0)
        ax.set_ylabel(title)
        ax.set_title(report.command)
        fig.tight_layout()
        return _save_svg(fig)


def emit_report(report: RunReport, fmt: str) -> bytes:
    if fmt == "json-lines":
        return _json_lines(report).encode()
    if fmt == "csv":
        return _csv(report).encode()
    if fmt == "text-histogram":
        return _text_histogram(report).encode()
    if fmt == "svg-histogram":
        return _svg_histogram(report)
    raise ConfigError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")


# --- figures written next to a report ---------------------------------------------

def _accuracy_figure(report: RunReport):
    qubits = sorted({c["qubits"] for c in report.cells})
    fig, axes = plt.subplots(1, len(qubits), figsize=(3.2 * len(qubits), 3.2), squeeze=False)
    for ax, q in zip(axes[0], qubits):
        for algo in report.config.algorithms:
            rows = [c for c in report.cells if c["qubits"] == q and c["algorithm"] == algo]
            xs = [str(c["noisy_gates"]) for c in rows]
            ax.plot(xs, [c["accuracy"] for c in rows], marker="o", label=algo, gid=f"line:{algo}:{q}")
        ax.set_title(f"{q} qubits")
        ax.set_xlabel("noisy gates")
        ax.set_ylabel("accuracy %")
    axes[0][0].legend()
    fig.tight_layout()
    return fig


def _census_figure(report: RunReport):
    qubits = sorted({r["qubits"] for r in report.census})
    algos = report.config.algorithms
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    width = 0.8 / max(1, len(algos))
    for i, algo in enumerate(algos):
        totals = [next(r["total"] for r in report.census if r["algorithm"] == algo and r["qubits"] == q)
                  for q in qubits]
        ax.bar([k + i * width for k in range(len(qubits))], totals, width, label=algo, gid=f"bars:{algo}")
    ax.set_xticks([k + width * (len(algos) - 1) / 2 for k in range(len(qubits))], [str(q) for q in qubits])
    ax.set_xlabel("qubits")
    ax.set_ylabel("total gates")
    ax.legend()
    fig.tight_layout()
    return fig


def write_figures(report: RunReport, out_path) -> list[Path]:
    """Render figures beside ``out_path`` as ``<stem>.<kind>.svg``; returns the paths."""
    out_path = Path(out_path)
    written = []
    with plt.rc_context(_SVG_RC):
        jobs = []
        if report.command == "sweep-noise" and report.cells:
            jobs.append(("accuracy", _accuracy_figure))
        if report.census and report.config.algorithms:
            jobs.append(("gates", _census_figure))
        for kind, make in jobs:
            path = out_path.with_name(f"{out_path.stem}.{kind}.svg")
            path.write_bytes(_save_svg(make(report)))
            written.append(path)
    if report.command == "search":
        path = out_path.with_name(f"{out_path.stem}.histogram.svg")
        path.write_bytes(_svg_histogram(report))
        written.append(path)
    return written
