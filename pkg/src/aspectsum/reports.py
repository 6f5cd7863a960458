"""Report rendering: aligned text tables, TSV files, and bar-chart
figures for evaluation and ablation runs.

Every render_* call writes three siblings into out_dir: <stem>.txt,
<stem>.tsv, and <stem>.png, and returns the paths plus the table text so
callers can echo it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import AblationRow, EvalReport


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    """Monospace table; first column left-aligned, the rest right-aligned."""
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def render(cells):
        parts = [cells[0].ljust(widths[0])]
        parts.extend(cell.rjust(widths[i]) for i, cell in enumerate(cells) if i > 0)
        return "  ".join(parts).rstrip()

    lines = [render(headers), render(["-" * w for w in widths])]
    lines.extend(render(row) for row in rows)
    return "\n".join(lines) + "\n"


def write_tsv(path, headers: list[str], rows: list[list[str]]) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write("\t".join(headers) + "\n")
        for row in rows:
            handle.write("\t".join(row) + "\n")


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def render_ablation(rows: list[AblationRow], out_dir, stem: str = "ablation") -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    headers = ["pooling", "doc_f1", "sent_f1"]
    cells = [[r.pooling, _fmt(r.doc_f1), _fmt(r.sent_f1)] for r in rows]
    table = format_table(headers, cells)
    (out_dir / f"{stem}.txt").write_text(table, encoding="utf-8")
    write_tsv(out_dir / f"{stem}.tsv", headers, cells)

    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    x = np.arange(len(rows))
    ax.bar(x - 0.2, [r.doc_f1 for r in rows], width=0.4, label="document F1")
    ax.bar(x + 0.2, [r.sent_f1 for r in rows], width=0.4, label="sentence F1")
    ax.set_xticks(x, [r.pooling for r in rows])
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("micro F1")
    ax.set_title("Aspect F1 by pooling variant")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / f"{stem}.png", dpi=120)
    plt.close(fig)
    return {"table": out_dir / f"{stem}.txt", "tsv": out_dir / f"{stem}.tsv",
            "figure": out_dir / f"{stem}.png", "text": table}


def render_eval(report: EvalReport, out_dir, stem: str = "eval") -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    headers = ["entity_id", "query", "R1", "R2", "RL"]
    cells = [[row.entity_id, row.query, _fmt(row.rouge.rouge1.f1),
              _fmt(row.rouge.rouge2.f1), _fmt(row.rouge.rougeL.f1)]
             for row in report.rows]
    cells.append(["mean", "", _fmt(report.mean.rouge1.f1),
                  _fmt(report.mean.rouge2.f1), _fmt(report.mean.rougeL.f1)])
    table = format_table(headers, cells)
    (out_dir / f"{stem}.txt").write_text(table, encoding="utf-8")
    write_tsv(out_dir / f"{stem}.tsv", headers, cells)

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    means = [report.mean.rouge1.f1, report.mean.rouge2.f1, report.mean.rougeL.f1]
    ax.bar(["R1", "R2", "RL"], means)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("F1")
    ax.set_title(f"Mean ROUGE over {len(report.rows)} summaries")
    fig.tight_layout()
    fig.savefig(out_dir / f"{stem}.png", dpi=120)
    plt.close(fig)
    return {"table": out_dir / f"{stem}.txt", "tsv": out_dir / f"{stem}.tsv",
            "figure": out_dir / f"{stem}.png", "text": table}
