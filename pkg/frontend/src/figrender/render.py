"""Read a drosc figure CSV bundle and render the multi-panel layout."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .specs import FIGURE_SPECS, FigureSpec


class RenderError(RuntimeError):
    pass


def _load_csv(path: Path):
    if not path.exists():
        raise RenderError(f"missing bundle file: {path}")
    text = path.read_text(encoding="utf-8").strip()
    if not text:
        raise RenderError(f"empty CSV: {path}")
    lines = text.split("\n")
    header = lines[0].split(",")
    if len(lines) < 2:
        raise RenderError(f"CSV has a header but no data rows: {path}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}


def _series_values(table, column, path, delta_l):
    if column == "x_minus_lambda":
        for needed in ("x", "tau"):
            if needed not in table:
                raise RenderError(f"column '{needed}' not found in {path}")
        if delta_l is None:
            raise RenderError(f"bundle manifest lacks delta_l, needed for x - lambda in {path}")
        return table["x"] - delta_l * table["tau"]
    if column not in table:
        raise RenderError(f"column '{column}' not found in {path}")
    return table[column]


def load_bundle_manifest(csv_dir: Path) -> dict:
    manifest_path = csv_dir / "manifest.json"
    if not manifest_path.exists():
        raise RenderError(f"missing manifest: {manifest_path}")
    doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    return doc.get("config", doc)


def render(figure_id: str, csv_dir, out_path) -> "plt.Figure":
    """Render one figure bundle to ``out_path``; returns the figure object.

    Reads only; the same bundle always yields the same panel grid and the
    same number of series per panel.
    """
    if figure_id not in FIGURE_SPECS:
        raise RenderError(f"unknown figure id {figure_id!r}; expected one of {sorted(FIGURE_SPECS)}")
    spec: FigureSpec = FIGURE_SPECS[figure_id]
    csv_dir = Path(csv_dir)
    out_path = Path(out_path)
    manifest = load_bundle_manifest(csv_dir)
    delta_l = manifest.get("preset", {}).get("delta_l")

    fig, axes = plt.subplots(
        spec.rows,
        spec.cols,
        figsize=(3.2 * spec.cols, 2.6 * spec.rows),
        sharex=spec.sharex,
        squeeze=False,
    )
    for idx, panel in enumerate(spec.panels):
        ax = axes[idx // spec.cols][idx % spec.cols]
        for series in panel.series:
            path = csv_dir / f"{figure_id}_{series.file_tag}.csv"
            table = _load_csv(path)
            values = _series_values(table, series.column, path, delta_l)
            ax.plot(table["tau"], values, color=series.color, label=series.label, lw=1.2)
        if panel.title:
            ax.set_title(panel.title, fontsize=9)
        ax.set_ylabel(panel.ylabel, fontsize=8)
        if idx // spec.cols == spec.rows - 1:
            ax.set_xlabel("t / T", fontsize=8)
        ax.tick_params(labelsize=7)
    handles, labels = axes[0][0].get_legend_handles_labels()
    if labels:
        fig.legend(handles, labels, loc="upper center", ncol=min(4, len(labels)), fontsize=7)
    fig.tight_layout(rect=(0, 0, 1, 0.93))

    out_path.parent.mkdir(parents=True, exist_ok=True)
    if out_path.suffix == "":
        out_path = out_path.with_suffix(".pdf")
    metadata = {"CreationDate": None} if out_path.suffix in (".pdf", ".svg") else None
    fig.savefig(out_path, metadata=metadata)
    return fig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="drosc-render", description="Render a drosc figure CSV bundle to an image file"
    )
    ap.add_argument("figure_id", choices=sorted(FIGURE_SPECS))
    ap.add_argument("csv_dir", help="bundle directory (holds the CSVs and manifest.json)")
    ap.add_argument("out_path", help="output image path (.pdf default, .png for raster)")
    args = ap.parse_args(argv)
    try:
        fig = render(args.figure_id, args.csv_dir, args.out_path)
        plt.close(fig)
    except (RenderError, OSError, ValueError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
