"""SVG line charts of dB-MSE results, rendered with matplotlib."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import ResultTable  # noqa: E402

STYLES = {
    "blockwise-oas": dict(color="#007f00", marker="D", linestyle="-", label="Block-wise OAS"),
    "basic-oas": dict(color="#0072bd", marker="s", linestyle="--", label="Basic OAS"),
    "glasso": dict(color="red", marker="o", linestyle="-", label="Group LASSO"),
}
XLABELS = {"rc": "Compression rate $R_c$", "L": "Block length $L$", "K": "Sensors $K$"}


def _padded(lo, hi, frac=0.05):
    span = hi - lo
    if span == 0:
        span = abs(lo) or 1.0
    return lo - frac * span, hi + frac * span


def build_figure(tables, xlabel=None, ylabel="MSE [dB]", title=None):
    """Figure with one series per scheme; x is the sweep value, y the dB MSE."""
    if isinstance(tables, ResultTable):
        tables = [tables]
    rows = [r for t in tables for r in t.rows]
    if not rows:
        raise ValueError("nothing to plot")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for scheme in dict.fromkeys(r.scheme for r in rows):
        series = sorted((r for r in rows if r.scheme == scheme), key=lambda r: r.sweep_value)
        style = dict(STYLES.get(scheme, dict(marker="o", label=scheme)))
        if len(series) == 1:
            style["linestyle"] = "none"
        ax.plot([r.sweep_value for r in series], [r.mse_db for r in series], **style)

    xs = [r.sweep_value for r in rows]
    ys = [r.mse_db for r in rows]
    ax.set_xlim(*_padded(min(xs), max(xs)))
    ax.set_ylim(*_padded(min(ys), max(ys)))
    if len(set(xs)) <= 10:
        ax.set_xticks(sorted(set(xs)))
    sweep = rows[0].sweep_name
    ax.set_xlabel(xlabel or XLABELS.get(sweep, sweep))
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    return fig


def emit_svg(tables, path, xlabel=None, ylabel="MSE [dB]", title=None) -> Path:
    path = Path(path)
    fig = build_figure(tables, xlabel, ylabel, title)
    try:
        with plt.rc_context({"svg.fonttype": "path", "svg.hashsalt": "oaslab"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)
    return path
