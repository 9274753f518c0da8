"""PNG rendering for sweep results.

The delimited output is the canonical artifact; these renders exist so a run
leaves something a human can glance at next to the CSV. matplotlib is
imported lazily and forced onto the Agg backend, so importing dqe stays
cheap and headless machines work.
"""

from __future__ import annotations

from .errors import ParameterError

__all__ = ["render_panels"]


def render_panels(x, panels, *, xlabel, title, xscale="linear",
                  path, dpi=150):
    """Render stacked line-plot panels sharing one x axis to a PNG file.

    Each panel is a mapping with keys "ylabel", "yscale" ("linear"/"log")
    and "series", a list of (label, values) pairs plotted against x.
    Returns the path written.
    """
    if not panels:
        raise ParameterError("at least one panel is required")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(
        len(panels), 1, sharex=True,
        figsize=(6.4, 3.2 * len(panels)), squeeze=False,
    )
    for ax, panel in zip(axes[:, 0], panels):
        for label, y in panel["series"]:
            ax.plot(x, y, label=label, linewidth=1.4)
        ax.set_ylabel(panel.get("ylabel", ""))
        ax.set_yscale(panel.get("yscale", "linear"))
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8, ncol=2)
    axes[0, 0].set_title(title)
    axes[-1, 0].set_xlabel(xlabel)
    axes[-1, 0].set_xscale(xscale)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
