"""SVG figures: scenario map with path(s), loss curve."""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Polygon as MplPolygon  # noqa: E402

from ..geo import metric_buffer  # noqa: E402
from ..qaoa import LossTrace  # noqa: E402
from .pipeline import PlanResult  # noqa: E402
from .scenario import Scenario  # noqa: E402

PLANNER_STYLE = {
    "quav": dict(color="tab:purple", linestyle="--"),
    "astar": dict(color="tab:green", linestyle="-"),
    "rrt": dict(color="tab:orange", linestyle=":"),
}

# SVG output is byte-stable only with a fixed hash salt
plt.rcParams["svg.hashsalt"] = "quav"
plt.rcParams["svg.fonttype"] = "none"


def _draw_scenario(ax, s: Scenario) -> None:
    d_s = s.cost.buffer_distance
    for k, o in enumerate(s.obstacles):
        buf = metric_buffer(o, d_s)
        ax.add_patch(MplPolygon(buf.coords, closed=True, facecolor="none", edgecolor="grey",
                                linewidth=0.6, linestyle="--", gid=f"buffer-{k}"))
        ax.add_patch(MplPolygon(o.coords, closed=True, facecolor="0.35", edgecolor="black",
                                linewidth=0.8, gid=f"obstacle-{k}"))
    (sx, sy), (ex, ey) = s.start_xy, s.end_xy
    ax.plot([sx], [sy], marker="o", color="tab:blue", gid="start", label="start")
    ax.plot([ex], [ey], marker="*", markersize=12, color="tab:red", gid="end", label="end")
    x0, y0, x1, y1 = s.bounds
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    ax.set_xlabel("easting [m]")
    ax.set_ylabel("northing [m]")
    ax.ticklabel_format(useOffset=False, style="plain")


def emit_plot_svg(r: PlanResult, s: Scenario, path) -> None:
    """Scenario map with one path drawn dashed."""
    plot_paths([r], s, path, title=f"{s.name}: {r.planner} ({r.length:.1f} m)")


def plot_paths(results: Sequence[PlanResult], s: Scenario, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 5))
    _draw_scenario(ax, s)
    for i, r in enumerate(results):
        if len(r.waypoints) < 2:
            continue
        xs, ys = zip(*r.waypoints)
        style = dict(PLANNER_STYLE.get(r.planner, {}))
        if len(results) == 1:
            style["linestyle"] = "--"
        gid = "path" if len(results) == 1 else f"path-{r.planner}"
        ax.plot(xs, ys, linewidth=1.6, gid=gid, label=f"{r.planner} {r.length:.1f} m", **style)
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_loss_svg(trace: LossTrace, path, title: str = "QAOA loss") -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    steps = range(len(trace))
    ax.plot(steps, trace.losses, color="tab:blue", label="loss", gid="loss")
    ax.plot(steps, trace.best_losses, color="tab:red", linestyle="--", label="best so far",
            gid="best-loss")
    ax.set_xlabel("step")
    ax.set_ylabel("<H_C> (normalised)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
