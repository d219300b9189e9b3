"""Optional static figures rendered from the plot-ready CSVs (needs matplotlib)."""

from __future__ import annotations

from pathlib import Path

from ..errors import ConfigError
from .outputs import OutputError, read_csv


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ConfigError("--plots needs matplotlib (pip install 'artifact[plots]')") from exc
    return plt


def _lines(plt, header, data, out: Path, title: str, ylabel: str) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    for i, name in enumerate(header[1:], 1):
        ax.plot(data[:, 0], data[:, i], lw=0.8, label=name)
    ax.set(xlabel="t (s)", ylabel=ylabel, title=title)
    ax.legend(fontsize=6, ncol=4)
    fig.tight_layout()
    try:
        fig.savefig(out, dpi=120)
    except OSError as exc:
        raise OutputError(f"{out}: {exc}") from exc
    finally:
        plt.close(fig)
    return out


def render_plots(outdir) -> list[Path]:
    plt = _pyplot()
    outdir = Path(outdir)
    made = []
    specs = [
        ("velocities", "velocities: true vs measured", "rad/s, m/s"),
        ("body_vectors", "body-frame vectors: true vs measured", ""),
        ("euler_angles", "Euler angles (ZYX)", "rad"),
        ("errors", "estimation errors", ""),
    ]
    for stem, title, ylabel in specs:
        header, data = read_csv(outdir / f"{stem}.csv")
        made.append(_lines(plt, header, data, outdir / f"{stem}.png", title, ylabel))

    header, data = read_csv(outdir / "trajectory.csv")
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d")
    for j in range(1, len(header), 3):
        ax.plot(data[:, j], data[:, j + 1], data[:, j + 2], lw=0.8, label=header[j].replace("x", "", 1) or "true")
    ax.set(xlabel="x (m)", ylabel="y (m)", zlabel="z (m)", title="trajectory")
    ax.legend()
    out = outdir / "trajectory.png"
    try:
        fig.savefig(out, dpi=120)
    except OSError as exc:
        raise OutputError(f"{out}: {exc}") from exc
    finally:
        plt.close(fig)
    made.append(out)
    return made
