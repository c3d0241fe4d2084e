"""PNG rendering of harness artifacts.  Needs the optional matplotlib extra."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib: pip install 'subnyq[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _load_csv(path: Path) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline()
    skip = 0 if first and (first[0].isdigit() or first[0] in "-+.") else 1
    return np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=skip))


def render(out_dir, artifacts: dict) -> list[str]:
    """Write one PNG per plottable artifact; returns the file names."""
    plt = _pyplot()
    out = Path(out_dir)
    written = []
    for key, fname in sorted(artifacts.items()):
        src = out / fname
        if not fname.endswith(".csv") or not src.exists():
            continue
        data = _load_csv(src)
        fig, ax = plt.subplots(figsize=(6, 4))
        if key in ("delay_doppler_map", "image_csv"):
            im = ax.imshow(10 * np.log10(data / data.max() + 1e-12), aspect="auto",
                           origin="lower", vmin=-40, cmap="viridis")
            fig.colorbar(im, ax=ax, label="dB")
            ax.set_xlabel("Doppler bin" if key == "delay_doppler_map" else "azimuth")
            ax.set_ylabel("delay bin" if key == "delay_doppler_map" else "range bin")
        elif key == "rem":
            ax.bar(np.arange(data.size), data.ravel())
            ax.set_xlabel("REM band")
            ax.set_ylabel("interference level")
        elif key == "spectra":
            for epoch, is_radar, lo, hi in data:
                ax.barh(epoch + 0.2 * is_radar, (hi - lo) / 1e6, left=lo / 1e6, height=0.18,
                        color="tab:red" if is_radar else "tab:blue")
            ax.set_xlabel("frequency (MHz)")
            ax.set_ylabel("epoch")
        elif key == "success_table":
            ax.plot(np.arange(len(data)), data[:, 3], "o-")
            ax.set_xticks(np.arange(len(data)))
            ax.set_xticklabels([f"{int(k)},{int(p)},{int(l)}" for k, p, l, _ in data],
                               rotation=60, fontsize=7)
            ax.set_ylabel("success rate")
        elif key == "detections" and data.shape[1] >= 2:
            ax.plot(data[:, 1], data[:, 0], "x")
            ax.set_xlabel("Doppler bin")
            ax.set_ylabel("delay bin")
        else:
            plt.close(fig)
            continue
        ax.set_title(key.replace("_", " "))
        fig.tight_layout()
        name = Path(fname).with_suffix(".png").name
        fig.savefig(out / name, dpi=100)
        plt.close(fig)
        written.append(name)
    return written
