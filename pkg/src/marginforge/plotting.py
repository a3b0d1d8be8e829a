"""Plot data (CSV) and static figures (PNG) for loops, interpolants and weights.

Figures are drawn with the non-interactive Agg backend and written to files.
"""

import csv

import numpy as np

from .regions import SimultaneousRegion, cut_endpoint, region_boundary

__all__ = [
    "Table",
    "nyquist_table",
    "interpolant_table",
    "weight_table",
    "region_table",
    "write_csv",
    "plot_table",
]


class Table:
    """Named columns with an optional label column for polylines."""

    def __init__(self, columns, data, labels=None, title=""):
        self.columns = list(columns)
        self.data = np.asarray(data, dtype=float)
        self.labels = labels
        self.title = title

    def __len__(self):
        return self.data.shape[0]

    def column(self, name):
        return self.data[:, self.columns.index(name)]


def _omega(omega_range, points, two_sided=True):
    a, b = omega_range
    g = np.geomspace(a, b, points)
    return np.concatenate([-g[::-1], g]) if two_sided else g


def nyquist_table(L, omega_range=(1e-3, 1e3), points=2000):
    """``(omega, re, im)`` of the loop gain ``L(i omega)``."""
    w = _omega(omega_range, points)
    v = L(1j * w)
    return Table(["omega", "re", "im"], np.column_stack([w, v.real, v.imag]), title="Nyquist")


def interpolant_table(T, omega_range=(1e-3, 1e3), points=2000, spec=None):
    """``(omega, re, im[, distance])`` of ``T(i omega)``; distance to the forbidden set if ``spec`` given."""
    from .synthesis import distance_profile

    w = _omega(omega_range, points)
    v = T(1j * w)
    cols = [w, v.real, v.imag]
    names = ["omega", "re", "im"]
    if spec is not None:
        cols.append(distance_profile(v, spec, w))
        names.append("distance")
    return Table(names, np.column_stack(cols), title="complementary sensitivity")


def weight_table(weight, fit=None, omega_range=(1e-3, 1e3), points=2000):
    """``(omega, phi, |W~|)``: exact weight and its rational fit."""
    w = _omega(omega_range, points, two_sided=False)
    cols = [w, weight(w)]
    names = ["omega", "phi"]
    if fit is not None:
        cols.append(fit.magnitude(w))
        names.append("W_approx")
    return Table(names, np.column_stack(cols), title="weight")


def region_table(spec, omega, points=400, ray_length=20.0):
    """Forbidden-set boundary at frequency ``omega`` as labeled ``(x, y)`` polylines."""
    wt = float(omega) * spec.tau_bar
    if spec.mode == "simultaneous":
        region = SimultaneousRegion(spec.gain_k, spec.phase_phi, spec.tau_bar, float(omega))
        pieces = region_boundary(region, n=points, ray_length=ray_length)
    else:
        pieces = []
        ph = abs(wt)
        if ph >= 2 * np.pi:
            pieces.append(("delay cut", 0.5 + 1j * np.linspace(-ray_length, ray_length, points)))
        elif ph > 0:
            ye = float(cut_endpoint(ph)) * np.sign(wt)
            end = -ray_length * np.sign(wt)
            pieces.append(("delay cut", 0.5 + 1j * np.linspace(end, ye, points)))
        if spec.mode == "independent" and spec.gain_k > 1:
            # T-plane image of the real gain set 1 - 1/kappa, kappa >= k
            x = np.linspace(-ray_length, 1.0 / (1.0 - spec.gain_k), points)
            pieces.append(("gain set", x + 0j))
        if spec.mode == "independent" and spec.phase_phi > 0:
            for lab, p in (("phase cut +", spec.phase_phi), ("phase cut -", -spec.phase_phi)):
                ye = float(cut_endpoint(abs(p))) * np.sign(p)
                pieces.append((lab, 0.5 + 1j * np.linspace(-ray_length * np.sign(p), ye, points)))
    labels, rows = [], []
    for lab, pts in pieces:
        for z in pts:
            labels.append(lab)
            rows.append((z.real, z.imag))
    data = np.asarray(rows, dtype=float).reshape(-1, 2)
    return Table(["x", "y"], data, labels=labels, title=f"forbidden set at omega={omega:g}")


def write_csv(table, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        head = (["label"] if table.labels is not None else []) + table.columns
        wr.writerow(head)
        for i, row in enumerate(table.data):
            vals = [repr(float(v)) for v in row]
            wr.writerow(([table.labels[i]] if table.labels is not None else []) + vals)


def plot_table(table, path, kind, overlay=None):
    """Render ``table`` to ``path``; ``overlay`` is an optional region :class:`Table`."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    if kind == "weight":
        w = table.column("omega")
        ax.loglog(w, table.column("phi"), label=r"$\varphi(\omega)$")
        if "W_approx" in table.columns:
            ax.loglog(w, table.column("W_approx"), "--", label=r"$|\tilde W(i\omega)|$")
        ax.set_xlabel(r"$\omega$")
        ax.set_ylabel("magnitude")
    elif kind == "regions":
        _draw_regions(ax, table)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
    else:
        ax.plot(table.column("re"), table.column("im"), lw=1.2, label=table.title)
        if "distance" in table.columns:
            j = int(np.argmin(table.column("distance")))
            ax.plot(table.column("re")[j], table.column("im")[j], "o", ms=5, label="closest point")
        if overlay is not None:
            _draw_regions(ax, overlay)
        if kind == "nyquist":
            ax.plot([-1], [0], "k+", ms=8)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        _clip(ax, table)
    ax.grid(True, lw=0.3)
    ax.legend(fontsize=8, loc="best")
    ax.set_title(table.title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _draw_regions(ax, table):
    labels = np.asarray(table.labels)
    for lab in dict.fromkeys(table.labels):
        m = labels == lab
        ax.plot(table.data[m, 0], table.data[m, 1], lw=1.5, alpha=0.8, label=lab)


def _clip(ax, table):
    # keep large excursions near omega = 0 from flattening the view
    re, im = table.column("re"), table.column("im")
    lim = np.nanpercentile(np.abs(np.concatenate([re, im])), 95)
    lim = max(2.0, 1.5 * lim)
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
