"""
Static figures for experiment tables.

Each experiment has one figure recipe; ``plot_table`` picks it and writes a
PNG. Uses the non-interactive Agg backend.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import RBN_CONTEXTS, ResultTable  # noqa: E402

__all__ = ["plot_table", "FIGURE_RECIPES"]

_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "figure.figsize": (4.8, 3.4),
    "savefig.dpi": 150,
}

_CONTEXT_LABELS = {
    "sy_sy": r"$A=B=\sigma_y$",
    "sz_sz": r"$A=B=\sigma_z$",
    "h_h": r"$A=B=(\sigma_x+\sigma_z)/\sqrt{2}$",
    "m_sy": r"$A=(\sigma_x-\sigma_z)/\sqrt{2},\ B=\sigma_y$",
    "sx_sy": r"$A=\sigma_x,\ B=\sigma_y$",
    "sz_sx": r"$A=\sigma_z,\ B=\sigma_x$",
    "h_sy": r"$A=(\sigma_x+\sigma_z)/\sqrt{2},\ B=\sigma_y$",
}


def _fidelity(table, ax):
    sig = table.column("sigma0")
    for s in np.unique(sig):
        m = sig == s
        ax.plot(table.column("t")[m], table.column("fidelity")[m], "o-", label=rf"$\sigma_0={s:g}$")
    ax.set_xlabel("t")
    ax.set_ylabel("fidelity")
    ax.set_ylim(0, 1.02)
    ax.legend()


def _walk_profile(table, ax):
    x = table.column("x")
    ax.plot(x, table.column("p_exact"), "k-", label="exact")
    pm = table.column("p_model")
    if np.isfinite(pm).any():
        ax.plot(x, pm, "r--", label="model")
    ax.set_xlabel("x")
    ax.set_ylabel("p(x)")
    ax.legend()


def _joint(table, ax):
    x1, x2, p = table.column("x1"), table.column("x2"), table.column("p")
    u1, u2 = np.unique(x1), np.unique(x2)
    P = p.reshape(len(u1), len(u2))
    im = ax.imshow(P.T, origin="lower", extent=(u1[0], u1[-1], u2[0], u2[-1]), aspect="auto", cmap="viridis")
    ax.figure.colorbar(im, ax=ax, label=r"$p(x_1,x_2)$")
    ax.set_xlabel(r"$x_1$")
    ax.set_ylabel(r"$x_2$")


def _conditional(table, ax):
    x = table.column("x1")
    ax.plot(x, table.column("p"), "k-", label=r"$p(x_1)$")
    ax.plot(x, table.column("p_up"), "r:", label=r"$p^\uparrow(x_1)$")
    ax.plot(x, table.column("p_down"), "b--", label=r"$p^\downarrow(x_1)$")
    ax.set_xlabel(r"$x_1$")
    ax.legend()


def _sweep(table, ax):
    eps = table.column("epsilon")
    styles = {"B": "k-", "S": "r-", "E": "b-", "D_ln2": "g-", "N_ln2": "m-"}
    labels = {"B": "B", "S": "S", "E": "E", "D_ln2": r"$D/\ln 2$", "N_ln2": r"$N/\ln 2$"}
    for j, e in enumerate(np.unique(eps)):
        m = eps == e
        tau = table.column("tau")[m]
        for col, st in styles.items():
            lab = labels[col] if j == 0 else None
            ax.plot(tau, table.column(col)[m], st, alpha=1.0 - 0.5 * j / max(1, len(np.unique(eps))), label=lab)
        for k, col in enumerate(c for c in table.columns if c.endswith("_exact") or c.endswith("_exact_ln2")):
            ax.plot(tau, table.column(col)[m], "x", ms=3, color=styles[col.replace("_exact", "")][0])
    for marks in table.meta.get("sudden_death", {}).values():
        for v in marks["tau"].values():
            if v is not None:
                ax.axvline(v, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel(r"$\tau = t/\sigma_0$")
    ax.legend(ncol=2)


def _irreality_map(table, ax):
    th, ph, val = table.column("theta"), table.column("phi"), table.column("irreality")
    ut, up = np.unique(th), np.unique(ph)
    V = val.reshape(len(ut), len(up))
    cs = ax.contourf(ut, up, V.T, levels=20, cmap="coolwarm")
    ax.figure.colorbar(cs, ax=ax, label=r"$I_\infty$")
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$\phi$")


def _irreality_scaled(table, ax):
    tau = table.column("tau")
    ax.fill_between(tau, table.column("I_scaled_min"), table.column("I_scaled_max"), color="0.8", label="scaled irreality")
    ax.plot(tau, table.column("D_scaled"), "k-", label="scaled discord")
    ax.set_xlabel(r"$\tau = t/\sigma_0$")
    ax.legend()
    inset = ax.inset_axes([0.55, 0.45, 0.4, 0.3])
    inset.plot(tau, table.column("gap_max"), "r-")
    inset.plot(tau, table.column("gap_min"), "b-")
    inset.tick_params(labelsize=6)


def _rbn_contexts(table, ax):
    tau = table.column("tau")
    for name in RBN_CONTEXTS:
        ls = "-" if name in ("sy_sy", "sz_sz", "h_h") else "--"
        ax.plot(tau, table.column(name), ls, label=_CONTEXT_LABELS[name])
    ax.set_xlabel(r"$\tau = t/\sigma_0$")
    ax.set_ylabel(r"$\eta_{AB}/\ln 2$")
    ax.legend()


def _validate(table, ax):
    names = table.column("check")
    dev = table.column("deviation").astype(float)
    tol = table.column("tolerance").astype(float)
    floor = 1e-18
    y = np.arange(len(names))
    colors = ["tab:green" if p else "tab:red" for p in table.column("passed")]
    ax.barh(y, np.maximum(dev, floor), color=colors, log=True)
    ax.scatter(np.maximum(tol, floor), y, marker="|", color="k", s=60, zorder=3)
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=6)
    ax.set_xlabel("deviation (bar) and tolerance (tick)")
    ax.figure.set_size_inches(6.0, 5.0)


FIGURE_RECIPES = {
    "fidelity-table": _fidelity,
    "walk-profile": _walk_profile,
    "joint-dist": _joint,
    "conditional-dist": _conditional,
    "quantifier-sweep": _sweep,
    "irreality-map": _irreality_map,
    "irreality-scaled": _irreality_scaled,
    "rbn-contexts": _rbn_contexts,
    "validate": _validate,
}


def plot_table(table: ResultTable, path) -> None:
    """Render ``table`` with its experiment's recipe and save it to ``path``."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        FIGURE_RECIPES[table.experiment](table, ax)
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
