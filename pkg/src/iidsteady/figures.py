"""Figure rendering for the demo report path (Agg backend, PNG files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_spectrum_figure", "save_correlation_figure", "save_evolution_figure"]


def save_spectrum_figure(report, path):
    """Scatter of the generator eigenvalues in the complex plane."""
    fig, ax = plt.subplots(figsize=(5, 4))
    vals = report.eigenvalues
    ax.scatter(vals.real, vals.imag, s=18, color="tab:blue", zorder=3)
    ax.axvline(0.0, color="0.6", lw=0.8)
    ax.axhline(0.0, color="0.6", lw=0.8)
    if report.spectral_gap > 0:
        ax.axvline(-report.spectral_gap, color="tab:red", lw=0.8, ls="--",
                   label=f"gap = {report.spectral_gap:.4g}")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("Re λ")
    ax.set_ylabel("Im λ")
    ax.set_title("generator spectrum")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_correlation_figure(series, path, components=None):
    """Connected correlation magnitudes on a log scale."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    labels = series.basis_labels
    if components is None:
        components = [(a, a) for a in range(len(labels))]
    for (a, b) in components:
        mags = np.abs(series.values[:, a, b])
        ax.semilogy(series.times, np.maximum(mags, 1e-18),
                    label=f"|C_{labels[a]}{labels[b]}|")
    ax.set_xlabel("τ")
    ax.set_ylabel("|C(τ)|")
    ax.set_title("two-time correlations")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_evolution_figure(times, columns, labels, path, witness=None):
    """Observable trajectories; optional product-distance witness panel."""
    panels = 2 if witness is not None else 1
    fig, axes = plt.subplots(panels, 1, figsize=(5.5, 3.2 * panels), sharex=True)
    axes = np.atleast_1d(axes)
    for col, lab in zip(columns, labels):
        axes[0].plot(times, col, label=lab)
    axes[0].set_ylabel("expectation")
    axes[0].legend(fontsize=8)
    axes[0].set_title("evolution")
    if witness is not None:
        axes[1].semilogy(times, np.maximum(witness, 1e-18), color="tab:red")
        axes[1].set_ylabel("product distance")
    axes[-1].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
