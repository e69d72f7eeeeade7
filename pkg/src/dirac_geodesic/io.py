"""CSV persistence for snapshots, diagnostics, energy reports and spectra.

Every float is written with 17 significant digits so files round-trip
exactly and repeated runs produce byte-identical output.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circle_spectral import CircleGrid, SpinStructure
from .flow import DIAGNOSTIC_COLUMNS, DiagnosticsRecord, FlowState

ENERGY_COLUMNS = ("dirichlet", "dirac", "regularizer", "E", "E_eps", "eps")
SPECTRUM_COLUMNS = ("index", "value", "symmetry_defect")
PLOT_QUANTITIES = ("E_eps", "grad_norm", "sup_psi_sq")


def fmt(x) -> str:
    return format(float(x), ".17g")


def snapshot_header(q: int) -> list[str]:
    return ["s"] + [f"u{k}" for k in range(1, q + 1)] + [f"re_psi{k}" for k in range(1, q + 1)] + [
        f"im_psi{k}" for k in range(1, q + 1)
    ]


def write_snapshot(path, state: FlowState) -> Path:
    path = Path(path)
    u = state.curve.points
    psi = state.spinor.values
    s = state.curve.grid.nodes
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(snapshot_header(u.shape[1]))
        for j in range(u.shape[0]):
            w.writerow([fmt(s[j])] + [fmt(x) for x in u[j]] + [fmt(x) for x in psi[j].real] + [fmt(x) for x in psi[j].imag])
    return path


def read_snapshot(path, manifold, spin, t: float = 0.0) -> FlowState:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    q = (data.shape[1] - 1) // 3
    u = data[:, 1 : 1 + q]
    psi = data[:, 1 + q : 1 + 2 * q] + 1j * data[:, 1 + 2 * q :]
    return FlowState.from_arrays(t, CircleGrid(data.shape[0]), manifold, u, psi, SpinStructure.parse(spin))


def write_diagnostics(path, trajectory: Iterable[DiagnosticsRecord]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSTIC_COLUMNS)
        for rec in trajectory:
            w.writerow([fmt(x) for x in rec.as_tuple()])
    return path


def read_diagnostics(path) -> list[DiagnosticsRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [DiagnosticsRecord(**{c: float(r[c]) for c in DIAGNOSTIC_COLUMNS}) for r in rows]


def write_energy_reports(path, reports: Sequence) -> Path:
    """One row per evaluation."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENERGY_COLUMNS)
        for rep in reports:
            w.writerow([fmt(getattr(rep, c)) for c in ENERGY_COLUMNS])
    return path


def write_spectrum(path, report) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_COLUMNS)
        for i, v in enumerate(report.eigenvalues):
            w.writerow([i, fmt(v), fmt(report.symmetry_defect)])
    return path


def emit_plot_data(
    trajectory_files: Sequence | Mapping[float, object],
    out_path,
    quantities: Sequence[str] = PLOT_QUANTITIES,
) -> Path:
    """Merge diagnostics files into long-form ``t, quantity, value`` rows.

    A mapping ``eps -> file`` (a sweep) adds a leading ``eps`` column.
    Missing files raise ``FileNotFoundError``.
    """
    sweep = isinstance(trajectory_files, Mapping)
    items = list(trajectory_files.items()) if sweep else [(None, p) for p in trajectory_files]
    for _, p in items:
        if not Path(p).is_file():
            raise FileNotFoundError(f"diagnostics file not found: {p}")
    out_path = Path(out_path)
    with out_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((["eps"] if sweep else []) + ["t", "quantity", "value"])
        for eps, p in items:
            for rec in read_diagnostics(p):
                for qname in quantities:
                    row = [fmt(rec.t), qname, fmt(getattr(rec, qname))]
                    w.writerow(([fmt(eps)] if sweep else []) + row)
    return out_path
