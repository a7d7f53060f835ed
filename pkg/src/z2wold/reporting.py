"""Defect-localized kernel counting shared by the bulk and edge indices.

On a finite lattice the exact +1-eigenspace of A = U P U* - P always has even
dimension; the infinite-volume parity is recovered by counting only
eigenvectors localized at the intended defect, sweeping the eigenvalue
tolerance over several decades and reading the parity off a stable plateau.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IndexSettings",
    "KernelCandidate",
    "SweepRow",
    "Plateau",
    "IndexReport",
    "default_tol_sweep",
    "plateau_parity",
    "build_index_report",
]


def default_tol_sweep() -> np.ndarray:
    """Half-decade grid from 1e-1 down to 1e-6, descending."""
    return np.logspace(-1, -6, 11)


@dataclass(frozen=True)
class IndexSettings:
    """One configuration block shared verbatim by bulk and edge counting.

    The sweep window reaches up to 0.5: measured edge-defect eigenvalues at
    desk sizes converge to the kernel only polynomially (distances up to a
    few 1e-2), so a window topping out at 1e-1 cannot host their plateau.
    """

    filter_radius: float | None = None   # None -> min(Lx, Ly)/4
    localization_threshold: float = 0.9
    tol_high: float = 0.5
    tol_low: float = 1e-6
    sweep_points: int = 12
    plateau_decades: float = 1.0
    cluster_tol: float = 1e-7
    exact_kernel_tol: float = 1e-10

    def sweep(self) -> np.ndarray:
        return np.logspace(
            np.log10(self.tol_high), np.log10(self.tol_low), self.sweep_points
        )

    def radius(self, geometry) -> float:
        if self.filter_radius is not None:
            return float(self.filter_radius)
        return min(geometry.Lx, geometry.Ly) / 4.0


@dataclass
class KernelCandidate:
    eigenvalue: float
    side: int                 # +1 or -1: which kernel the state approaches
    distance: float           # |eigenvalue - side|
    weight_in_radius: float
    r90: float                # radius holding 90% of the weight
    kept: bool


@dataclass
class SweepRow:
    tol: float
    count: int
    parity: int | None   # None when the count breaks the symmetry grouping


@dataclass
class Plateau:
    parity: int
    tol_high: float
    tol_low: float
    decades: float


@dataclass
class IndexReport:
    z2: int | None
    candidates: list
    sweep: list
    plateau: Plateau | None
    filter_radius: float
    localization_threshold: float
    defect_center: tuple
    kernel_dim_exact: int
    extras: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "determined" if self.z2 is not None else "undetermined"

    def to_dict(self) -> dict:
        return {
            "z2": self.z2,
            "status": self.status,
            "filter_radius": self.filter_radius,
            "localization_threshold": self.localization_threshold,
            "defect_center": list(self.defect_center),
            "kernel_dim_exact": self.kernel_dim_exact,
            "candidates": [
                {
                    "eigenvalue": c.eigenvalue,
                    "side": c.side,
                    "distance": c.distance,
                    "weight_in_radius": c.weight_in_radius,
                    "r90": c.r90,
                    "kept": c.kept,
                }
                for c in self.candidates
            ],
            "tol_sweep": [
                {"tol": r.tol, "count": r.count, "parity": r.parity} for r in self.sweep
            ],
            "plateau": None
            if self.plateau is None
            else {
                "parity": self.plateau.parity,
                "tol_high": self.plateau.tol_high,
                "tol_low": self.plateau.tol_low,
                "decades": self.plateau.decades,
            },
            "extras": self.extras,
        }


def plateau_parity(distances, sweep, min_decades: float = 1.0, divisor: int = 1):
    """Parity of the kept kernel count, read from the tolerance sweep.

    distances are |lambda - 1| of the kept candidates.  The parity of
    #{d < tol} (divided by `divisor` where symmetry locks modes into groups,
    e.g. the two cut corners of one cylinder edge) is tabulated over the
    descending sweep grid; maximal runs of constant parity are measured in
    decades.  The topmost stable run decides: candidates converge to the
    kernel from below, so tolerances under the residual splitting undercount,
    while a spurious state just below the top of the window cannot sustain a
    full decade.  A count that fails to divide marks its row invalid; no
    stable run -> undetermined.

    Returns (z2 or None, Plateau or None, [SweepRow...]).
    """
    sweep = np.asarray(sweep, dtype=float)
    d = np.asarray(sorted(distances), dtype=float)
    rows = []
    for tol in sweep:
        count = int(np.searchsorted(d, tol, side="left"))
        if count % divisor:
            rows.append(SweepRow(float(tol), count, None))
        else:
            rows.append(SweepRow(float(tol), count, (count // divisor) % 2))

    runs = []
    start = 0
    for i in range(1, len(rows) + 1):
        if i == len(rows) or rows[i].parity != rows[start].parity:
            runs.append((start, i - 1))
            start = i
    best = None
    for s, e in runs:
        if rows[s].parity is None:
            continue
        decades = np.log10(rows[s].tol / rows[e].tol)
        if decades + 1e-12 >= min_decades:
            plateau = Plateau(rows[s].parity, rows[s].tol, rows[e].tol, float(decades))
            if best is None or plateau.tol_high > best.tol_high:
                best = plateau
    if best is None:
        return None, None, rows
    return best.parity, best, rows


def _degenerate_groups(values: np.ndarray, tol: float):
    """Index groups of eigenvalues separated by gaps <= tol (already sorted)."""
    if values.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(values) > tol)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks + 1, [values.size]])
    return [np.arange(s, e) for s, e in zip(starts, ends)]


def build_index_report(eigenvalues, eigenvectors, site_weight_fn, site_distances,
                       geometry, settings: IndexSettings, defect_center,
                       extras: dict | None = None, count_divisor: int = 1) -> IndexReport:
    """Assemble the defect-localized parity report for one kernel spectrum.

    site_weight_fn maps an eigenvector to per-site probability weights;
    site_distances holds each site's distance from the defect region center
    (a point for the bulk flux, the open edge for the cylinder).  Degenerate
    eigenvalue clusters are re-rotated to diagonalize the in-radius weight
    before the per-vector filter is applied: the solver's arbitrary basis
    inside a tie would otherwise smear a defect mode over its degenerate
    far-away partners.  count_divisor folds out modes the symmetry locks into
    groups inside the filter region.
    """
    radius = settings.radius(geometry)
    sweep = settings.sweep()
    top = float(sweep[0])
    candidates = []
    kept_distances = []
    site_distances = np.asarray(site_distances, dtype=float)
    order = np.argsort(site_distances, kind="stable")

    for side in (+1, -1):
        near = np.flatnonzero(np.abs(eigenvalues - side) <= top)
        for group in _degenerate_groups(eigenvalues[near], settings.cluster_tol):
            idx = near[group]
            cols = eigenvectors[:, idx]
            if len(idx) > 1:
                inside = site_distances <= radius
                mask = np.repeat(inside, cols.shape[0] // inside.size)
                overlap = cols[mask, :].conj().T @ cols[mask, :]
                _, rot = np.linalg.eigh(overlap)
                cols = cols @ rot
            for j in range(cols.shape[1]):
                vec = cols[:, j]
                weights = site_weight_fn(vec)
                w_in = float(np.sum(weights[site_distances <= radius]))
                cum = np.cumsum(weights[order])
                j90 = int(np.searchsorted(cum, 0.9))
                r90 = float(site_distances[order][min(j90, len(order) - 1)])
                kept = w_in >= settings.localization_threshold
                lam = float(eigenvalues[idx[j]])
                dist = float(abs(lam - side))
                candidates.append(
                    KernelCandidate(lam, side, dist, w_in, r90, kept)
                )
                if side == +1 and kept:
                    kept_distances.append(dist)

    z2, plateau, rows = plateau_parity(
        kept_distances, sweep, settings.plateau_decades, count_divisor
    )
    kernel_dim_exact = int(
        np.sum(np.abs(eigenvalues - 1.0) < settings.exact_kernel_tol)
    )
    return IndexReport(
        z2=z2,
        candidates=candidates,
        sweep=rows,
        plateau=plateau,
        filter_radius=radius,
        localization_threshold=settings.localization_threshold,
        defect_center=tuple(float(c) for c in defect_center),
        kernel_dim_exact=kernel_dim_exact,
        extras=extras or {},
    )
