"""Desk-scale proxies for gap-filling edge spectrum and ballistic transport.

Nothing here decides absolute continuity; the outputs are finite-size
diagnostics (momentum-resolved cylinder bands, gap-filling statistics,
wave-packet spreading exponents) and are labeled as proxies in all reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import (
    LatticeGeometry,
    ModelSpec,
    cylinder_fiber_hamiltonian,
    site_weights,
)
from .operators import HermitianOperator, SpectralDecomposition, dagger

__all__ = [
    "BandStructure",
    "TransportTrace",
    "NoGapStatesError",
    "cylinder_bands",
    "gap_filling_fraction",
    "ballistic_transport",
]


class NoGapStatesError(RuntimeError):
    """The gap filter annihilates the chosen initial state."""


@dataclass
class BandStructure:
    momenta: np.ndarray          # nk values in [0, 2pi)
    energies: np.ndarray         # (nk, nbands), ascending per momentum
    edge_weight: np.ndarray      # (nk, nbands) probability within 2 rows of an edge
    geometry: LatticeGeometry

    def kramers_residual(self, atol_k: float = 1e-9) -> float:
        """Worst eigenvalue splitting within pairs at the invariant momenta."""
        worst = 0.0
        for k_star in (0.0, np.pi):
            hits = np.flatnonzero(np.abs(self.momenta - k_star) < atol_k)
            for i in hits:
                e = self.energies[i]
                worst = max(worst, float(np.max(np.abs(e[0::2] - e[1::2]))))
        return worst

    def max_group_velocity(self) -> float:
        dk = np.diff(self.momenta)
        de = np.abs(np.diff(self.energies, axis=0))
        return float(np.max(de / dk[:, None]))

    def covers_interval(self, interval, n_probe: int = 50,
                        edge_threshold: float = 0.5) -> bool:
        """True when edge-tagged branches cross every probe energy in the interval."""
        lo, hi = interval
        probes = np.linspace(lo, hi, n_probe + 2)[1:-1]
        e = self.energies
        tagged = self.edge_weight >= edge_threshold
        for target in probes:
            found = False
            for j in range(e.shape[1]):
                col = e[:, j]
                tcol = tagged[:, j]
                crossing = (col[:-1] - target) * (col[1:] - target) <= 0
                if np.any(crossing & (tcol[:-1] | tcol[1:])):
                    found = True
                    break
            if not found:
                return False
        return True


def cylinder_bands(spec: ModelSpec, k_points: int = 0) -> BandStructure:
    """Per-momentum diagonalization of the clean cylinder fiber.

    k_points = 0 uses the commensurate grid 2 pi j / Lx, whose fiber spectra
    reproduce the cylinder spectrum exactly; larger values interpolate.
    """
    if spec.w != 0.0:
        raise ValueError("band structure requires a clean (w = 0) model")
    geo = spec.geometry
    nk = k_points if k_points else geo.Lx
    ks = 2 * np.pi * np.arange(nk) / nk
    energies = []
    weights = []
    n = geo.orbitals
    for k in ks:
        fiber = cylinder_fiber_hamiltonian(spec, k)
        w, v = np.linalg.eigh(fiber)
        energies.append(w)
        probs = np.abs(v) ** 2
        per_row = probs.reshape(geo.Ly, n, -1).sum(axis=1)
        rows = np.arange(geo.Ly)
        near_edge = (rows < 2) | (rows >= geo.Ly - 2)
        weights.append(per_row[near_edge].sum(axis=0))
    return BandStructure(ks, np.array(energies), np.array(weights), geo)


def gap_filling_fraction(h_hat: HermitianOperator, delta, resolution: float) -> float:
    """Fraction of resolution-width bins inside the gap that contain spectrum."""
    lo, hi = float(delta[0]), float(delta[1])
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    evals = np.linalg.eigvalsh(h_hat.matrix)
    inside = evals[(evals > lo) & (evals < hi)]
    n_bins = max(int(np.ceil((hi - lo) / resolution)), 1)
    if inside.size == 0:
        return 0.0
    bins = np.minimum(((inside - lo) / (hi - lo) * n_bins).astype(int), n_bins - 1)
    return float(np.unique(bins).size / n_bins)


@dataclass
class TransportTrace:
    times: np.ndarray
    spread: np.ndarray           # variance of the ring displacement from the start site
    alpha: float                 # growth exponent of spread - spread(0)
    alpha_stderr: float
    fit_mask: np.ndarray
    wrap_time: float
    v_max: float
    filtered_norm: float
    norm_drift: float
    energy_drift: float


def ballistic_transport(h_hat: HermitianOperator, delta, edge_site,
                        times, geometry: LatticeGeometry, v_max: float,
                        orbital: int = 0) -> TransportTrace:
    """Evolve a gap-filtered edge kick and fit the spreading exponent.

    The initial state is the gap spectral projection applied to a single
    basis vector at edge_site (error when that leaves less than 10% of the
    norm).  Spread is the variance of the minimum-image displacement along
    the periodic direction; the exponent is fitted on log(spread - spread_0)
    against log t over the window before the wrap time Lx / (2 v_max).
    """
    lo, hi = float(delta[0]), float(delta[1])
    dec = SpectralDecomposition.from_hermitian(h_hat)
    x0, y0 = edge_site
    start = np.zeros(geometry.dimension, dtype=complex)
    start[geometry.flat_index(int(x0), int(y0), orbital)] = 1.0
    in_gap = (dec.eigenvalues > lo) & (dec.eigenvalues < hi)
    coeffs = dagger(dec.eigenvectors) @ start
    coeffs[~in_gap] = 0.0
    filtered_norm = float(np.linalg.norm(coeffs))
    if filtered_norm < 0.1:
        raise NoGapStatesError(
            f"no gap states to propagate: filtered norm {filtered_norm:.3e} < 0.1"
        )
    coeffs = coeffs / filtered_norm

    coords = geometry.site_coordinates()
    disp = coords[:, 0] - float(x0)
    disp = (disp + geometry.Lx / 2.0) % geometry.Lx - geometry.Lx / 2.0

    times = np.asarray(times, dtype=float)
    spread = np.empty_like(times)
    norms = np.empty_like(times)
    energies = np.empty_like(times)
    for i, t in enumerate(times):
        amp = coeffs * np.exp(-1j * dec.eigenvalues * t)
        psi = dec.eigenvectors @ amp
        w = site_weights(psi, geometry)
        norms[i] = float(np.sum(w))
        mean = float(np.sum(w * disp))
        spread[i] = float(np.sum(w * disp**2)) - mean**2
        energies[i] = float(np.real(np.vdot(psi, h_hat.matrix @ psi)))

    wrap_time = geometry.Lx / (2.0 * v_max)
    base = spread[np.argmin(np.abs(times))] if np.any(times == 0) else spread[0]
    growth = spread - base
    fit_mask = (times > 0) & (times <= wrap_time) & (growth > 0)
    if np.sum(fit_mask) < 3:
        raise RuntimeError(
            f"wrap window empty: only {int(np.sum(fit_mask))} usable times before "
            f"t = {wrap_time:.2f}"
        )
    lx = np.log(times[fit_mask])
    ly = np.log(growth[fit_mask])
    coeff, cov = np.polyfit(lx, ly, 1, cov=True)
    alpha = float(coeff[0])
    stderr = float(np.sqrt(cov[0, 0]))
    return TransportTrace(
        times=times, spread=spread, alpha=alpha, alpha_stderr=stderr,
        fit_mask=fit_mask, wrap_time=wrap_time, v_max=v_max,
        filtered_norm=filtered_norm,
        norm_drift=float(np.max(np.abs(norms - 1.0))),
        energy_drift=float(np.max(np.abs(energies - energies[0]))),
    )
