"""Flux-insertion unitary, Fermi projection and the bulk parity index.

Threading one flux quantum at a point of the torus and comparing the rotated
Fermi projection with the original leaves a compact defect operator whose
+1-eigenvectors localized at the insertion point carry the parity invariant.
An independent per-spin-block Bott index serves as the oracle for the clean
decoupled model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeGeometry, ModelSpec, build_bulk_hamiltonian, \
    site_weights, spectral_gap
from .operators import (
    AntiUnitary,
    HermitianOperator,
    ProjectionOperator,
    SpectralDecomposition,
    SymmetryError,
    UnitaryOperator,
    dagger,
)
from .reporting import IndexReport, IndexSettings, build_index_report
from .wold import SymmetricPair

__all__ = [
    "NoGapError",
    "FluxUnitary",
    "flux_unitary",
    "fermi_projection",
    "bulk_kernel_spectrum",
    "bulk_index",
    "chern_block_oracle",
    "torus_distances",
]


class NoGapError(RuntimeError):
    """The probe energy does not sit in an open spectral gap."""


@dataclass
class FluxUnitary:
    """Position-diagonal phase winding once around the insertion point."""

    center: tuple
    site_phases: np.ndarray
    geometry: LatticeGeometry

    def as_operator(self) -> UnitaryOperator:
        diag = np.repeat(np.exp(1j * self.site_phases), self.geometry.orbitals)
        return UnitaryOperator(np.diag(diag))


def default_flux_center(geometry: LatticeGeometry) -> tuple:
    return (geometry.Lx / 2.0 - 0.5, geometry.Ly / 2.0 - 0.5)


def flux_unitary(geometry: LatticeGeometry, center=None) -> FluxUnitary:
    """Full planar angle of (site - center) in [0, 2pi), equal on all orbitals.

    The default center sits at the torus midpoint offset by (1/2, 1/2) so it
    never coincides with a site.
    """
    if center is None:
        center = default_flux_center(geometry)
    cx, cy = float(center[0]), float(center[1])
    if abs(cx - round(cx)) < 1e-9 and abs(cy - round(cy)) < 1e-9:
        raise ValueError(f"flux center {center} coincides with a lattice site")
    coords = geometry.site_coordinates()
    phases = np.mod(np.arctan2(coords[:, 1] - cy, coords[:, 0] - cx), 2 * np.pi)
    return FluxUnitary((cx, cy), phases, geometry)


def fermi_projection(h: HermitianOperator, mu: float,
                     atol: float = 1e-9) -> ProjectionOperator:
    """Spectral projection onto energies <= mu; mu must avoid the spectrum."""
    dec = SpectralDecomposition.from_hermitian(h)
    if np.min(np.abs(dec.eigenvalues - mu)) <= atol:
        raise NoGapError(f"probe energy {mu} is within {atol} of an eigenvalue")
    return ProjectionOperator(dec.projection_below(mu))


def bulk_kernel_spectrum(u: UnitaryOperator, p: ProjectionOperator) -> SpectralDecomposition:
    """Eigendecomposition of the self-adjoint defect A = U P U* - P."""
    a = u.matrix @ p.matrix @ dagger(u.matrix) - p.matrix
    dec = SpectralDecomposition.from_hermitian(a)
    if dec.eigenvalues.min() < -1 - 1e-8 or dec.eigenvalues.max() > 1 + 1e-8:
        raise SymmetryError("defect spectrum leaves [-1, 1]; inputs corrupted")
    return dec


def torus_distances(geometry: LatticeGeometry, center) -> np.ndarray:
    """Minimum-image distance of every site from a (possibly off-site) point."""
    coords = geometry.site_coordinates()
    dx = np.abs(coords[:, 0] - center[0])
    dy = np.abs(coords[:, 1] - center[1])
    if geometry.boundary_x == "periodic":
        dx = np.minimum(dx, geometry.Lx - dx)
    if geometry.boundary_y == "periodic":
        dy = np.minimum(dy, geometry.Ly - dy)
    return np.hypot(dx, dy)


def bulk_index(h: HermitianOperator, tau: AntiUnitary, mu: float,
               geometry: LatticeGeometry,
               settings: IndexSettings = IndexSettings(),
               center=None) -> IndexReport:
    """Defect-localized parity of the flux-response kernel.

    Requires a verified gap at mu and an exactly symmetric Hamiltonian; the
    symmetric-pair constructor re-checks the symmetry chain (the flux phases
    are real, so conjugation by the time reversal inverts the flux unitary).
    """
    if not geometry.is_torus:
        raise ValueError("bulk index needs torus geometry")
    gap = spectral_gap(h, mu)
    if gap is None:
        raise NoGapError(f"no spectral gap at mu={mu}")
    flux = flux_unitary(geometry, center)
    p = fermi_projection(h, mu)
    u = flux.as_operator()
    pair = SymmetricPair(u, p, tau)   # validates the symmetry constraints
    dec = bulk_kernel_spectrum(pair.u, pair.p)
    distances = torus_distances(geometry, flux.center)
    report = build_index_report(
        dec.eigenvalues, dec.eigenvectors,
        lambda v: site_weights(v, geometry),
        distances, geometry, settings, flux.center,
        extras={"gap": list(gap), "mu": mu, "fermi_rank": p.rank},
    )
    return report


def _block_bott_index(h_block: np.ndarray, lx: int, ly: int, orbitals: int,
                      mu: float = 0.0) -> float:
    """Bott index of the Fermi projection of one spin block on the torus."""
    dec = SpectralDecomposition.from_hermitian(h_block)
    cols = dec.eigenvectors[:, dec.eigenvalues <= mu]
    xs, ys = np.meshgrid(np.arange(lx), np.arange(ly), indexing="ij")
    theta_x = np.repeat(2 * np.pi * xs.ravel() / lx, orbitals)
    theta_y = np.repeat(2 * np.pi * ys.ravel() / ly, orbitals)
    u_proj = dagger(cols) @ (np.exp(1j * theta_x)[:, None] * cols)
    v_proj = dagger(cols) @ (np.exp(1j * theta_y)[:, None] * cols)
    prod = v_proj @ u_proj @ dagger(v_proj) @ dagger(u_proj)
    angles = np.angle(np.linalg.eigvals(prod))
    return float(np.sum(angles) / (2 * np.pi))


def chern_block_oracle(spec: ModelSpec, mu: float = 0.0) -> tuple:
    """Per-spin-block Bott indices of the decoupled model on the torus.

    Only valid at lambda_r = 0 where the two spin blocks are exact invariant
    subspaces; raises when the blocks are coupled.
    """
    if spec.lambda_r != 0.0:
        raise ValueError("block oracle requires lambda_r = 0 (decoupled blocks)")
    h = build_bulk_hamiltonian(spec).matrix
    geo = spec.geometry
    n = geo.orbitals
    half = n // 2
    idx_up = np.concatenate(
        [np.arange(half) + s * n for s in range(geo.n_sites)]
    )
    idx_dn = np.concatenate(
        [np.arange(half, n) + s * n for s in range(geo.n_sites)]
    )
    offdiag = np.linalg.norm(h[np.ix_(idx_up, idx_dn)])
    if offdiag > 1e-12:
        raise SymmetryError(f"spin blocks are not decoupled: {offdiag:.3e}")
    results = []
    for idx in (idx_up, idx_dn):
        block = h[np.ix_(idx, idx)]
        bott = _block_bott_index(block, geo.Lx, geo.Ly, half, mu)
        rounded = int(round(bott))
        if abs(bott - rounded) > 0.1:
            raise ValueError(f"Bott index {bott} is not close to an integer")
        results.append(rounded)
    return tuple(results)
