"""Edge unitary, half-ring projection, trace-norm diagnostics and edge parity.

The gap function ramps from 1 to 0 across the bulk gap; exponentiating it on
the half-space Hamiltonian yields a unitary that differs from the identity
only on gap (edge) states.  Commuting it past the half-ring projection leaves
a defect operator whose corner-localized +1-modes carry the same parity as
the bulk flux response.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .lattice import LatticeGeometry, site_weights
from .operators import (
    AntiUnitary,
    HermitianOperator,
    ProjectionOperator,
    SpectralDecomposition,
    SymmetryError,
    UnitaryOperator,
    dagger,
    frob,
    functional_calculus,
    schatten_norm,
)
from .reporting import IndexReport, IndexSettings, build_index_report
from .bulk import bulk_kernel_spectrum
from .wold import SymmetricPair

__all__ = [
    "GapFunction",
    "make_gap_function",
    "edge_unitary",
    "quadrant_projection",
    "commutator_decay_report",
    "edge_index",
    "fredholm_cross_check",
    "cylinder_corner_distances",
]


@dataclass(frozen=True)
class GapFunction:
    """Cosine ramp from 1 to 0 with derivative supported in (a, b)."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"empty gap interval ({self.a}, {self.b})")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)
        return 0.5 * (1.0 + np.cos(np.pi * t))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        t = (x - self.a) / (self.b - self.a)
        inside = (t > 0) & (t < 1)
        out = np.zeros_like(x)
        out[inside] = -0.5 * np.pi * np.sin(np.pi * t[inside]) / (self.b - self.a)
        return out

    def phase(self, x):
        """The unit-circle image exp(2 pi i g(x)); identically 1 outside (a, b)."""
        return np.exp(2j * np.pi * self(x))


def make_gap_function(delta) -> GapFunction:
    a, b = float(delta[0]), float(delta[1])
    return GapFunction(a, b)


def edge_unitary(h_hat: HermitianOperator, g: GapFunction) -> UnitaryOperator:
    """Unitary exp(2 pi i g(H)) on the half-space; identity off the gap states."""
    return UnitaryOperator(functional_calculus(h_hat, g.phase), tol=1e-9)


def quadrant_projection(geometry: LatticeGeometry) -> ProjectionOperator:
    """Projection onto the half ring of columns x < Lx/2, all orbitals.

    Its two cut columns (between Lx-1 and 0, and between Lx/2 - 1 and Lx/2)
    each meet both open edges of the cylinder; index counting later keeps a
    single corner.
    """
    if not geometry.is_cylinder:
        raise ValueError("half-ring projection is defined on cylinder geometry")
    half = geometry.Lx // 2
    diag = np.zeros(geometry.dimension)
    for x in range(half):
        for y in range(geometry.Ly):
            base = geometry.flat_index(x, y, 0)
            diag[base:base + geometry.orbitals] = 1.0
    return ProjectionOperator(np.diag(diag).astype(complex))


def cylinder_corner_distances(geometry: LatticeGeometry, corner=(0.0, 0.0)) -> np.ndarray:
    """Distance of every site from a corner, periodic in x only."""
    coords = geometry.site_coordinates()
    dx = np.abs(coords[:, 0] - corner[0])
    dx = np.minimum(dx, geometry.Lx - dx)
    dy = np.abs(coords[:, 1] - corner[1])
    return np.hypot(dx, dy)


def edge_strip_distances(geometry: LatticeGeometry, which: str = "bottom") -> np.ndarray:
    """Distance of every site from one open edge of the cylinder."""
    coords = geometry.site_coordinates()
    if which == "bottom":
        return coords[:, 1].astype(float)
    if which == "top":
        return (geometry.Ly - 1 - coords[:, 1]).astype(float)
    raise ValueError(f"which must be 'bottom' or 'top', got {which!r}")


@dataclass
class DecayReport:
    cut_profile: list          # (distance from nearest cut column, max block norm)
    edge_profile: list         # (distance from nearest open edge, max block norm)
    cut_decay_length: float | None
    edge_decay_length: float | None
    trace_norm: float
    commutator_norm: float
    defect_identity_residual: float


def commutator_decay_report(u_e: UnitaryOperator, pi: ProjectionOperator,
                            geometry: LatticeGeometry) -> DecayReport:
    """Spatial decay table and trace norm of [U_E, Pi].

    Block norms are grouped by the distance of the nearer site from the cut
    columns and from the open edges, with log-linear decay fits; the Schatten-1
    norm is the finite-volume trace-class surrogate.  Also certifies the
    algebraic identity A_E = [U_E, Pi] U_E*.
    """
    comm = u_e.matrix @ pi.matrix - pi.matrix @ u_e.matrix
    a_e = u_e.matrix @ pi.matrix @ dagger(u_e.matrix) - pi.matrix
    ident = frob(a_e - comm @ dagger(u_e.matrix))

    n = geometry.orbitals
    coords = geometry.site_coordinates()
    half = geometry.Lx // 2
    cut_cols = np.array([0.0, float(half)])
    dx0 = np.abs(coords[:, 0][:, None] - cut_cols[None, :] + 0.5)
    dx0 = np.minimum(dx0, geometry.Lx - dx0)
    cut_dist = dx0.min(axis=1)
    edge_dist = np.minimum(coords[:, 1], geometry.Ly - 1 - coords[:, 1])

    n_sites = geometry.n_sites
    blocks = comm.reshape(n_sites, n, n_sites, n).transpose(0, 2, 1, 3)
    norms = np.linalg.norm(blocks, axis=(2, 3))

    def profile(dists):
        pair_d = np.minimum(dists[:, None], dists[None, :])
        out = {}
        for d, v in zip(pair_d.ravel(), norms.ravel()):
            key = round(float(d), 6)
            out[key] = max(out.get(key, 0.0), float(v))
        return sorted(out.items())

    cut_profile = profile(cut_dist)
    edge_profile = profile(edge_dist)

    def fit(prof):
        pts = [(d, v) for d, v in prof if v > 1e-13]
        if len(pts) < 3:
            return None
        xs = np.array([p[0] for p in pts])
        ys = np.log([p[1] for p in pts])
        slope, _ = np.polyfit(xs, ys, 1)
        return float(-1.0 / slope) if slope < 0 else None

    return DecayReport(
        cut_profile=cut_profile,
        edge_profile=edge_profile,
        cut_decay_length=fit(cut_profile),
        edge_decay_length=fit(edge_profile),
        trace_norm=schatten_norm(comm, 1.0),
        commutator_norm=frob(comm),
        defect_identity_residual=ident,
    )


def edge_index(h_hat: HermitianOperator, tau: AntiUnitary, g: GapFunction,
               geometry: LatticeGeometry,
               settings: IndexSettings = IndexSettings()) -> IndexReport:
    """Edge-localized parity of the edge defect operator.

    The derived symmetry tau U_E tau* = U_E* is verified before counting.
    The localization filter keeps the strip within filter_radius of the
    bottom open edge: the top edge is exponentially decoupled through the
    gapped bulk, while the two cut corners of the kept edge host defect modes
    locked pairwise to the same eigenvalue by the odd symmetry (the conjugate
    of a defect mode is its image at the opposite cut), so the single-cut
    parity is the strip count halved.
    """
    u_e = edge_unitary(h_hat, g)
    symm = frob(tau.conjugate(u_e.matrix) - dagger(u_e.matrix))
    if symm > 1e-9:
        raise SymmetryError(f"||tau U_E tau* - U_E+|| = {symm:.3e}")
    pi = quadrant_projection(geometry)
    pair = SymmetricPair(u_e, pi, tau)
    dec = bulk_kernel_spectrum(pair.u, pair.p)
    distances = edge_strip_distances(geometry, "bottom")
    return build_index_report(
        dec.eigenvalues, dec.eigenvectors,
        lambda v: site_weights(v, geometry),
        distances, geometry, settings, (0.0, 0.0),
        extras={"gap_interval": [g.a, g.b], "edge_symmetry_residual": symm,
                "count_divisor": 2, "filter_region": "bottom-edge strip"},
        count_divisor=2,
    )


@dataclass
class FredholmReport:
    z2: int | None
    plateau: object
    sweep: list
    singular_values: np.ndarray
    correspondence_residual: float
    kernel_dim_exact: int


def fredholm_cross_check(u: UnitaryOperator, p: ProjectionOperator,
                         settings: IndexSettings = IndexSettings(),
                         site_distances=None, geometry=None,
                         count_divisor: int = 1) -> FredholmReport:
    """Parity via the kernel of F = P U P + (1 - P).

    Small singular values of F are counted with the same localization filter
    and tolerance sweep as the direct kernel counting; for each kept singular
    vector psi the correspondence ||(A - 1) U psi|| <= 1e-6 + 3 sigma ties the
    two kernel descriptions together.  Near-degenerate singular values are
    re-rotated against the filter region like the eigenvalue clusters.
    """
    eye = np.eye(u.dimension)
    f = p.matrix @ u.matrix @ p.matrix + (eye - p.matrix)
    _, svals, vh = np.linalg.svd(f)
    a = u.matrix @ p.matrix @ dagger(u.matrix) - p.matrix

    top = settings.tol_high
    small = np.flatnonzero(svals <= top)
    cols = vh[small].conj().T if small.size else np.zeros((u.dimension, 0))
    if site_distances is not None and geometry is not None and small.size > 1:
        dist = np.asarray(site_distances, dtype=float)
        inside = dist <= settings.radius(geometry)
        mask = np.repeat(inside, geometry.orbitals)
        from .reporting import _degenerate_groups

        vals = svals[small]
        order = np.argsort(vals, kind="stable")
        for group in _degenerate_groups(vals[order], settings.cluster_tol):
            idx = order[group]
            if len(idx) < 2:
                continue
            sub = cols[:, idx]
            overlap = sub[mask, :].conj().T @ sub[mask, :]
            _, rot = np.linalg.eigh(overlap)
            cols[:, idx] = sub @ rot

    kept = []
    worst = 0.0
    for j, i in enumerate(small):
        psi = cols[:, j]
        if site_distances is not None and geometry is not None:
            w = site_weights(psi, geometry)
            w_in = float(np.sum(
                w[np.asarray(site_distances) <= settings.radius(geometry)]
            ))
            if w_in < settings.localization_threshold:
                continue
        resid = float(np.linalg.norm((a - eye) @ (u.matrix @ psi)))
        bound = 1e-6 + 3.0 * float(svals[i])
        if resid > bound:
            raise SymmetryError(
                f"kernel correspondence violated: ||(A-1)U psi|| = {resid:.3e} "
                f"> {bound:.3e} at sigma = {svals[i]:.3e}"
            )
        worst = max(worst, resid)
        kept.append(float(svals[i]))

    from .reporting import plateau_parity

    z2, plateau, rows = plateau_parity(
        kept, settings.sweep(), settings.plateau_decades, count_divisor
    )
    kernel_exact = int(np.sum(svals < settings.exact_kernel_tol))
    return FredholmReport(
        z2=z2, plateau=plateau, sweep=rows, singular_values=svals,
        correspondence_residual=worst, kernel_dim_exact=kernel_exact,
    )
