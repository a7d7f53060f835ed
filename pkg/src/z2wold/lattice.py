"""Finite tight-binding models with exact on-site odd time-reversal symmetry.

The model is a spin-doubled two-band Chern insulator on the square lattice:
the spin-up block hops with

    T_x = (s3 - i s1)/2,   T_y = (s3 - i s2)/2,   on-site m s3,

the spin-down block carries the complex-conjugated hoppings, an optional
antisymmetrized nearest-neighbor spin-mixing term of strength lambda_r keeps
the symmetry while coupling the blocks, and scalar on-site disorder (uniform
in [-w, w], identical on the four orbitals of a site) never breaks it.
Torus geometry realizes the bulk, a cylinder (periodic in x, open in y) the
half-space.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .operators import AntiUnitary, HermitianOperator, dagger, frob

__all__ = [
    "S0", "S1", "S2", "S3",
    "LatticeGeometry",
    "ModelSpec",
    "LocalityCertificate",
    "hopping_blocks",
    "build_bulk_hamiltonian",
    "build_half_space_hamiltonian",
    "build_time_reversal",
    "verify_trs",
    "verify_locality",
    "spectral_gap",
    "site_weights",
    "cylinder_fiber_hamiltonian",
    "bloch_hamiltonian",
]

S0 = np.eye(2, dtype=complex)
S1 = np.array([[0, 1], [1, 0]], dtype=complex)
S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
S3 = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class LatticeGeometry:
    """Rectangular lattice with an even number of orbitals per site.

    Flat index convention: (x, y, orbital) -> (x * Ly + y) * n + orbital.
    """

    Lx: int
    Ly: int
    boundary_x: str = "periodic"
    boundary_y: str = "periodic"
    orbitals: int = 4

    def __post_init__(self):
        if self.Lx < 1 or self.Ly < 1:
            raise ValueError("lattice sides must be positive")
        if self.orbitals % 2:
            raise ValueError("orbitals per site must be even for an odd symmetry")
        for b in (self.boundary_x, self.boundary_y):
            if b not in ("periodic", "open"):
                raise ValueError(f"boundary must be 'periodic' or 'open', got {b!r}")

    @property
    def n_sites(self) -> int:
        return self.Lx * self.Ly

    @property
    def dimension(self) -> int:
        return self.n_sites * self.orbitals

    def site_index(self, x: int, y: int) -> int:
        return x * self.Ly + y

    def flat_index(self, x: int, y: int, orbital: int) -> int:
        return self.site_index(x, y) * self.orbitals + orbital

    def site_coordinates(self) -> np.ndarray:
        """(n_sites, 2) array of (x, y) in flat-site order."""
        xs, ys = np.meshgrid(np.arange(self.Lx), np.arange(self.Ly), indexing="ij")
        return np.column_stack([xs.ravel(), ys.ravel()]).astype(float)

    def site_distance(self, a, b) -> float:
        """Euclidean distance honoring periodic directions (minimum image)."""
        dx = abs(a[0] - b[0])
        dy = abs(a[1] - b[1])
        if self.boundary_x == "periodic":
            dx = min(dx, self.Lx - dx)
        if self.boundary_y == "periodic":
            dy = min(dy, self.Ly - dy)
        return float(np.hypot(dx, dy))

    @property
    def is_torus(self) -> bool:
        return self.boundary_x == "periodic" and self.boundary_y == "periodic"

    @property
    def is_cylinder(self) -> bool:
        return self.boundary_x == "periodic" and self.boundary_y == "open"


@dataclass(frozen=True)
class ModelSpec:
    """Parameters fixing one disorder realization bit for bit."""

    m: float
    lambda_r: float = 0.0
    w: float = 0.0
    seed: int = 0
    geometry: LatticeGeometry = field(default_factory=lambda: LatticeGeometry(16, 16))

    def with_geometry(self, **kwargs) -> "ModelSpec":
        return replace(self, geometry=replace(self.geometry, **kwargs))


@dataclass
class LocalityCertificate:
    prefactor: float        # fitted C in ||block|| <= C exp(-d / xi)
    decay_length: float     # fitted xi; 0.0 for strictly finite range
    residual: float
    range_limited: bool     # True when all sampled blocks beyond range 1 vanish
    samples: int


def hopping_blocks(spec: ModelSpec):
    """Fiber matrices (4x4, spin (x) orbital) of the doubled model.

    Returns (t_x, t_y, onsite, mix_x, mix_y); the mixing blocks enter the
    spin-off-diagonal corner antisymmetrized, which is exactly the symmetry
    constraint for an on-site odd time reversal.
    """
    tx_up = 0.5 * (S3 - 1j * S1)
    ty_up = 0.5 * (S3 - 1j * S2)
    zero = np.zeros((2, 2), dtype=complex)
    t_x = np.block([[tx_up, zero], [zero, np.conj(tx_up)]])
    t_y = np.block([[ty_up, zero], [zero, np.conj(ty_up)]])
    onsite = np.block([[spec.m * S3, zero], [zero, spec.m * np.conj(S3)]])
    mix_x = spec.lambda_r * S1
    mix_y = spec.lambda_r * S2
    return t_x, t_y, onsite, mix_x, mix_y


def _disorder_values(spec: ModelSpec) -> np.ndarray:
    """Per-site scalar potential, uniform in [-w, w], PCG64-seeded, site order
    x-major (the flat site order)."""
    rng = np.random.default_rng(np.random.PCG64(spec.seed))
    return rng.uniform(-spec.w, spec.w, size=spec.geometry.n_sites)


def _build_hamiltonian(spec: ModelSpec) -> np.ndarray:
    geo = spec.geometry
    n = geo.orbitals
    if n != 4:
        raise ValueError("the doubled model uses 4 orbitals per site")
    t_x, t_y, onsite, mix_x, mix_y = hopping_blocks(spec)
    dim = geo.dimension
    h = np.zeros((dim, dim), dtype=complex)
    disorder = _disorder_values(spec)

    def add_block(si: int, sj: int, block: np.ndarray):
        h[si * n:(si + 1) * n, sj * n:(sj + 1) * n] += block

    for x in range(geo.Lx):
        for y in range(geo.Ly):
            si = geo.site_index(x, y)
            add_block(si, si, onsite + disorder[si] * np.eye(n))
            for (dx, dy, t_hop, mix) in ((1, 0, t_x, mix_x), (0, 1, t_y, mix_y)):
                xn, yn = x + dx, y + dy
                if xn >= geo.Lx:
                    if geo.boundary_x == "open":
                        continue
                    xn %= geo.Lx
                if yn >= geo.Ly:
                    if geo.boundary_y == "open":
                        continue
                    yn %= geo.Ly
                sj = geo.site_index(xn, yn)
                add_block(sj, si, t_hop)
                add_block(si, sj, dagger(t_hop))
                if spec.lambda_r != 0.0:
                    # G - G^T in position (x) orbital space, placed in the
                    # spin-off-diagonal corner: exact time-reversal symmetry.
                    upper = np.zeros((n, n), dtype=complex)
                    upper[:2, 2:] = 0.5 * mix
                    add_block(sj, si, upper + dagger(upper) * 0)
                    add_block(si, sj, dagger(upper))
                    lower = np.zeros((n, n), dtype=complex)
                    lower[:2, 2:] = -0.5 * mix.T
                    add_block(si, sj, lower)
                    add_block(sj, si, dagger(lower))
    return h


def build_bulk_hamiltonian(spec: ModelSpec) -> HermitianOperator:
    """Doubled Chern model on the torus; time-reversal symmetric by construction."""
    if not spec.geometry.is_torus:
        raise ValueError("bulk Hamiltonian needs periodic boundaries in both directions")
    h = _build_hamiltonian(spec)
    return HermitianOperator(h, label=f"bulk m={spec.m} lr={spec.lambda_r} w={spec.w}")


def build_half_space_hamiltonian(spec: ModelSpec) -> HermitianOperator:
    """Sharp truncation of the bulk model to a cylinder (open in y)."""
    if not spec.geometry.is_cylinder:
        raise ValueError("half-space Hamiltonian needs periodic x and open y")
    h = _build_hamiltonian(spec)
    return HermitianOperator(h, label=f"half-space m={spec.m} lr={spec.lambda_r} w={spec.w}")


def build_time_reversal(geometry: LatticeGeometry) -> AntiUnitary:
    """On-site odd antiunitary pairing (spin up, a) with (spin down, a)."""
    n = geometry.orbitals
    if n % 2:
        raise ValueError("time reversal needs an even fiber dimension")
    half = n // 2
    block = np.zeros((n, n))
    block[:half, half:] = -np.eye(half)
    block[half:, :half] = np.eye(half)
    t = np.kron(np.eye(geometry.n_sites), block)
    return AntiUnitary(t)


def verify_trs(h: HermitianOperator, tau: AntiUnitary, tol: float = 1e-10):
    """Return (passed, residual) for ||tau H tau* - H|| <= tol * ||H||."""
    if h.dimension != tau.dimension:
        raise ValueError("dimension mismatch between Hamiltonian and symmetry")
    residual = frob(tau.conjugate(h.matrix) - h.matrix)
    return residual <= tol * max(frob(h.matrix), 1e-300), residual


def _fiber_block_norm(h: np.ndarray, geo: LatticeGeometry, si: int, sj: int) -> float:
    n = geo.orbitals
    block = h[si * n:(si + 1) * n, sj * n:(sj + 1) * n]
    return float(np.linalg.norm(block, 2))


def verify_locality(h: HermitianOperator, geometry: LatticeGeometry,
                    sample_pairs=400, seed: int = 0) -> LocalityCertificate:
    """Fit ||P_x H P_y|| <= C exp(-d/xi) over sampled site pairs.

    sample_pairs may be an integer (seeded uniform sampling of ordered site
    pairs) or an explicit list of ((x1, y1), (x2, y2)) tuples.  A model whose
    blocks vanish identically beyond distance 1 is reported with
    range_limited=True and decay_length 0.
    """
    coords = geometry.site_coordinates()
    n_sites = geometry.n_sites
    if isinstance(sample_pairs, int):
        rng = np.random.default_rng(seed)
        count = min(sample_pairs, n_sites * n_sites)
        idx = rng.integers(0, n_sites, size=(count, 2))
        pairs = [(int(i), int(j)) for i, j in idx]
    else:
        pairs = [
            (geometry.site_index(*a), geometry.site_index(*b)) for a, b in sample_pairs
        ]
    dists, norms = [], []
    for si, sj in pairs:
        d = geometry.site_distance(coords[si], coords[sj])
        dists.append(d)
        norms.append(_fiber_block_norm(h.matrix, geometry, si, sj))
    dists = np.asarray(dists)
    norms = np.asarray(norms)

    far = dists >= 2.0
    if far.any() and np.max(norms[far]) < 1e-14:
        prefactor = float(np.max(norms)) if norms.size else 0.0
        return LocalityCertificate(prefactor, 0.0, 0.0, True, len(pairs))

    keep = norms > 1e-14
    if np.sum(keep) < 2:
        return LocalityCertificate(float(np.max(norms, initial=0.0)), 0.0, 0.0, True,
                                   len(pairs))
    x = dists[keep]
    y = np.log(norms[keep])
    slope, intercept = np.polyfit(x, y, 1)
    xi = -1.0 / slope if slope < 0 else float("inf")
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return LocalityCertificate(float(np.exp(intercept)), float(xi), resid, False,
                               len(pairs))


def spectral_gap(h: HermitianOperator, mu: float, atol: float = 1e-9):
    """Largest open interval around mu free of eigenvalues, or None."""
    evals = np.linalg.eigvalsh(h.matrix)
    if np.min(np.abs(evals - mu)) <= atol:
        return None
    below = evals[evals < mu]
    above = evals[evals > mu]
    lo = float(below.max()) if below.size else -np.inf
    hi = float(above.min()) if above.size else np.inf
    return (lo, hi)


def site_weights(vec: np.ndarray, geometry: LatticeGeometry) -> np.ndarray:
    """Per-site probability weight of a state (summed over the fiber)."""
    n = geometry.orbitals
    w = np.abs(vec) ** 2
    return w.reshape(geometry.n_sites, n).sum(axis=1)


def bloch_hamiltonian(m: float, k1: float, k2: float) -> np.ndarray:
    """Two-band momentum-space block of the clean spin-up sector."""
    return (
        np.sin(k1) * S1 + np.sin(k2) * S2 + (m + np.cos(k1) + np.cos(k2)) * S3
    )


def cylinder_fiber_hamiltonian(spec: ModelSpec, k: float) -> np.ndarray:
    """Momentum-k fiber (dimension Ly * orbitals) of the clean cylinder.

    Valid for w = 0; the x-hopping enters as T_x e^{ik} + T_x^+ e^{-ik},
    matching the real-space convention so the union of fiber spectra over the
    commensurate momenta reproduces the cylinder spectrum exactly.
    """
    if spec.w != 0.0:
        raise ValueError("fiber reduction requires a clean (w = 0) model")
    geo = spec.geometry
    if not geo.is_cylinder:
        raise ValueError("fiber reduction is for cylinder geometry")
    t_x, t_y, onsite, mix_x, mix_y = hopping_blocks(spec)
    n = geo.orbitals

    def full_x_block():
        blk = t_x.copy()
        if spec.lambda_r != 0.0:
            upper = np.zeros((n, n), dtype=complex)
            upper[:2, 2:] = 0.5 * mix_x
            lower = np.zeros((n, n), dtype=complex)
            lower[:2, 2:] = -0.5 * mix_x.T
            blk = blk + upper + dagger(lower)
        return blk

    def full_y_block():
        blk = t_y.copy()
        if spec.lambda_r != 0.0:
            upper = np.zeros((n, n), dtype=complex)
            upper[:2, 2:] = 0.5 * mix_y
            lower = np.zeros((n, n), dtype=complex)
            lower[:2, 2:] = -0.5 * mix_y.T
            blk = blk + upper + dagger(lower)
        return blk

    bx = full_x_block()
    by = full_y_block()
    dim = geo.Ly * n
    fiber = np.zeros((dim, dim), dtype=complex)
    x_term = bx * np.exp(1j * k) + dagger(bx) * np.exp(-1j * k)
    for y in range(geo.Ly):
        fiber[y * n:(y + 1) * n, y * n:(y + 1) * n] = onsite + x_term
        if y + 1 < geo.Ly:
            fiber[(y + 1) * n:(y + 2) * n, y * n:(y + 1) * n] = by
            fiber[y * n:(y + 1) * n, (y + 1) * n:(y + 2) * n] = dagger(by)
    return fiber
