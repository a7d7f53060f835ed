"""Dense operator substrate: Hermitian/unitary/projection wrappers, antiunitary
conjugation, spectral functional calculus, Kramers pairing, Schatten norms.

Everything here is plain dense numpy linear algebra; no lattice knowledge.
All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

__all__ = [
    "SymmetryError",
    "ClusterError",
    "Tolerances",
    "DEFAULT_TOL",
    "dagger",
    "frob",
    "commutator",
    "HermitianOperator",
    "UnitaryOperator",
    "ProjectionOperator",
    "AntiUnitary",
    "SpectralDecomposition",
    "conjugate_by_antiunitary",
    "functional_calculus",
    "kramers_basis",
    "standard_odd_time_reversal",
    "UnitaryPart",
    "unitary_part",
    "schatten_norm",
    "rescaled_eigenvalue_shift",
    "eigen_cluster",
    "subspace_angle",
]


class SymmetryError(ValueError):
    """An operator violates a structural invariant (hermiticity, unitarity, parity...)."""


class ClusterError(ValueError):
    """Eigenvalue clustering is ambiguous or unstable at the requested tolerance."""


@dataclass(frozen=True)
class Tolerances:
    """Default validation tolerances.  All residuals use the Frobenius norm,
    which upper-bounds the operator norm, so passing here is conservative."""

    hermitian: float = 1e-12       # relative to ||M||
    unitary: float = 1e-10         # absolute, ||U U+ - 1||
    projection: float = 1e-8       # idempotency / rank drift
    antiunitary_parity: float = 1e-10
    reconstruction: float = 1e-9   # relative, ||M - V L V+||
    normal: float = 1e-9           # relative to ||X||^2
    kramers: float = 1e-9


DEFAULT_TOL = Tolerances()


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def frob(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _as_square(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SymmetryError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass
class HermitianOperator:
    """Dense self-adjoint matrix, optionally carrying a human-readable label."""

    matrix: np.ndarray
    label: str = ""
    tol: float = field(default=DEFAULT_TOL.hermitian, repr=False)

    def __post_init__(self):
        self.matrix = _as_square(self.matrix)
        defect = frob(self.matrix - dagger(self.matrix))
        if defect > self.tol * max(frob(self.matrix), 1e-300):
            raise SymmetryError(
                f"matrix is not self-adjoint: ||M - M+|| = {defect:.3e}"
            )

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass
class UnitaryOperator:
    matrix: np.ndarray
    tol: float = field(default=DEFAULT_TOL.unitary, repr=False)

    def __post_init__(self):
        self.matrix = _as_square(self.matrix)
        eye = np.eye(self.matrix.shape[0])
        defect = frob(self.matrix @ dagger(self.matrix) - eye)
        if defect > self.tol:
            raise SymmetryError(f"matrix is not unitary: ||U U+ - 1|| = {defect:.3e}")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass
class ProjectionOperator:
    matrix: np.ndarray
    tol: float = field(default=DEFAULT_TOL.projection, repr=False)

    def __post_init__(self):
        self.matrix = _as_square(self.matrix)
        herm = frob(self.matrix - dagger(self.matrix))
        idem = frob(self.matrix @ self.matrix - self.matrix)
        if herm > self.tol or idem > self.tol:
            raise SymmetryError(
                f"matrix is not an orthogonal projection: "
                f"||P - P+|| = {herm:.3e}, ||P^2 - P|| = {idem:.3e}"
            )
        tr = float(np.trace(self.matrix).real)
        self.rank = int(round(tr))
        if abs(tr - self.rank) > self.tol:
            raise SymmetryError(f"trace {tr} is not close to an integer rank")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> "ProjectionOperator":
        return ProjectionOperator(np.eye(self.dimension) - self.matrix, tol=self.tol)


@dataclass
class AntiUnitary:
    """Antiunitary operator v -> T conj(v), stored through its unitary part T.

    Conjugation is always with respect to the standard coordinate basis; a
    basis change B must transform the unitary part as T -> B+ T conj(B).
    """

    unitary_part: np.ndarray
    tol: float = field(default=DEFAULT_TOL.unitary, repr=False)

    def __post_init__(self):
        self.unitary_part = _as_square(self.unitary_part)
        n = self.unitary_part.shape[0]
        defect = frob(self.unitary_part @ dagger(self.unitary_part) - np.eye(n))
        if defect > self.tol:
            raise SymmetryError(f"unitary part fails unitarity: {defect:.3e}")
        square = self.unitary_part @ self.unitary_part.conj()
        s = float(np.trace(square).real) / n
        sign = 1 if s > 0 else -1
        if abs(s - sign) > DEFAULT_TOL.antiunitary_parity or frob(
            square - sign * np.eye(n)
        ) > max(DEFAULT_TOL.antiunitary_parity * n, 1e-9):
            raise SymmetryError(
                "T conj(T) is not a +/-1 multiple of the identity; "
                "not a parity-definite antiunitary"
            )
        self.parity = sign

    @property
    def dimension(self) -> int:
        return self.unitary_part.shape[0]

    @property
    def is_odd(self) -> bool:
        return self.parity == -1

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        """Apply to a vector, or columnwise to a matrix of vectors."""
        return self.unitary_part @ np.conj(vec)

    def conjugate(self, m: np.ndarray) -> np.ndarray:
        """Return the conjugated operator T conj(M) T+."""
        t = self.unitary_part
        return t @ np.conj(m) @ dagger(t)

    def restricted(self, basis: np.ndarray) -> "AntiUnitary":
        """Restrict to the span of orthonormal columns.

        Valid only when the span is invariant; the unitarity check of the
        restricted part fails loudly otherwise.
        """
        t_sub = dagger(basis) @ self.unitary_part @ np.conj(basis)
        return AntiUnitary(t_sub)


def conjugate_by_antiunitary(theta: AntiUnitary, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (theta.dimension, theta.dimension):
        raise SymmetryError(
            f"dimension mismatch: operator {theta.dimension}, matrix {m.shape}"
        )
    return theta.conjugate(m)


def standard_odd_time_reversal(n: int) -> AntiUnitary:
    """Block-diagonal odd antiunitary pairing coordinates (2i, 2i+1)."""
    if n % 2:
        raise SymmetryError(f"odd antiunitary needs even dimension, got {n}")
    block = np.array([[0.0, -1.0], [1.0, 0.0]])
    t = np.kron(np.eye(n // 2), block)
    return AntiUnitary(t)


@dataclass
class SpectralDecomposition:
    """Eigendecomposition of a self-adjoint matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_hermitian(cls, h, tol: float = DEFAULT_TOL.reconstruction):
        m = h.matrix if isinstance(h, HermitianOperator) else _as_square(h)
        m = 0.5 * (m + dagger(m))
        w, v = np.linalg.eigh(m)
        recon = frob(m - (v * w) @ dagger(v))
        if recon > tol * max(frob(m), 1e-300):
            raise SymmetryError(f"eigendecomposition failed to reconstruct: {recon:.3e}")
        return cls(w, v)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size

    def apply(self, f) -> np.ndarray:
        """Assemble V f(L) V+ with f evaluated on the eigenvalues."""
        vals = _evaluate_scalar_function(f, self.eigenvalues)
        return (self.eigenvectors * vals) @ dagger(self.eigenvectors)

    def projection_below(self, mu: float) -> np.ndarray:
        cols = self.eigenvectors[:, self.eigenvalues <= mu]
        return cols @ dagger(cols)

    def cluster(self, target: float, tol: float) -> np.ndarray:
        return eigen_cluster(self.eigenvalues, target, tol)


def _evaluate_scalar_function(f, w: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(w), dtype=complex)
        if vals.shape != w.shape:
            raise TypeError
    except Exception:
        vals = np.array([f(x) for x in w], dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError("function is undefined (non-finite) on an eigenvalue")
    return vals


def functional_calculus(h, f) -> np.ndarray:
    """Evaluate a scalar function of a self-adjoint matrix spectrally."""
    return SpectralDecomposition.from_hermitian(h).apply(f)


def kramers_basis(theta: AntiUnitary, basis: np.ndarray,
                  tol: float = DEFAULT_TOL.kramers) -> np.ndarray:
    """Orthonormal basis of an invariant subspace organised in conjugate pairs.

    Given an odd antiunitary leaving span(basis) invariant, returns columns
    (phi_1, phi_1', ..., phi_n, phi_n') with theta(phi_i) = phi_i' and
    theta(phi_i') = -phi_i.  Constructive: pick a vector, adjoin its image,
    deflate, repeat.
    """
    if not theta.is_odd:
        raise SymmetryError("Kramers pairing needs an odd antiunitary")
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim == 1:
        basis = basis[:, None]
    d = basis.shape[1]
    proj = basis @ dagger(basis)
    inv_defect = frob(theta.conjugate(proj) - proj)
    if inv_defect > max(tol, 1e-9):
        raise SymmetryError(
            f"subspace is not invariant under the antiunitary: {inv_defect:.3e}"
        )
    if d % 2:
        raise SymmetryError(
            f"invariant subspace of an odd antiunitary must be even-dimensional, got {d}"
        )

    # Work in subspace coordinates; the restricted action is T_sub conj(.).
    t_sub = dagger(basis) @ theta.unitary_part @ np.conj(basis)
    remaining = np.eye(d, dtype=complex)
    pairs = []
    while remaining.shape[1]:
        phi = remaining[:, 0]
        phi = phi / np.linalg.norm(phi)
        psi = t_sub @ np.conj(phi)
        psi = psi - phi * (np.vdot(phi, psi))   # exact pairing is orthogonal
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > 1e-6:
            raise SymmetryError(
                f"conjugate partner degraded (norm {nrm:.6f}); subspace not invariant?"
            )
        psi = psi / nrm
        pairs.extend([phi, psi])
        overlap = np.vstack([np.conj(phi), np.conj(psi)]) @ remaining
        deflated = remaining - remaining @ (dagger(overlap) @ overlap)
        # re-orthonormalise what is left
        u, s, _ = np.linalg.svd(deflated, full_matrices=False)
        remaining = u[:, s > 0.5]
    out = basis @ np.column_stack(pairs)
    return out


@dataclass
class UnitaryPart:
    """Phase factor of a normal matrix: same eigenvectors, eigenvalues pushed
    to the unit circle; zero on the (optional) kernel."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray
    support: np.ndarray  # boolean mask over eigenvalues

    @property
    def kernel_dim(self) -> int:
        return int(np.sum(~self.support))

    def on_support(self) -> UnitaryOperator:
        cols = self.vectors[:, self.support]
        return UnitaryOperator(dagger(cols) @ self.matrix @ cols)


def unitary_part(x: np.ndarray, kernel_tol: float = 0.0,
                 normal_tol: float = DEFAULT_TOL.normal) -> UnitaryPart:
    """Rescale the eigenvalues of a normal matrix to modulus one.

    Eigenvalues with |z| < kernel_tol are treated as kernel and mapped to 0.
    Requires a clear gap (factor 10) between kernel and support singular
    values when a kernel is present.
    """
    x = _as_square(x)
    scale = max(frob(x), 1e-300)
    norm_defect = frob(x @ dagger(x) - dagger(x) @ x)
    if norm_defect > normal_tol * scale**2:
        raise SymmetryError(f"matrix is not normal: {norm_defect:.3e}")
    tvals, z = la.schur(x, output="complex")
    offdiag = frob(tvals - np.diag(np.diag(tvals)))
    if offdiag > max(1e-8 * scale, 1e-10):
        raise SymmetryError(f"Schur form not diagonal (non-normal?): {offdiag:.3e}")
    eigs = np.diag(tvals).copy()
    mags = np.abs(eigs)
    support = mags >= kernel_tol
    if (~support).any() and support.any():
        gap_lo = mags[~support].max()
        gap_hi = mags[support].min()
        if gap_lo > 0 and gap_hi / max(gap_lo, 1e-300) < 10.0:
            raise ClusterError(
                f"kernel_tol={kernel_tol:g} does not separate a gap in the "
                f"singular-value profile ({gap_lo:.3e} vs {gap_hi:.3e})"
            )
    phases = np.where(support, eigs / np.where(support, mags, 1.0), 0.0)
    matrix = (z * phases) @ dagger(z)
    return UnitaryPart(matrix=matrix, eigenvalues=eigs, vectors=z, support=support)


def schatten_norm(m: np.ndarray, p: float) -> float:
    """p-norm of the singular values; p = 1 is the trace norm."""
    if p < 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    s = la.svdvals(np.asarray(m, dtype=complex))
    if s.size == 0:
        return 0.0
    return float(np.sum(s**p) ** (1.0 / p))


def rescaled_eigenvalue_shift(lam: complex) -> complex:
    """Eigenvalue shift of the phase factor from the shift of the original.

    For a normal X with eigenvalue 1 + lam, the phase-rescaled matrix has the
    corresponding eigenvalue 1 + mu with mu = (lam + 1)/|lam + 1| - 1.
    """
    denom = abs(lam + 1)
    if denom < 1e-14:
        raise ValueError("shift -1 corresponds to a kernel eigenvalue; no phase")
    return (lam + 1) / denom - 1


def eigen_cluster(values, target: float, tol: float) -> np.ndarray:
    """Indices i with |values[i] - target| < tol, in ascending index order."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    values = np.asarray(values, dtype=float)
    return np.flatnonzero(np.abs(values - target) < tol)


def subspace_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle (radians) between the spans of two column sets."""
    qa, _ = np.linalg.qr(a)
    qb, _ = np.linalg.qr(b)
    if qa.shape[1] != qb.shape[1]:
        return float(np.pi / 2)
    s = la.svdvals(dagger(qa) @ qb)
    s = np.clip(s, -1.0, 1.0)
    return float(np.arccos(s.min())) if s.size else 0.0
