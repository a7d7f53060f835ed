"""Symmetry-constrained decoupling of a unitary from a projection.

Input is a triple (U, P, tau) with tau an odd antiunitary, tau U tau* = U+
and tau P tau* = P.  The defect operator A = U P U* - P measures how badly U
couples Ran P to its complement.  The engine builds a corrected unitary
W = V U that commutes with P whenever the +1-eigenspace of A is even
dimensional (on a finite space it always is), and exposes the chain/shift
machinery that would obstruct the correction in the odd case, exercised on
synthetic shift inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    AntiUnitary,
    ClusterError,
    ProjectionOperator,
    SpectralDecomposition,
    SymmetryError,
    UnitaryOperator,
    commutator,
    dagger,
    frob,
    schatten_norm,
    standard_odd_time_reversal,
    subspace_angle,
    unitary_part,
)

__all__ = [
    "SymmetricPair",
    "DefectOperators",
    "DecouplingResult",
    "defect_operators",
    "twisted_time_reversal",
    "spectral_symmetry_check",
    "kramers_on_cluster",
    "intertwiner",
    "decoupler_off_defect",
    "decoupler_on_defect",
    "decouple",
    "chain_projections",
    "shift_extraction",
    "random_symmetric_pair",
    "ring_shift_pair",
    "seam_shift_inputs",
    "shift_plus_trivial_inputs",
]

PAIR_TOL = 1e-9
IDENTITY_TOL = 1e-8
CONTRACT_TOL = 1e-8
DEFAULT_CLUSTER_TOL = 1e-7


@dataclass
class SymmetricPair:
    """(U, P, tau) with constructor-verified symmetry constraints."""

    u: UnitaryOperator
    p: ProjectionOperator
    tau: AntiUnitary
    tol: float = field(default=PAIR_TOL, repr=False)

    def __post_init__(self):
        n = self.u.dimension
        if self.p.dimension != n or self.tau.dimension != n:
            raise SymmetryError("pair members have mismatched dimensions")
        if not self.tau.is_odd:
            raise SymmetryError("time reversal must be odd (parity -1)")
        u_defect = frob(self.tau.conjugate(self.u.matrix) - dagger(self.u.matrix))
        p_defect = frob(self.tau.conjugate(self.p.matrix) - self.p.matrix)
        if u_defect > self.tol or p_defect > self.tol:
            raise SymmetryError(
                f"symmetry constraints violated: ||tau U tau* - U+|| = {u_defect:.3e}, "
                f"||tau P tau* - P|| = {p_defect:.3e}"
            )

    @property
    def dimension(self) -> int:
        return self.u.dimension

    def defect_matrix(self) -> np.ndarray:
        u, p = self.u.matrix, self.p.matrix
        a = u @ p @ dagger(u) - p
        return 0.5 * (a + dagger(a))


@dataclass
class DefectOperators:
    """A = UPU* - P, B = 1 - P - Q, Q = UPU*, with the spectral data of A."""

    a: np.ndarray
    b: np.ndarray
    q: np.ndarray
    spectral: SpectralDecomposition
    pair: SymmetricPair
    residuals: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.a.shape[0]


def defect_operators(pair: SymmetricPair, tol: float = IDENTITY_TOL) -> DefectOperators:
    """Compute the defect algebra and verify A^2 + B^2 = 1, AB + BA = 0."""
    u, p = pair.u.matrix, pair.p.matrix
    q = u @ p @ dagger(u)
    q = 0.5 * (q + dagger(q))
    a = q - p
    b = np.eye(pair.dimension) - p - q
    eye = np.eye(pair.dimension)
    res = {
        "pythagoras": frob(a @ a + b @ b - eye),
        "anticommute": frob(a @ b + b @ a),
    }
    worst = max(res.values())
    if worst > tol:
        raise SymmetryError(f"defect identities fail: {res} (corrupted inputs?)")
    spectral = SpectralDecomposition.from_hermitian(a)
    return DefectOperators(a=a, b=b, q=q, spectral=spectral, pair=pair, residuals=res)


def twisted_time_reversal(pair: SymmetricPair, tol: float = PAIR_TOL) -> AntiUnitary:
    """The antiunitary U tau; odd, swaps P and Q, anticommutes with A."""
    tilde = AntiUnitary(pair.u.matrix @ pair.tau.unitary_part)
    if not tilde.is_odd:
        raise SymmetryError("twisted time reversal lost odd parity")
    p, u = pair.p.matrix, pair.u.matrix
    q = u @ p @ dagger(u)
    a = q - p
    b = np.eye(pair.dimension) - p - q
    checks = {
        "P->Q": frob(tilde.conjugate(p) - q),
        "B fixed": frob(tilde.conjugate(b) - b),
        "A flipped": frob(tilde.conjugate(a) + a),
    }
    worst = max(checks.values())
    if worst > tol:
        raise SymmetryError(f"twisted symmetry residuals too large: {checks}")
    return tilde


def _cluster_slices(values: np.ndarray, tol: float):
    """Group sorted eigenvalues into clusters separated by gaps > tol."""
    if values.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(values) > tol)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks + 1, [values.size]])
    return [slice(s, e) for s, e in zip(starts, ends)]


@dataclass
class SpectralSymmetryReport:
    clusters: list
    max_angle: float
    max_b_square_residual: float
    passed: bool


def spectral_symmetry_check(defects: DefectOperators,
                            cluster_tol: float = DEFAULT_CLUSTER_TOL,
                            tol: float = IDENTITY_TOL) -> SpectralSymmetryReport:
    """Verify that B pairs the A-eigenspaces at +/-lambda isometrically.

    For each mid-spectrum cluster (|lambda| not within cluster_tol of 0 or 1):
    matching dimensions at -lambda, B E_lambda spanning E_{-lambda}, the
    restriction of B^2 acting as the scalar 1 - lambda^2, and even cluster
    dimension.
    """
    w, v = defects.spectral.eigenvalues, defects.spectral.eigenvectors
    slices = _cluster_slices(w, cluster_tol)
    records = []
    max_angle = 0.0
    max_resid = 0.0
    for sl in slices:
        lam = float(np.mean(w[sl]))
        if min(abs(lam), abs(lam - 1), abs(lam + 1)) < cluster_tol:
            continue
        if lam < 0:
            continue  # handled via its positive partner
        partner = None
        for sl2 in slices:
            if abs(float(np.mean(w[sl2])) + lam) < max(10 * cluster_tol, 1e-8):
                partner = sl2
                break
        if partner is None or (partner.stop - partner.start) != (sl.stop - sl.start):
            raise ClusterError(
                f"eigenvalue cluster at {lam:+.6f} has no matching partner at "
                f"{-lam:+.6f}; clustering tolerance misconfigured?"
            )
        dim = sl.stop - sl.start
        if dim % 2:
            raise ClusterError(
                f"mid-spectrum cluster at {lam:+.6f} has odd dimension {dim}"
            )
        cols = v[:, sl]
        cols_partner = v[:, partner]
        mapped = defects.b @ cols
        angle = subspace_angle(mapped, cols_partner)
        bsq = dagger(cols) @ defects.b @ defects.b @ cols
        resid = frob(bsq - (1 - lam**2) * np.eye(dim))
        max_angle = max(max_angle, angle)
        max_resid = max(max_resid, resid)
        records.append({"eigenvalue": lam, "dim": dim, "angle": angle,
                        "b_square_residual": resid})
    passed = max_angle <= tol and max_resid <= tol
    return SpectralSymmetryReport(records, max_angle, max_resid, passed)


def kramers_on_cluster(defects: DefectOperators, tilde: AntiUnitary,
                       cluster: np.ndarray) -> AntiUnitary:
    """Odd antiunitary (B*B)^{-1/2} B tilde restricted to one A-eigenspace.

    Defined for eigenvalue clusters away from {-1, 0, +1}; returned in the
    coordinates of the cluster's eigenvector columns.
    """
    w, v = defects.spectral.eigenvalues, defects.spectral.eigenvectors
    lam = float(np.mean(w[cluster]))
    if min(abs(lam), abs(lam - 1), abs(lam + 1)) < 1e-6:
        raise ValueError(f"cluster eigenvalue {lam} is in the excluded set")
    # B^2 = 1 - A^2 exactly, so the inverse square root is spectral in A.
    scale = 1.0 / np.sqrt(np.clip(1.0 - w**2, 1e-30, None))
    scale[np.abs(np.abs(w) - 1.0) < 1e-9] = 0.0
    inv_sqrt = (v * scale) @ dagger(v)
    theta_unitary = inv_sqrt @ defects.b @ tilde.unitary_part
    cols = v[:, cluster]
    theta = AntiUnitary(dagger(cols) @ theta_unitary @ np.conj(cols))
    if not theta.is_odd:
        raise SymmetryError(f"cluster antiunitary at {lam:+.4f} is not odd")
    return theta


@dataclass
class Intertwiner:
    """Normal contraction X with P X = X Q = P Q and X X* = B^2."""

    matrix: np.ndarray
    identity_residuals: dict
    circle_residual: float
    kernel_dim: int


def intertwiner(defects: DefectOperators, tol: float = 1e-9,
                kernel_tol: float = 1e-6) -> Intertwiner:
    """Build X = B(1 - 2Q) and verify its algebra.

    All three product forms must agree, X must intertwine P and Q, be normal
    with X X* = (X + X*)/2 = B^2, and carry spectrum on the circle of radius
    1/2 centered at 1/2, whose kernel is the joint +/-1 eigenspace of A.
    """
    p, q, b = defects.pair.p.matrix, defects.q, defects.b
    eye = np.eye(defects.dimension)
    x1 = b @ (eye - 2 * q)
    x2 = (eye - 2 * p) @ b
    x3 = eye - p - q + 2 * p @ q
    res = {
        "forms_12": frob(x1 - x2),
        "forms_13": frob(x1 - x3),
        "PX=XQ": frob(p @ x1 - x1 @ q),
        "XQ=PQ": frob(x1 @ q - p @ q),
        "normal": frob(x1 @ dagger(x1) - dagger(x1) @ x1),
        "XX*=sym": frob(x1 @ dagger(x1) - 0.5 * (x1 + dagger(x1))),
        "XX*=B^2": frob(x1 @ dagger(x1) - b @ b),
    }
    if max(res["forms_12"], res["forms_13"], res["PX=XQ"], res["XQ=PQ"]) > 1e-10:
        raise SymmetryError(f"intertwiner identities fail: {res}")
    if max(res["normal"], res["XX*=sym"], res["XX*=B^2"]) > 1e-9:
        raise SymmetryError(f"intertwiner normality identities fail: {res}")
    z = np.linalg.eigvals(x1)
    circle = float(np.max(np.abs(np.abs(z - 0.5) - 0.5)))
    if circle > 1e-7:
        raise SymmetryError(f"spectrum leaves the Halmos circle by {circle:.3e}")
    kernel_dim = int(np.sum(np.abs(z) < kernel_tol))
    return Intertwiner(x1, res, circle, kernel_dim)


def decoupler_off_defect(x: np.ndarray, basis_perp: np.ndarray,
                         cluster_tol: float = DEFAULT_CLUSTER_TOL) -> np.ndarray:
    """Unitary phase factor of X on the complement of its kernel.

    basis_perp holds the A-eigenvector columns with |lambda| < 1 - cluster_tol;
    returned in those coordinates.  Raises when singular values leak below the
    floor sqrt(1 - (1 - cluster_tol)^2) implied by the clustering.
    """
    if basis_perp.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    x_perp = dagger(basis_perp) @ x @ basis_perp
    floor = np.sqrt(max(1.0 - (1.0 - cluster_tol) ** 2, 0.0))
    part = unitary_part(x_perp, kernel_tol=0.0)
    if np.min(np.abs(part.eigenvalues)) < 0.5 * floor:
        raise ClusterError(
            "kernel leakage: X on the off-defect subspace has singular values "
            f"below the cluster floor {floor:.3e}"
        )
    return part.matrix


def decoupler_on_defect(basis_plus: np.ndarray, basis_minus: np.ndarray,
                        tilde: AntiUnitary, tol: float = PAIR_TOL):
    """Symmetry-compatible swap of the +1 and -1 defect eigenspaces.

    basis_minus must be the image of basis_plus under the twisted antiunitary.
    Returns (v, classification, rest_index) with v in the coordinates of the
    columns [basis_plus, basis_minus].  Even dimension: full swap.  Odd
    dimension: the last conjugate pair is left fixed (the residual block) and
    rest_index marks its position.
    """
    d = basis_plus.shape[1]
    if basis_minus.shape[1] != d:
        raise SymmetryError(
            f"defect eigenspaces have mismatched dimensions {d} vs {basis_minus.shape[1]}"
        )
    if d == 0:
        return np.zeros((0, 0), dtype=complex), "even", None
    mismatch = frob(tilde(basis_plus) - basis_minus)
    if mismatch > max(tol * 10, 1e-8):
        raise SymmetryError(
            f"basis_minus is not the twisted image of basis_plus ({mismatch:.3e})"
        )
    even = d % 2 == 0
    e = d if even else d - 1
    v = np.zeros((2 * d, 2 * d), dtype=complex)
    if e:
        half = e // 2
        j = np.zeros((e, e))
        j[:half, half:] = -np.eye(half)
        j[half:, :half] = np.eye(half)
        v[d:d + e, :e] = j          # phi_j -> sum_i J_ij (tilde phi_i)
        v[:e, d:d + e] = j          # tilde phi_j -> sum_i J_ij phi_i
    rest_index = None
    if not even:
        v[d - 1, d - 1] = 1.0       # residual pair is left alone
        v[2 * d - 1, 2 * d - 1] = 1.0
        rest_index = d - 1
    cols = np.column_stack([basis_plus, basis_minus])
    t_sub = dagger(cols) @ tilde.unitary_part @ np.conj(cols)
    symm = frob(t_sub @ np.conj(v) @ dagger(t_sub) - dagger(v))
    if symm > max(tol, 1e-9):
        raise SymmetryError(f"defect swap violates the twisted symmetry: {symm:.3e}")
    return v, ("even" if even else "odd-residual"), rest_index


@dataclass
class DecouplingResult:
    w: UnitaryOperator
    v: UnitaryOperator
    classification: str
    pi_plus: np.ndarray | None
    pi_minus: np.ndarray | None
    chains: list
    schatten_report: list
    residuals: dict
    defect_dim: int

    @property
    def is_even(self) -> bool:
        return self.classification == "even"


def decouple(pair: SymmetricPair,
             cluster_tol: float = DEFAULT_CLUSTER_TOL) -> DecouplingResult:
    """Correct U to a P-compatible unitary W = V U.

    The +1/-1 eigenvectors of A are swapped by a symmetric permutation, the
    rest is rotated by the phase factor of the intertwiner X.  Even defect
    dimension gives [W, P] = 0; odd leaves a rank-1 excess and deficiency
    W P W* - P = pi_plus - pi_minus.
    """
    defects = defect_operators(pair)
    tilde = twisted_time_reversal(pair)
    w_eigs, v_eigs = defects.spectral.eigenvalues, defects.spectral.eigenvectors

    counts = []
    for t in (cluster_tol / np.sqrt(10), cluster_tol, cluster_tol * np.sqrt(10)):
        counts.append((int(np.sum(np.abs(w_eigs - 1) < t)),
                       int(np.sum(np.abs(w_eigs + 1) < t))))
    if len(set(counts)) != 1:
        raise ClusterError(
            f"defect eigenvalue count unstable across a tolerance decade around "
            f"{cluster_tol:g}: {counts}; refusing to classify"
        )
    n_plus, n_minus = counts[1]
    if n_plus != n_minus:
        raise SymmetryError(
            f"+1/-1 defect eigenspaces differ in dimension ({n_plus} vs {n_minus}); "
            "symmetry violated upstream"
        )

    mask_plus = np.abs(w_eigs - 1) < cluster_tol
    mask_minus = np.abs(w_eigs + 1) < cluster_tol
    mask_perp = ~(mask_plus | mask_minus)

    basis_plus = _deterministic_defect_basis(v_eigs[:, mask_plus])
    basis_minus = tilde(basis_plus)
    basis_perp = v_eigs[:, mask_perp]

    v_def, classification, rest_index = decoupler_on_defect(basis_plus, basis_minus, tilde)
    x = intertwiner(defects)
    v_off = decoupler_off_defect(x.matrix, basis_perp, cluster_tol)

    n = pair.dimension
    v_full = np.zeros((n, n), dtype=complex)
    if basis_plus.shape[1]:
        cols = np.column_stack([basis_plus, basis_minus])
        v_full += cols @ v_def @ dagger(cols)
    if basis_perp.shape[1]:
        v_full += basis_perp @ v_off @ dagger(basis_perp)
    v_op = UnitaryOperator(v_full, tol=1e-8)
    w_mat = v_full @ pair.u.matrix
    w_op = UnitaryOperator(w_mat, tol=1e-8)

    p = pair.p.matrix
    symm_res = frob(pair.tau.conjugate(w_mat) - dagger(w_mat))
    residuals = {"tau_w": symm_res}
    pi_plus = pi_minus = None
    if classification == "even":
        residuals["commutator"] = frob(commutator(w_mat, p))
        if residuals["commutator"] > CONTRACT_TOL:
            raise SymmetryError(
                f"even decoupling failed: ||[W, P]|| = {residuals['commutator']:.3e}"
            )
    else:
        phi = basis_plus[:, rest_index]
        phi_bar = basis_minus[:, rest_index]
        pi_plus = np.outer(phi, phi.conj())
        pi_minus = np.outer(phi_bar, phi_bar.conj())
        moved = w_mat @ p @ dagger(w_mat) - p
        residuals["residual_contract"] = frob(moved - (pi_plus - pi_minus))
        residuals["pi_plus_in_p_perp"] = frob(p @ pi_plus)
        residuals["pi_minus_in_p"] = frob((np.eye(n) - p) @ pi_minus)
        if residuals["residual_contract"] > CONTRACT_TOL:
            raise SymmetryError(
                f"odd-residual contract failed: {residuals['residual_contract']:.3e}"
            )
    if symm_res > CONTRACT_TOL:
        raise SymmetryError(f"||tau W tau* - W+|| = {symm_res:.3e}")

    u_mat = pair.u.matrix
    schatten = [
        (float(pq), schatten_norm(commutator(u_mat, p), pq),
         schatten_norm(u_mat - w_mat, pq))
        for pq in (1.0, 2.0)
    ]
    return DecouplingResult(
        w=w_op, v=v_op, classification=classification,
        pi_plus=pi_plus, pi_minus=pi_minus, chains=[],
        schatten_report=schatten, residuals=residuals,
        defect_dim=n_plus,
    )


def _deterministic_defect_basis(cols: np.ndarray) -> np.ndarray:
    """Fix order and phases of defect eigenvectors for reproducible output.

    Order: descending concentration sum |psi_i|^4, ties by original column.
    Phase: largest-magnitude entry rotated to the positive real axis.
    """
    if cols.shape[1] == 0:
        return cols
    conc = np.sum(np.abs(cols) ** 4, axis=0)
    order = np.argsort(-conc, kind="stable")
    out = cols[:, order].copy()
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        ph = out[k, j] / abs(out[k, j])
        out[:, j] = out[:, j] / ph
    return out


def _rank_one_vector(pi: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Unit vector spanning a rank-1 projection, deterministically phased."""
    pi = np.asarray(pi, dtype=complex)
    diag = np.abs(np.diag(pi))
    k = int(np.argmax(diag))
    vec = pi[:, k]
    nrm = np.linalg.norm(vec)
    if nrm < tol:
        raise ValueError("projection is numerically zero; no spanning vector")
    vec = vec / nrm
    if frob(pi - np.outer(vec, vec.conj())) > max(tol, 1e-7):
        raise ValueError("projection is not rank one")
    k = int(np.argmax(np.abs(vec)))
    return vec / (vec[k] / abs(vec[k]))


@dataclass
class ChainProjections:
    """Conjugated copies of the residual projections along powers of W."""

    plus_vectors: dict
    minus_vectors: dict
    requested_depth: int
    max_clean_depth: int
    worst_residual: float
    residuals: dict

    def projection(self, sign: str, k: int) -> np.ndarray:
        vec = (self.plus_vectors if sign == "+" else self.minus_vectors)[k]
        return np.outer(vec, vec.conj())


def chain_projections(w: np.ndarray, pi_plus: np.ndarray, pi_minus: np.ndarray,
                      p: np.ndarray, tau: AntiUnitary, depth: int,
                      tol: float = CONTRACT_TOL) -> ChainProjections:
    """Walk pi_plus forward and pi_minus backward under conjugation by W.

    With W P W* - P = pi_plus - pi_minus (at least locally), the conjugates
    pi_+^(k) = Ad_W^{k-1} pi_+ and pi_-^(k) = Ad_{W*}^k pi_- for k in
    [-depth, depth+1] must be mutually orthogonal, sit below P for k <= 0 and
    below 1-P for k >= 1, and be swapped pairwise by tau.  On a finite space
    the claims can only hold out to a maximal clean depth, which is reported.
    """
    w = np.asarray(w, dtype=complex)
    psi_plus = _rank_one_vector(pi_plus)
    psi_minus = _rank_one_vector(pi_minus)
    ks = list(range(-depth, depth + 2))

    plus = {1: psi_plus}
    for k in range(2, depth + 2):
        plus[k] = w @ plus[k - 1]
    for k in range(0, -depth - 1, -1):
        plus[k] = dagger(w) @ plus[k + 1]
    minus = {0: psi_minus}
    for k in range(1, depth + 2):
        minus[k] = dagger(w) @ minus[k - 1]
    for k in range(-1, -depth - 1, -1):
        minus[k] = w @ minus[k + 1]

    def _depth_of(k: int) -> int:
        return max(k - 1, -k)  # depth needed before index k enters the family

    worst_at = {}

    def _note(k_needed: int, value: float):
        worst_at[k_needed] = max(worst_at.get(k_needed, 0.0), value)

    # orthogonality of the whole family, tracked by the depth that exposes it
    vecs = [("+", k, plus[k]) for k in ks] + [("-", k, minus[k]) for k in ks]
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            si, ki, vi = vecs[i]
            sj, kj, vj = vecs[j]
            if si == sj and ki == kj:
                continue
            ov = abs(np.vdot(vi, vj))
            _note(max(_depth_of(ki), _depth_of(kj)), ov)
    # inclusions
    eye = np.eye(w.shape[0])
    for sign, k, vec in vecs:
        if k <= 0:
            _note(_depth_of(k), float(np.linalg.norm((eye - p) @ vec)))
        else:
            _note(_depth_of(k), float(np.linalg.norm(p @ vec)))
    # Kramers pairing tau pi_+^(k) tau* = pi_-^(k): |<tau psi_+, psi_->| = 1
    for k in ks:
        val = abs(np.vdot(tau(plus[k]), minus[k]))
        _note(_depth_of(k), abs(1.0 - val))

    max_clean = -1
    for kd in range(0, depth + 1):
        if max(worst_at.get(d, 0.0) for d in range(kd + 1)) <= tol:
            max_clean = kd
        else:
            break
    worst = max(worst_at.values()) if worst_at else 0.0
    return ChainProjections(
        plus_vectors=plus, minus_vectors=minus,
        requested_depth=depth, max_clean_depth=max_clean,
        worst_residual=worst, residuals=worst_at,
    )


@dataclass
class ShiftExtraction:
    phis: dict
    phi_bars: dict
    chain_basis: np.ndarray
    complement_basis: np.ndarray
    w_rest: np.ndarray
    p_rest: np.ndarray
    shift_residual: float
    orthonormality_residual: float
    rest_commutator: float
    max_clean_depth: int


def shift_extraction(w: np.ndarray, pi_plus: np.ndarray | None, tau: AntiUnitary,
                     p: np.ndarray, depth: int,
                     tol: float = CONTRACT_TOL) -> ShiftExtraction:
    """Extract the two opposite shift chains seeded by the residual projection.

    phi_1 spans pi_plus, phi_k = W^{k-1} phi_1 and phi_bar_k = tau phi_k; on
    the chains W acts as a right shift on the phis and a left shift on the
    phi_bars.  The compression of W to the complement of the chain space is
    returned with its commutator against the compressed P; that residual is
    only expected to vanish when the chains exhaust their shift block.
    """
    n = w.shape[0]
    if pi_plus is None:
        comp = np.eye(n, dtype=complex)
        return ShiftExtraction(
            phis={}, phi_bars={}, chain_basis=np.zeros((n, 0), dtype=complex),
            complement_basis=comp, w_rest=w.copy(), p_rest=p.copy(),
            shift_residual=0.0, orthonormality_residual=0.0,
            rest_commutator=frob(commutator(w, p)), max_clean_depth=depth,
        )
    phi1 = _rank_one_vector(pi_plus)
    ks = list(range(-depth, depth + 2))
    phis = {1: phi1}
    for k in range(2, depth + 2):
        phis[k] = w @ phis[k - 1]
    for k in range(0, -depth - 1, -1):
        phis[k] = dagger(w) @ phis[k + 1]
    phi_bars = {k: tau(phis[k]) for k in ks}

    # backward shift on the conjugate chain is the nontrivial relation
    shift_res = 0.0
    for k in ks:
        if k - 1 in phi_bars:
            shift_res = max(shift_res, float(np.linalg.norm(w @ phi_bars[k] - phi_bars[k - 1])))
    cols = np.column_stack([phis[k] for k in ks] + [phi_bars[k] for k in ks])
    gram = dagger(cols) @ cols
    ortho_res = frob(gram - np.eye(cols.shape[1]))

    max_clean = -1
    for kd in range(0, depth + 1):
        sub = [phis[k] for k in range(-kd, kd + 2)] + \
              [phi_bars[k] for k in range(-kd, kd + 2)]
        sub = np.column_stack(sub)
        g = dagger(sub) @ sub
        res = frob(g - np.eye(sub.shape[1]))
        sr = max(
            (float(np.linalg.norm(w @ phi_bars[k] - phi_bars[k - 1]))
             for k in range(-kd + 1, kd + 2)),
            default=0.0,
        )
        if max(res, sr) <= tol:
            max_clean = kd
        else:
            break

    comp = la_null_space(cols)
    w_rest = dagger(comp) @ w @ comp
    p_rest = dagger(comp) @ p @ comp
    rest_comm = frob(commutator(w_rest, p_rest))
    return ShiftExtraction(
        phis=phis, phi_bars=phi_bars, chain_basis=cols, complement_basis=comp,
        w_rest=w_rest, p_rest=p_rest, shift_residual=shift_res,
        orthonormality_residual=ortho_res, rest_commutator=rest_comm,
        max_clean_depth=max_clean,
    )


def la_null_space(cols: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span."""
    n = cols.shape[0]
    if cols.shape[1] == 0:
        return np.eye(n, dtype=complex)
    q, _ = np.linalg.qr(cols)
    proj = np.eye(n) - q @ dagger(q)
    u, s, _ = np.linalg.svd(proj)
    return u[:, s > 0.5]


def random_symmetric_pair(n: int, seed: int) -> SymmetricPair:
    """Seeded generator of valid pairs for property tests.

    U = exp(iM) with M Hermitian and tau-symmetric, P a spectral projection of
    an independent symmetric Hermitian with even rank; all pair constraints
    hold by construction.
    """
    if n % 2:
        raise SymmetryError(f"need even dimension, got {n}")
    rng = np.random.default_rng(seed)
    tau = standard_odd_time_reversal(n)

    def symmetric_hermitian():
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        g = 0.5 * (g + dagger(g))
        return 0.5 * (g + tau.conjugate(g))

    m = symmetric_hermitian()
    u = UnitaryOperator(la_expm_herm(m))
    h2 = SpectralDecomposition.from_hermitian(symmetric_hermitian())
    rank = 2 * max(1, int(round(n / 4)))
    cols = h2.eigenvectors[:, :rank]
    p = ProjectionOperator(cols @ dagger(cols))
    return SymmetricPair(u, p, tau)


def la_expm_herm(m: np.ndarray) -> np.ndarray:
    """exp(i M) for Hermitian M via the spectral theorem."""
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return (v * np.exp(1j * w)) @ dagger(v)


def _spin_ring_shift(n_sites: int) -> np.ndarray:
    """Right shift on even (spin-up) coordinates, left shift on odd ones."""
    dim = 2 * n_sites
    s = np.zeros((dim, dim), dtype=complex)
    for x in range(n_sites):
        s[2 * ((x + 1) % n_sites), 2 * x] = 1.0
        s[2 * ((x - 1) % n_sites) + 1, 2 * x + 1] = 1.0
    return s


def ring_shift_pair(n_sites: int, arc: int) -> SymmetricPair:
    """Canonical test pair: opposite shifts on a spin ring, arc projection.

    Hilbert space dimension 2*n_sites with basis (site, spin); U shifts spin
    up right and spin down left with periodic wrap, P covers sites 0..arc on
    both spins.  The defect operator has exact eigenvalues {+1, +1, -1, -1}
    localized at the two arc endpoints and zeros elsewhere.
    """
    if not 0 <= arc < n_sites - 1:
        raise ValueError(f"arc must satisfy 0 <= arc < n_sites - 1, got {arc}")
    dim = 2 * n_sites
    u = UnitaryOperator(_spin_ring_shift(n_sites))
    diag = np.zeros(dim)
    for x in range(arc + 1):
        diag[2 * x] = diag[2 * x + 1] = 1.0
    p = ProjectionOperator(np.diag(diag).astype(complex))
    tau = standard_odd_time_reversal(dim)
    return SymmetricPair(u, p, tau)


def seam_shift_inputs(n_sites: int):
    """Synthetic odd-case inputs: ring shift with seam-localized residuals.

    Returns (w, pi_plus, pi_minus, p, tau).  P covers the arc of sites
    {-J..0} (mod n_sites) with J = n_sites//2 - 1, so W P W* - P equals
    pi_plus - pi_minus near the seam between sites 0 and 1, with the
    compensating defect a half-ring away.  Claims about the chains are then
    exact for depths below ~n_sites/4.
    """
    w = _spin_ring_shift(n_sites)
    dim = 2 * n_sites
    tau = standard_odd_time_reversal(dim)
    j = n_sites // 2 - 1
    diag = np.zeros(dim)
    for x in range(-j, 1):
        site = x % n_sites
        diag[2 * site] = diag[2 * site + 1] = 1.0
    p = np.diag(diag).astype(complex)
    pi_plus = np.zeros((dim, dim), dtype=complex)
    pi_plus[2 * 1, 2 * 1] = 1.0            # |site 1, up>
    pi_minus = np.zeros((dim, dim), dtype=complex)
    pi_minus[1, 1] = 1.0                   # |site 0, down>
    return w, pi_plus, pi_minus, p, tau


def shift_plus_trivial_inputs(chain_sites: int, trivial_pairs: int, seed: int = 7):
    """Shift ring plus a commuting block, for exact full-depth extraction.

    With extraction depth chain_sites//2 - 1 the chains cover the whole ring,
    the complement is exactly the trivial block, and the compressed
    commutator [W'', P''] vanishes identically.
    """
    if chain_sites % 2:
        raise ValueError("chain_sites must be even")
    rng = np.random.default_rng(seed)
    w_ring = _spin_ring_shift(chain_sites)
    dim_ring = 2 * chain_sites
    j = chain_sites // 2 - 1
    diag = np.zeros(dim_ring)
    for x in range(-j, 1):
        site = x % chain_sites
        diag[2 * site] = diag[2 * site + 1] = 1.0
    p_ring = np.diag(diag).astype(complex)

    dim_triv = 2 * trivial_pairs
    phases = np.repeat(np.exp(1j * rng.uniform(0, 2 * np.pi, trivial_pairs)), 2)
    w_triv = np.diag(phases)
    occ = np.repeat(rng.integers(0, 2, trivial_pairs).astype(float), 2)
    p_triv = np.diag(occ).astype(complex)

    w = np.block([
        [w_ring, np.zeros((dim_ring, dim_triv))],
        [np.zeros((dim_triv, dim_ring)), w_triv],
    ])
    p = np.block([
        [p_ring, np.zeros((dim_ring, dim_triv))],
        [np.zeros((dim_triv, dim_ring)), p_triv],
    ])
    tau = standard_odd_time_reversal(dim_ring + dim_triv)
    pi_plus = np.zeros_like(w)
    pi_plus[2, 2] = 1.0
    pi_minus = np.zeros_like(w)
    pi_minus[1, 1] = 1.0
    return w, pi_plus, pi_minus, p, tau
