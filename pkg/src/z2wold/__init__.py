"""Z2 parity indices of 2D time-reversal-invariant lattice insulators,
symmetry-constrained Wold-type decoupling, and edge-spectrum diagnostics."""

__version__ = "0.1.0"

from .operators import (
    AntiUnitary,
    HermitianOperator,
    ProjectionOperator,
    SpectralDecomposition,
    UnitaryOperator,
    conjugate_by_antiunitary,
    eigen_cluster,
    functional_calculus,
    kramers_basis,
    schatten_norm,
    standard_odd_time_reversal,
    unitary_part,
)
from .lattice import (
    LatticeGeometry,
    ModelSpec,
    build_bulk_hamiltonian,
    build_half_space_hamiltonian,
    build_time_reversal,
    spectral_gap,
    verify_locality,
    verify_trs,
)
from .bulk import bulk_index, chern_block_oracle, fermi_projection, flux_unitary
from .edge import edge_index, edge_unitary, fredholm_cross_check, make_gap_function, \
    quadrant_projection
from .wold import (
    DecouplingResult,
    SymmetricPair,
    chain_projections,
    decouple,
    defect_operators,
    random_symmetric_pair,
    ring_shift_pair,
    shift_extraction,
)
from .diagnostics import ballistic_transport, cylinder_bands, gap_filling_fraction
from .reporting import IndexReport, IndexSettings
from .pipeline import compare_bulk_edge, run_bulk, run_edge, scan_rows
