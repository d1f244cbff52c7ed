"""Erasure-channel simulation of surface and hypergraph-product codes
under multiplexed photon loss."""

from .assignments import (
    ConfigurationError,
    PhotonAssignment,
    assign,
    assign_hgp,
    assign_surface,
    diagonal_order,
    validate,
)
from .channel import ChannelConfig, ErasurePattern, PauliFrame, erasure_to_pauli, sample_loss, syndrome
from .codes import (
    CodeConstructionError,
    CssCode,
    HgpMeta,
    UnsupportedCodeError,
    hgp,
    hgp_coord,
    logical_basis,
    toric,
    toric_edge_coord,
)
from .decoders import (
    DECODERS,
    ClassicalStoppingSet,
    DecodeOutcome,
    combined_decode,
    erasure_covers_logical,
    find_erased_stabilizer,
    ml_oracle_decode,
    peel,
    pruned_peel,
    spanning_forest,
    surface_ml_decode,
    vh_decode,
    vh_partition,
)
from .gf2 import BinaryMatrix, BitVector, nullspace_basis, rank, restrict_columns, row_reduce, solve
from .montecarlo import (
    Estimate,
    PointResult,
    SweepConfig,
    TrialOutcome,
    TrialStatus,
    agresti_coull,
    logical_z_error,
    run_trial,
    sweep,
    trial_rng,
)
from .specs import CodeSpec, parse_code_spec

__version__ = "0.1.0"
