"""Process-tensor matrix-product-state simulation of open quantum systems.

A system coupled linearly to a Gaussian bosonic bath is described by its
process tensor: the bath influence on every time slot, compressed into a
matrix-product state.  The package builds it from a bath description and
contracts it with system propagators to obtain trajectories and multi-time
correlators.
"""

__version__ = "0.1.0"

from .errors import (
    ArgumentError,
    ConfigError,
    DimensionError,
    FormatError,
    ModelError,
    NumericError,
    PTError,
    TailMassWarning,
)
from .tensor_core import SvdTruncation, contract, permute, svd_split, truncated_svd
from .bath import BathSpec, EtaTable, correlation, discretize_continuum, eta_table, spectral_density
from .pt_build import (
    InfluenceGate,
    ProcessTensorMPS,
    SystemCoupling,
    b_factor,
    bond_profile,
    build_finite,
    build_tti,
    dense_pt,
    influence_gate,
    trace_cap,
)
from .dynamics import (
    Propagator,
    SlotIntervention,
    SystemModel,
    Trajectory,
    correlator,
    correlator_grid,
    density_matrix,
    expectation,
    make_propagator,
    propagate,
    propagate_batch,
    superop_left,
    superop_right,
    superop_unitary,
    vectorize,
)

from .ttm import (
    DynamicalMapSet,
    TransferTensorSet,
    extract_maps,
    hermitian_basis,
    reconstruction_residual,
    transfer_tensors,
    ttm_propagate,
)
from .oracle import EdModel, dense_contract, ed_energy, ed_evolve, occupancy_tail
from .fileio import load_ptmp1, loads_ptmp1, dumps_ptmp1, save_ptmp1, write_csv
