"""Space-inhomogeneous two-state quantum walks with uniform stationary measures."""

from .coin import (
    CoinMatrix,
    CoinSequence,
    CPhiParams,
    build_coin,
    cphi_coin_at,
    detect_period,
    omega_at,
    split_coin,
)
from .errors import DomainError, IllConditionedWarning
from .evolve import EvolutionOperator, dense_cycle_operator, iterate, step
from .rw import (
    DichotomyRow,
    HoppingSequence,
    WitnessReport,
    dichotomy_table,
    rw_step,
    uniform_stationarity_witness,
)
from .state import Measure, SpinorField, gamma_measure, scale, uniformity_defect
from .topology import Cycle, Line, TopologyError
from .transfer import (
    TransferMatrix,
    alpha_at,
    build_eigenstate,
    cphi_transfer_minus,
    cphi_transfer_plus,
    cycle_product,
    eigen_residual,
    normalize_lambda,
    transfer_minus,
    transfer_plus,
)

__version__ = "0.1.0"
