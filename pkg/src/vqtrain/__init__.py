"""Layer-wise variational compilation of multi-controlled gates with dense simulation."""

from .ansatz import AnsatzKind, AnsatzLayout, checkerboard, checkerboard_layer, hea, hea_layer, stack_unitary
from .cost import SingularOverlapError, circuit_distance, distance, distance_gradient, distance_hessian_diag
from .linalg import TargetGate, make_target, toffoli
from .trainer import (
    InitMode,
    OptimizerSettings,
    StackSchedule,
    TrainRecord,
    detect_identity_stall,
    find_critical_depth,
    train_layerwise,
    train_stack,
)
from .variety import Branch, Verdict, sample_variety, verify_extremum

__version__ = "0.1.0"
