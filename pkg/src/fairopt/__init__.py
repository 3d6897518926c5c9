"""Convex fairness measures for optimization.

Evaluation of deviation-type and order-based fairness measures, their
dual-set representations, LP/MILP reformulations of fairness-promoting
problems, a column-and-constraint generation solver, measure-equivalence
checking, and Hausdorff-distance stability analysis.
"""

from .measures import (
    GINI_DEVIATION,
    MAD,
    MAX_MAD,
    MAX_PAIRWISE_DEVIATION,
    MAX_SUM_PAIRWISE_DEVIATION,
    RANGE,
    RAWLSIAN_GAP,
    STD_DEV,
    SUM_MAX_PAIRWISE_DEVIATION,
    TABLE_KINDS,
    MeasureKind,
    WeightVector,
    envy,
    eval_closed_form,
    eval_order_based,
    eval_relative,
    measure_wmax,
    order_based,
    validate_weight,
)
from .dualsets import DualSet, check_equivalent, dual_set_of, hausdorff, support_value, vertices
from .reform import LinearModel, ProblemInstance
from .solver import CcgReport, SolveLimits, ccg_constraint, ccg_objective, solve
from .models import AllocationInstance, FacilityInstance, build_flp, build_ra
from .stability import StabilityConfig, run_stability_experiment, stability_bound

__version__ = "0.1.0"
