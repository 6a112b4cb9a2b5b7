"""Two-class corporate failure discrimination toolkit.

Utility-based hierarchical discrimination models fitted by an LP/MIP/LP
cascade, an outranking benchmark classification with simulated criterion
weights, predictor screening, and a cross-validated evaluation sweep.
"""

from .dataset import (
    CriterionSpec,
    CompanyRecord,
    PanelDataset,
    PerformanceMatrix,
    align_directions,
    build_matrix,
    iqr_trim,
    load_dataset,
)
from .metrics import ConfusionMatrix, MetricsReport, confusion, metrics
from .mhdis import MhdisConfig, MhdisModel, UtilityPair, classify, fit, fit_stage
from .pairs import PairCombination, generate_pairs
from .promethee import (
    KINDS,
    NetFlowTable,
    ThresholdSet,
    majority_vote,
    median_cut,
    net_flows,
    pairwise_pi,
    preference_degree,
    run_promethee,
)
from .sampling import FoldPlan, StratifiedPlan, kfold_split, sample_weights, stratified_resample
from .screening import information_value, pearson, run_screening, t_test, woe
from .solver import LinearProgram, MixedBinaryProgram, Solution, solve_lp, solve_mip
from .sweep import SweepConfig, SweepResult, run_sweep
from .synthetic import gen_synthetic

__version__ = "0.1.0"
