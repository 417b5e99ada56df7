"""Clustering individuals whose features are known only up to an uncertainty set."""

from .baselines import (
    SimilarityMatrix,
    affinity_propagation,
    baseline_cluster,
    discrepancy_matrix,
    representative_vectors,
)
from .datagen import GenConfig, generate_dataset, toy_transform
from .goc import GocConfig, count_nonsingleton, cluster_centers, goc_objective, run_goc, run_gpc, update_candidates
from .metrics import contingency, eta_scores, f_measure, nmi
from .oracles import OracleConfig, gmm_bic_select, oracle_cluster
from .types import Assignment, CovariateUncertaintyModel, Dataset, EmpiricalFeatureSet, GocTrace, validate_dataset
from .uncertainty import Transform, build_empirical_set, coverage_gap, sample_covariates, standardize

__version__ = "0.1.0"
