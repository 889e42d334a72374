"""Adaptively weighted nearest-neighbor matrix completion."""

from .baselines import RowNNConfig, UsvtConfig, rownn_impute, rownn_tune, usvt_impute
from .distance import DistanceTable, build_distance_table, raw_row_distance
from .estimator import (EstimatorConfig, ImputationResult, audit_lemma4, awnn_fit,
                        oracle_awnn_fit, row_imputer)
from .experiments import BenchSpec, ExperimentResult, fit_slope, mse, run_bench
from .matrix import DenseMatrix, MaskedMatrix, load_csv, observed_fraction, save_csv
from .simplex import (WeightSolution, qp_oracle, solve_weights, solve_weights_degenerate,
                      weight_adjuster)
from .synthetic import SyntheticInstance, SyntheticSpec, calibrate_noise, generate, holder_f

__version__ = "0.1.0"
