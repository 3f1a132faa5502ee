"""Exact and empirical load thresholds for k-ary cuckoo hashing."""

from .analytic import (ThresholdSolution, core_fractions, h_beta, f_beta_q, lambda2,
                       largest_fixed_point_xbar, rate_I, solve_xi_star, threshold_c_star)
from .cuckoo_table import CuckooTable, build_offline
from .hypergraph import (CoreSubgraph, DegreeSequence, Hypergraph, gen_binomial, gen_multigraph,
                         gen_poisson_cloning, gen_simple, gen_truncated_core_model, peel_core)
from .orientation import Assignment, brute_force_dense_subset, is_orientable, max_matching

__version__ = "0.1.0"
