"""Reconstruction of a hidden graph from edge-detecting subset queries.

A query names a vertex subset; the oracle answers YES exactly when some
edge of the hidden graph lies fully inside it.  The package provides a
round-enforcing, query-counting oracle simulator, the randomized and
deterministic reconstruction algorithms for known and unknown edge
counts, the deterministic combinatorial constructions they need, and an
experiment harness with a CLI.
"""

from .candidates import CandidateEdgeSet
from .config import DEFAULTS, Constants
from .curves import ExactNoRateCurve, p_star, p_u
from .detcodes import (DisjunctMatrix, OneOrCode, PartitionMatrix,
                       QueryFamily, build_disjunct_matrix, build_one_or_code,
                       build_pair_cover_family, build_partition_matrix,
                       decode_one_or, find_verified_family,
                       sample_two_round_family, verify_covering)
from .deterministic import (adaptive_exhaustive_learn,
                            five_round_deterministic, nonadaptive_fallback,
                            two_round_deterministic)
from .elimination import (EliminationParams, LearnResult, elimination_round,
                          elimination_schedule_size, las_vegas_two_round,
                          non_adaptive_mc)
from .errors import (ContractViolation, DetectedFailure, EdgeProbeError,
                     InfeasibleError, ParameterError)
from .estimate import (estimate, estimate_degree, k_estimate,
                       k_estimate_degree, log_star)
from .experiments import (ALGORITHMS, ExperimentPlan, RunStats,
                          brute_force_learn, run, wilson_interval)
from .generators import InstanceSpec, generate
from .graphs import HiddenGraph, bitset, bits, read_graph, write_graph
from .largen import (partition_vertices, three_round_lv_large_n,
                     two_round_large_n)
from .multiround import (learn_neighbors_in_independent_set, lv_four_round,
                         lv_three_round, three_round_mc, two_round_mc)
from .oracle import OracleSession, Transcript, answer_query
from .randomness import (PRandomSchedule, SeedPair, derive_stream,
                         draw_p_random, repetitions)
from .structure import Threshold, classify_structure
from .unknownm import find_edges, pipeline_unknown_m, split

__version__ = "0.1.0"
