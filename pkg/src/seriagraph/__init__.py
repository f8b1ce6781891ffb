"""Deterministic frequency seriation: counting, enumeration and multi-group search."""
from .combinatorics import (ComputeBudget, TimeEstimate, all_partitions_count, estimate_time,
                            factorial, format_count, stirling2, stirling_row_argmax,
                            total_multigroup_solutions, unique_seriation_count)
from .enumeration import (EnumerationRequest, EnumerationResult, FeasibilityRefused,
                          canonical_permutations, feasibility_report, solve_single)
from .model import (AssemblageMatrix, EvaluationReport, InstanceInvalid, Ordering,
                    UnimodalityCriterion, canonicalize, evaluate_ordering, frequencies,
                    is_unimodal)
from .multigroup import (GroupedSolution, MultigroupConstraints, Partition, ScaleRefused,
                         enumerate_all_partitions, enumerate_partitions, solve_agglomerative,
                         solve_exact)

__version__ = "0.1.0"
