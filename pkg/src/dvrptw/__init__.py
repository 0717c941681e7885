"""Vehicle routing with time windows and en-route request disclosure.

A single-colony ant system plans over a working day cut into time slices:
begun visits freeze, newly disclosed customers are inserted, and the
pheromone trail carries over between restarts.  See the README for the
benchmark harness.
"""

from .acs_engine import (AcsParams, Colony, ColonyResult, PheromoneState,
                         build_candidate_lists, construct_ant_solution,
                         global_pheromone_update, init_pheromone,
                         joint_transition, local_pheromone_update,
                         preserve_pheromone, run_colony, transition_weights)
from .bench import (AggregateStats, RunReport, aggregate, emit_csv,
                    emit_table, load_instance, parse_csv, rank_sum_test,
                    run_batch)
from .construction import (InfeasibleCustomerError, InsertionWeights,
                           NnWeights, closeness_metric, i1_insertion,
                           nearest_neighbour_solution, nn_tours)
from .instance_io import (Customer, DynamicityProfile, FormatError,
                          ProblemInstance, dynamicity_from_name,
                          generate_available_times, make_dynamic_variant,
                          parse_instance, parse_sidecar, scale_instance,
                          serialize_instance, serialize_sidecar,
                          unscale_instance, with_available_times)
from .local_search import (MoveRecord, exchange_move, iterate_local_search,
                           relocate_move)
from .planner import (VIRTUAL, WALL, DayResult, EventRecord, PlannerConfig,
                      PlannerState, commitment_sweep, initialize_day,
                      reveal_and_repair, run_working_day, serialize_events)
from .routing_model import (ScheduleEval, Solution, SolutionEval, Tour,
                            arrays_to_solution, audit_solution,
                            commit_prefix, committed_prefixes,
                            compare_solutions, evaluate_schedule,
                            evaluate_solution, is_feasible_insertion,
                            parse_solution, serialize_solution,
                            solution_to_arrays)

__version__ = "0.1.0"
