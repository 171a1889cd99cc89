"""Low-recourse spanning trees over online metric arrivals."""
from .clustering import ClusterHistory, PhaseClustering, merge_phase, rank_of, run_clustering
from .instances import (GraphInstance, InstanceSpec, gen_euclidean, gen_graph, gen_spider,
                        graph_closure, rescale)
from .maintainers import (ConstantSwaps, DeltaSwaps, GreedyBudget, MaintainerConfig, RoundReport,
                          SingleSwap, find_improving_swap, make_maintainer, run_instance,
                          run_lockstep)
from .metric import OnlineMetric
from .numeric import INF
from .oracle import (check_dual_feasible, dual_lower_bound, f_potential, lineage_ratio, mst_cost,
                     steiner_opt)
from .ranks import (build_pending, check_admissible, update_virtual, update_virtual_kstep,
                    weight)
from .tree import (LeveledEdge, LeveledTree, SwapTrace, attach_new_vertex, check_valid, cost,
                   decrement_head)

__version__ = "0.1.0"
