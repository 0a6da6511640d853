"""Graph energy, vertex energy and the cooperative energy game on induced subgraphs."""

__version__ = "0.1.0"

from .bounds import BoundId, BoundReport, is_bipartite, run_all_bounds
from .game import (
    CoalitionTable,
    CoreCertificate,
    audit_convexity,
    audit_superadditivity,
    build_table,
    check_core,
    check_imputation,
    marginal_contribution_check,
    null_and_symmetry_classify,
    shapley_exact,
    shapley_monte_carlo,
    solve_game,
)
from .graph import (
    Graph,
    GraphFormatError,
    SizeCapError,
    complete,
    complete_bipartite,
    cycle,
    encode_graph6,
    enumerate_labeled_graphs,
    enumerate_labeled_trees,
    induced,
    parse_edge_list,
    parse_graph6,
    path,
    star,
)
from .spectral import (
    EnergyProfile,
    Spectrum,
    eig_symmetric,
    energy,
    matrix_abs_pow,
    p_energy,
    vertex_energies,
)
