"""Schelling segregation engines on lollipop networks, with exact oracles and scaling tools."""
__version__ = "0.1.0"

from .core import (A, B, VACANT, Configuration, Outcome, SchellingParams, SimOutcome, Threshold,
                   place_agents, unhappy_vertices)
from .count_first import decide_clique, simulate_lollipop_count_first, simulate_path
from .oracle import exact_expected_moves
from .topology import (LollipopSpec, ResourceCapError, Topology, build_clique, build_grid,
                       build_hypercube, build_lollipop, build_path, build_welded_tree)
from .traditional import simulate_traditional
