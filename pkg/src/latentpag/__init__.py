"""Learning partial ancestral graphs with FCI-family algorithms and RFCI."""

from .fci import Conservative, FciConfig, PdsMode, final_skeleton, orient_v_structures, possible_d_sep, pds_path, run_fci
from .graph import (
    ARROW,
    CIRCLE,
    TAIL,
    EdgeMark,
    LatentDag,
    MixedGraph,
    Role,
    adjacency,
    ancestors,
    biconnected_components,
    dag_to_mag,
    inducing_path_exists,
    m_separated,
)
from .independence import CachedCi, CiSource, DsepOracle, GaussianTester, partial_correlation
from .orientation import zhang_orientation_rules
from .report import RunReport
from .rfci import run_rfci
from .skeleton import SepsetStore, initial_skeleton

__all__ = [
    "ARROW", "CIRCLE", "TAIL", "CachedCi", "CiSource", "Conservative", "DsepOracle", "EdgeMark",
    "FciConfig", "GaussianTester", "LatentDag", "MixedGraph", "PdsMode", "Role", "RunReport",
    "SepsetStore", "adjacency", "ancestors", "biconnected_components", "dag_to_mag",
    "final_skeleton", "inducing_path_exists", "initial_skeleton", "m_separated",
    "orient_v_structures", "partial_correlation", "pds_path", "possible_d_sep", "run_fci",
    "run_rfci", "zhang_orientation_rules",
]

__version__ = "0.1.0"
