"""PC-trees: sets of circular leaf orders under consecutivity constraints.

The package provides the tree itself (:mod:`pctree.core`), the
restriction-update algorithm (:mod:`pctree.restrict`), a brute-force
order-set oracle for small instances (:mod:`pctree.oracle`), text formats
(:mod:`pctree.formats`), a vertex-addition planarity test built on the
tree (:mod:`pctree.planarity`) and a command-line interface
(:mod:`pctree.cli`).
"""

from .core import (
    C_NODE,
    EMPTY,
    FULL,
    LEAF,
    NO_NODE,
    P_NODE,
    PARTIAL,
    InvalidCountError,
    NoPendingRestrictionError,
    PCTree,
    PCTreeError,
    UnionFind,
    UnknownLeafError,
    validate_structure,
)
from .restrict import (
    RestrictionOutcome,
    RestrictionStats,
    TerminalPath,
    apply_update,
    find_terminal_path,
    label_nodes,
    make_consecutive,
    replace_leaves,
)

__all__ = [
    "PCTree",
    "UnionFind",
    "PCTreeError",
    "UnknownLeafError",
    "NoPendingRestrictionError",
    "InvalidCountError",
    "RestrictionOutcome",
    "RestrictionStats",
    "TerminalPath",
    "make_consecutive",
    "replace_leaves",
    "label_nodes",
    "find_terminal_path",
    "apply_update",
    "validate_structure",
    "LEAF",
    "P_NODE",
    "C_NODE",
    "EMPTY",
    "PARTIAL",
    "FULL",
    "NO_NODE",
]

__version__ = "0.1.0"
