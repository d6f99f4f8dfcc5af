"""Exact algorithms for projective modules over idempotent semirings.

The layers, bottom up: ordered groups, rational polyhedra and CPA functions
(:mod:`.ordered_algebra`); finite join semilattices (:mod:`.semilattice`);
quiver-presented po-modules (:mod:`.quiver`); weight polyhedra
(:mod:`.weight_polyhedra`); convex families over a base
(:mod:`.cpa_families`); certificates and the command line
(:mod:`.certify`, :mod:`.cli`).
"""

from .verdict import Verdict

__all__ = ["Verdict"]
__version__ = "0.1.0"
