"""pairsqueeze: two-mode squeezing of paired ladder systems.

Tools for building generalized ladder systems (spins, truncated bosons,
photon-pair ladders, custom), preparing and characterizing two-mode squeezed
paired states, quantum Fisher-information analysis, engineered dissipative
stabilization, and cumulant mean-field dynamics of large spin ensembles.
"""

from __future__ import annotations

from .ladders import (
    BipartiteOperator,
    LadderSpec,
    LocalOperator,
    boson_ladder,
    custom_ladder,
    embed,
    joint_quadratures,
    ladder_from_json,
    ladder_to_json,
    lowering_operator,
    make_ladder,
    quadrature_set,
    spin_ladder,
    two_photon_ladder,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteOperator",
    "LadderSpec",
    "LocalOperator",
    "boson_ladder",
    "custom_ladder",
    "embed",
    "joint_quadratures",
    "ladder_from_json",
    "ladder_to_json",
    "lowering_operator",
    "make_ladder",
    "quadrature_set",
    "spin_ladder",
    "two_photon_ladder",
    "__version__",
]
