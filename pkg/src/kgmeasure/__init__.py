"""Lattice Klein-Gordon toolkit for causal structure and local measurement schemes.

The package is organized in layers:

- :mod:`kgmeasure.lattice` -- finite spacetime grids, causal cones and regions
- :mod:`kgmeasure.fields` -- test functions, retarded/advanced solvers and the
  commutator pairing E(f, g)
- :mod:`kgmeasure.weyl` -- Weyl generators, Gaussian states and moments
- :mod:`kgmeasure.scattering` -- coupled system/probe dynamics and induced
  observables
- :mod:`kgmeasure.sorkin` -- the naive-kick signaling gap and its geometry
- :mod:`kgmeasure.instruments` -- effects, pre-instruments, state updates and
  multi-probe composition
- :mod:`kgmeasure.verify` -- randomized verification suites behind the CLI
"""

from .errors import (
    CompositionError,
    ConditioningError,
    ConfigError,
    GeometryError,
    KGMeasureError,
    SectorError,
    SolverError,
)
from .fields import FieldParams, TestFunction, advanced, commutator_form, retarded
from .instruments import (
    PreInstrument,
    ProbeSetting,
    compose_probes,
    compose_probes_joint,
    cosine_effect,
    impossible_measurement_test,
    nonselective_update,
    selective_update,
    signaling_contrast,
)
from .lattice import (
    CouplingZone,
    LatticeSpec,
    Region,
    causal_future,
    causal_past,
    causally_disjoint,
    precedes,
)
from .scattering import (
    CouplingProfile,
    ScatteringMap,
    induced_observable,
    scattering_map,
    scattering_map_multi,
)
from .sorkin import SorkinConfig, find_signaling_g, signaling_gap_green
from .weyl import (
    AlgebraElement,
    CompositeSpace,
    PhaseSpace,
    QuasiFreeState,
    StateFunctional,
    evaluate,
    field_moment,
    product_state,
    vacuum_state,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "CompositeSpace",
    "CompositionError",
    "ConditioningError",
    "ConfigError",
    "CouplingProfile",
    "CouplingZone",
    "FieldParams",
    "GeometryError",
    "KGMeasureError",
    "LatticeSpec",
    "PhaseSpace",
    "PreInstrument",
    "ProbeSetting",
    "QuasiFreeState",
    "Region",
    "ScatteringMap",
    "SectorError",
    "SolverError",
    "SorkinConfig",
    "StateFunctional",
    "TestFunction",
    "advanced",
    "causal_future",
    "causal_past",
    "causally_disjoint",
    "commutator_form",
    "compose_probes",
    "compose_probes_joint",
    "cosine_effect",
    "evaluate",
    "field_moment",
    "find_signaling_g",
    "impossible_measurement_test",
    "induced_observable",
    "nonselective_update",
    "precedes",
    "product_state",
    "retarded",
    "scattering_map",
    "scattering_map_multi",
    "selective_update",
    "signaling_contrast",
    "signaling_gap_green",
    "vacuum_state",
]
