"""Entropy production for qubits under non-Markovian dynamical maps.

Three model families are provided: a thermal qubit with a time-dependent
damping rate (:mod:`nmthermo.damping_map`), a time-parametrized generalized
amplitude damping channel (:mod:`nmthermo.gad_map`) and a dephasing qubit
coupled to a bosonic bath (:mod:`nmthermo.dephasing`).
"""

from .errors import (
    BlochOutOfBall,
    GridTooCoarse,
    InfiniteRelativeEntropy,
    IntegrandDivergence,
    MaxSubdivisions,
    NumericalError,
    ParameterOutOfRange,
    PureStateSingularity,
    ScheduleOutOfRange,
    SingularMap,
    SingularRate,
    StepUnderflow,
    ValidationError,
)
from .qstate import (
    GibbsSpec,
    QubitState,
    gibbs_state,
    relative_entropy,
    relative_entropy_to_gibbs,
    state_from_bloch,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "BlochOutOfBall",
    "GibbsSpec",
    "GridTooCoarse",
    "InfiniteRelativeEntropy",
    "IntegrandDivergence",
    "MaxSubdivisions",
    "NumericalError",
    "ParameterOutOfRange",
    "PureStateSingularity",
    "QubitState",
    "ScheduleOutOfRange",
    "SingularMap",
    "SingularRate",
    "StepUnderflow",
    "ValidationError",
    "gibbs_state",
    "relative_entropy",
    "relative_entropy_to_gibbs",
    "state_from_bloch",
    "von_neumann_entropy",
]
