"""Shooting-method construction of the localized ground state of the
two-dimensional focusing cubic Dirac equation, with the blow-up rescaling
analysis and remainder estimates exposed as testable operations."""

from .asymptotics import (
    BubbleProfile,
    EpsilonStudy,
    FirstOrderSamples,
    LogLawFit,
    PerturbationRecord,
    bubble,
    bubble_profile,
    bubble_residual,
    convergence_study,
    first_order_log_fit,
    integrate_first_order,
    integrate_remainder,
    integrate_rescaled,
    node_radius,
)
from .equations import (
    equilibria,
    hamiltonian,
    hamiltonian_rate,
    r2h_rate,
    rescaled_hamiltonian,
    rhs_autonomous,
    rhs_radial,
    rhs_shifted,
    taylor_start,
)
from .integrator import (
    Autonomous,
    Detector,
    Event,
    EventKind,
    IntegrationError,
    Radial,
    Shifted,
    Trajectory,
    integrate,
    solve,
)
from .params import Params, Tolerances
from .phaseflow import (
    AttractionReport,
    LevelSet,
    attraction_report,
    level_set,
    stability_compare,
)
from .shooting import (
    Bracket,
    BracketError,
    Certificate,
    Classification,
    GroundState,
    bisect,
    bracket_search,
    certificate_check,
    classify,
    decay_fit,
    extend_with_decay_tail,
    ground_state,
    universal_constant,
)

__all__ = [
    "Autonomous",
    "AttractionReport",
    "Bracket",
    "BracketError",
    "BubbleProfile",
    "Certificate",
    "Classification",
    "Detector",
    "EpsilonStudy",
    "Event",
    "EventKind",
    "FirstOrderSamples",
    "GroundState",
    "IntegrationError",
    "LevelSet",
    "LogLawFit",
    "Params",
    "PerturbationRecord",
    "Radial",
    "Shifted",
    "Tolerances",
    "Trajectory",
    "attraction_report",
    "bisect",
    "bracket_search",
    "bubble",
    "bubble_profile",
    "bubble_residual",
    "certificate_check",
    "classify",
    "convergence_study",
    "decay_fit",
    "equilibria",
    "extend_with_decay_tail",
    "first_order_log_fit",
    "ground_state",
    "hamiltonian",
    "hamiltonian_rate",
    "integrate",
    "integrate_first_order",
    "integrate_remainder",
    "integrate_rescaled",
    "level_set",
    "node_radius",
    "r2h_rate",
    "rescaled_hamiltonian",
    "rhs_autonomous",
    "rhs_radial",
    "rhs_shifted",
    "solve",
    "stability_compare",
    "taylor_start",
    "universal_constant",
]

__version__ = "0.1.0"
