"""Trajectory-level simulation of quantum measurement in pilot-wave dynamics.

The package follows individual system-pointer configurations guided by an
entangled wave field through an impulsive measurement coupling: wave fields
(``wavefield``), guidance velocities (``guidance``), trajectory integration
and outcome detection (``dynamics``), Born-distributed ensembles and their
statistics (``ensemble``), canned measurement experiments (``experiments``),
and a command-line runner (``cli``).
"""

__version__ = "0.1.0"

from .wavefield import (
    PhysicalParams,
    GaussianDevicePacket,
    MomentumSuperposition,
    ConfigPoint,
    BeableState,
    packet_eval,
    packet_log_deriv,
    correlation_phase,
    eval_psi_momentum,
    eval_density,
    density_peak,
    regularized_delta_spectrum,
)
from .guidance import (
    VelocityPair,
    NodeError,
    default_node_threshold,
    velocity_momentum,
    velocity_coordinate,
    velocity_fd_oracle,
    momentum_field,
    coordinate_field,
    quantum_potential,
    classical_velocity,
)
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    InvalidStartError,
    DegenerateValuesError,
    ProjectiveValidity,
    momentum_gap,
    decoherence_time,
    projective_validity,
    default_config,
    integrate_ensemble,
    integrate_trajectory,
    detect_outcome,
)
from .ensemble import (
    RNG_ALGORITHM,
    ZeroMassError,
    InsufficientGroupError,
    EnsembleSpec,
    OutcomeHistogram,
    EquivarianceReport,
    DispersionSeries,
    UncertaintyReport,
    particle_profile,
    default_q_window,
    sample_positions,
    sample_initial,
    born_histogram,
    pointer_marginal_quadrature,
    equivariance_check,
    packet_overlap,
    packet_overlap_quadrature,
    subensemble_dispersion,
    uncertainty_product,
)
from .experiments import (
    EXPERIMENTS,
    Check,
    ExperimentResult,
    ProjectiveLimitError,
    exp_momentum_basic,
    exp_born,
    exp_contextuality,
    exp_coordinate,
    exp_sequential_uncertainty,
    exp_decoherence,
)
