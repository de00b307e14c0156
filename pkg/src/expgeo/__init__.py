"""Exponential statistical manifolds on finite sample spaces.

Core layers:

  space      weighted finite sample spaces, densities, moments
  young      Young pairs, Luxemburg norms, duality pairing
  manifold   exponential charts and the cumulant functional
  transport  exponential / mixture / isometric parallel transports
  calculus   functionals, covariant gradients, gradient flows
  boltzmann  collision geometry and Monte Carlo weak-form estimators

`expgeo.service` wraps the library in a FastAPI app; `expgeo.cli` is a thin
command-line client over the same endpoints.
"""

from .space import (
    ATOL,
    CenteredRandomVariable,
    Density,
    RandomVariable,
    SampleSpace,
    center,
    central_moments,
    expect,
    l2_norm,
)
from .young import (
    YoungPair,
    eval_young,
    luxemburg_conjugate_norm,
    luxemburg_norm,
    orlicz_pairing,
    young_conjugate,
    young_derivative,
    young_function,
    young_inequality_gap,
)
from .manifold import (
    chart,
    chart_inverse,
    cumulant,
    cumulant_derivatives,
    nabla_K,
    nabla_K_derivative,
    transition_map,
)
from .transport import (
    HilbertVector,
    PretangentVector,
    TangentVector,
    duality,
    e_transport,
    hilbert_transport_derivative_check,
    isometric_transport,
    m_transport,
)
from .calculus import (
    FlowOverflowError,
    ScalarField,
    Trajectory,
    VectorField,
    covariant_derivative_product_rule_check,
    directional_derivative,
    e_acceleration,
    entropy_functional,
    expectation_functional,
    fisher_information,
    gradient_flow,
    kl_divergence,
    kl_in_chart,
    kl_mixed_second_derivative,
    kl_partial_gradient,
    velocity,
)
from .boltzmann import (
    GibbsSpec,
    MCEstimate,
    VelocitySample,
    collide,
    collision_matrix,
    conditioning_orthogonality_test,
    entropy_production,
    gaussian_log_normalizer,
    gibbs_normalizer,
    q_integral_zero_check,
    sample_velocities,
    sphere_average,
    sphere_product_nodes,
    uniform_sphere,
    weak_boltzmann,
)

__version__ = "0.1.0"
