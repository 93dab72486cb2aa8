"""sesquilab: a numerical laboratory for sphere-valued maps whose energy
interpolates between the Dirichlet integral and the bienergy.

The library discretizes maps φ: M → Sⁿ on flat tori and Euclidean patches,
finds critical points of δ₁∫|dφ|² + δ₂∫|τ(φ)|² by constrained gradient
descent, and checks the structural identities such critical points satisfy:
rotational conservation currents, stress-energy divergence, local energy
monotonicity, and Morrey-norm smallness.
"""

__version__ = "0.1.0"

from .errors import (
    BallOutOfPatch,
    ConfigError,
    Delta2Zero,
    EmptyBallFamily,
    IoError,
    NearZeroVector,
    NonpositiveDelta2,
    SesquiError,
    WrongDimension,
)
from .grid import Coupling, EuclideanPatch, TorusGrid
from .fields import (
    AmbientField,
    ScalarField,
    SphereField,
    project_sphere,
    tangent_project,
)
from .ops import (
    bar_nabla_dphi,
    bar_nabla_dphi_squared,
    bar_nabla_tension,
    bilaplacian,
    energy_density,
    integrate,
    laplacian,
    partial_derivative,
    tension,
)
from .families import (
    constant_map,
    great_circle,
    latitude_circle,
    latitude_circle_arclength,
    perturb_tangent,
    product_extension,
    random_sphere_field,
)
from .energy import (
    EnergyBreakdown,
    critical_latitude_angle,
    directional_derivative,
    discrete_energy_gradient,
    el_residual,
    el_residual_tangential,
    energies,
    extrinsic_bound_gap,
    immersion_residual,
    interpolating_energy,
)
from .solver import SolveOptions, SolveReport, Termination, solve, step
from .noether import (
    CurrentField,
    KillingGenerator,
    conservation_report,
    current,
    current_divergence,
    killing_field,
    so_basis,
    trig_test_functions,
    weak_pairing,
    wedge_current,
)
from .stress import (
    MonotonicityReport,
    MonotonicityRow,
    RadialCutoff,
    SymTensorField,
    Verdict,
    monotonicity_report,
    stationary_pairing,
    stress_divergence,
    stress_tensor,
    tau_orthogonality,
    theta,
)
from .morrey import (
    BallRegion,
    MorreyParams,
    MorreyResult,
    SmallnessReport,
    gradient_norm_field,
    hessian_norm_field,
    morrey_norm,
    morrey_norm_detailed,
    smallness,
)
from .io import load_field, save_field

__all__ = [name for name in dir() if not name.startswith("_")]
