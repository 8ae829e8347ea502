"""Numerical toolkit for generalized Grunbaum inequalities.

One-dimensional densities in curvature-style concavity regimes, Euclidean
s-concave measures with Tukey depth at barycenters, split product spaces
with needle decompositions, and quantitative stability certificates.
"""

from .concavity import ConcavityClass, grunbaum_bound, s_mean
from .classify import ClassReport, check_class
from .density import (
    Density1D,
    Interval,
    barycenter_1d,
    cone_density,
    exp_density,
    gaussian_density,
    make_density,
    neg_cone_density,
    normalize,
    plexp_density,
    plpow_density,
    polynomial_density,
    random_class_density,
    recenter,
    tabulated_density,
    truncate_normalize,
    uniform_density,
)
from .depth import DepthReport, DepthSearchConfig, direction_sequence, tukey_depth, verify_depth_bound
from .euclidean import (
    GridDensityND,
    Halfspace,
    SampleCloud,
    barycenter_nd,
    cone_uniform,
    gaussian,
    halfspace_mass,
    make_rng,
    marginal_1d,
    minkowski_test,
    polygon_grid_density,
    uniform_polytope,
    uniform_simplex,
)
from .product import (
    FiberSpace,
    Needle,
    NeedleDecomposition,
    ProductDensity,
    barycenter_busemann,
    busemann_mass,
    check_pushforward_class,
    cylinder_fixture,
    needle_verify,
    pushforward_busemann,
    recenter_product,
    rigidity_profile_check,
    separable_needles,
    separable_product,
    verify_main_theorem,
)
from .profile import CdfProfile, cdf_profile, check_envelope, intR_identity, profile_shape_defect
from .quadrature import DivergentIntegralError, adaptive_simpson
from .stability import (
    StabilityCertificate,
    l1_cdf_distance,
    model_cdf,
    moment_sandwich,
    needle_stability,
    stability_certificate,
    stability_rhs,
)
from .verify1d import (
    ModelCdf,
    ModelParams,
    PreconditionError,
    RigidityResult,
    VerificationReport,
    rigidity_detect,
    verify_grunbaum_1d,
)

__version__ = "0.1.0"
