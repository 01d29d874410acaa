"""potlab: potential theory of algebraic Cauchy transforms.

Algebraic curves and branch continuation, piecewise-harmonic subharmonic
configurations, Riesz measures and branch-cut measures on embedded trees.
"""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402
from .tolerances import TOL, Tolerances  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .algebraic_core import (BivariatePolynomial, BranchTrack, SingularSet,  # noqa: E402
                             circle_path, continue_branches, discriminant_nodes,
                             format_permutation, monodromy, solve_fiber)
from .harmonic_field import (Grid, HarmonicTuple, LevelCurve, Sector,  # noqa: E402
                             TangentialOrder, harmonic_gradient, harmonic_value, primitive,
                             sector_decomposition, tangential_order, trace_level_curve)
from .configurations import (CollinearConfiguration, ConfigurationField,  # noqa: E402
                             RegionMask, assemble_configuration, enumerate_collinear_configurations,
                             envelope_configuration, extreme_point_profile, interface_lipschitz,
                             max_configuration, separation_angle, verify_forward_star,
                             verify_subharmonic)
from .riesz_measure import (Arc, Measure, RieszDensity, alpha_star,  # noqa: E402
                            cauchy_transform, example51_measure, gauss_jacobi_rule,
                            jump_density, log_potential, stokes_mass,
                            verify_algebraic_relation)
from .tree_lab import (AnalyticTree, Edge, SearchResult, TreeMeasure, TreeScore,  # noqa: E402
                       critical_values, exterior_branch, hausdorff, score_tree,
                       search_tree, star_tree, tree_measure)
