"""Chart-based tensor calculus for stress tensors of smooth maps.

Evaluates the quadratic and higher-power stress tensors of maps between
Riemannian charts, their weighted divergences, conformality and geodesy
predicates, and verifies the composition identities relating them, all
through exact second-order forward-mode differentiation.
"""

from .analysis import (
    ConformalityReport,
    Jet2Data,
    horizontal_conformality,
    is_conformal_function,
    is_p_symphonic,
    is_totally_geodesic,
    morphism_probe_test,
    probe_jets,
    prop2_constraint,
    prop2_constraint_bruteforce,
    theorem7_ingredients,
)
from .autodiff import (
    Dual,
    HyperDual,
    Jet2Scalar,
    evaluate_jet2,
    finite_difference_jet2,
)
from .expr import Expression, parse
from .geometry import Box, ChartManifold, MetricJet, metric_jet, orthonormal_frame
from .identities import (
    IdentityCase,
    exponent_sweep,
    run_identity,
    verify_lemma3,
    verify_sec3_T,
    verify_thm1_unweighted,
    verify_thm1_weighted,
    verify_thm6,
)
from .maps import MapJet, SmoothMap, compose, map_jet, verify_chain_rule_main1
from .reports import PointRecord, ResidualReport
from .tensors import (
    DivergenceResult,
    TensorField1FormValued,
    divergence,
    energy_densities,
    sigma,
    sigma_S,
    sigma_S_m,
    sigma_T,
    sigma_T_m,
    sigma_field,
    sigma_m,
    sigma_m_field,
    weighted_divergence,
)

__version__ = "0.1.0"
