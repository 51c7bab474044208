"""Viscous Burgers equation on the real line: P2 FEM with domain doubling, plus the exact solution."""

from .analytic import AnalyticModel, CompactDatum, GaussianBump, erf
from .assembly import SchemeParams, assemble_jacobian, assemble_residual
from .banded import BandedLu, BandedMatrix, factorize, solve
from .config import SimulationConfig
from .errors import (
    BurgersError,
    ConfigError,
    NonConvergenceError,
    NotReachedError,
    OracleToleranceError,
    SingularMatrixError,
)
from .mesh import FeSpace, QuadratureRule, build_space, eval_basis, make_quadrature
from .norms import (
    AsymptoteReport,
    NormSample,
    detect_t_infinity,
    error_norms,
    gamma_tilde,
    solution_norm,
)
from .stepper import (
    DoublingEvent,
    RunArtifacts,
    SolutionState,
    advance,
    init_state,
    newton_solve,
    relocate_double,
    run,
    support_ok,
)

__version__ = "0.1.0"
