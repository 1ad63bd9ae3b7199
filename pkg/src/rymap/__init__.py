"""Numerics for (alpha, beta)-Ricci-Yamabe flows: curvature, the RY map, variation identities and a 2-D grid solver."""

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    CFLViolation,
    ClosedFormUnavailable,
    ConfigError,
    DegenerateMetricError,
    DomainMarginError,
    EvaluationDomainError,
    NotRYFlowError,
    PositivityError,
    PreconditionError,
    RYMapError,
)
from .geometry import DEFAULT_SPEC, CurvatureBundle, DiffSpec, MetricField, christoffel, curvature
from .ry import (
    Character,
    FlowCharacter,
    RYParams,
    Signature,
    SignatureClass,
    classify_character,
    classify_signature,
    ry_eval,
    ry_eval_2d_conformal,
    steady_residual,
    volume_variation_rate,
)
from .flows import (
    Cone,
    Conformal,
    ConvexEuclidean,
    GeneralizedCigar,
    Poincare,
    Potential,
    WarpedGeneral,
    WarpedRotSym,
    make_flow,
)
