"""Grid solver for the two-dimensional conformal flow and residuals in separable charts."""

from .solver import (
    BC,
    BoundaryCondition,
    Chart,
    ConformalGridState,
    Scheme,
    SolverConfig,
    Trajectory,
    gauss_curvature_grid,
    grid_laplacian,
    run_flow,
    sample,
    stable_dt,
    step,
    step_cartesian,
    step_liouville,
)
from .charts import ChartMap, chart_map, chart_transfer, elliptic_forward
from .residuals import (
    Field,
    Jet,
    Jet1,
    Mode,
    Profile,
    grid_liouville_residual,
    polar_first_order_term,
    residual_elliptic,
    residual_liouville,
    residual_parabolic,
    residual_polar,
    separable_residual,
    solitonic_residual,
)
from .io import read_probes, read_snapshot, write_probes, write_series, write_snapshot

__all__ = [
    "BC", "BoundaryCondition", "Chart", "ConformalGridState", "Scheme", "SolverConfig", "Trajectory",
    "gauss_curvature_grid", "grid_laplacian", "run_flow", "sample", "stable_dt", "step",
    "step_cartesian", "step_liouville",
    "ChartMap", "chart_map", "chart_transfer", "elliptic_forward",
    "Field", "Jet", "Jet1", "Mode", "Profile", "grid_liouville_residual", "polar_first_order_term",
    "residual_elliptic", "residual_liouville", "residual_parabolic", "residual_polar",
    "separable_residual", "solitonic_residual",
    "read_probes", "read_snapshot", "write_probes", "write_series", "write_snapshot",
]
