"""Two-dimensional transport process absorbed at the boundary of a convex domain."""

from .assumption_b import AssumptionBParams, disk_assumption_b_params
from .density_bound import (
    BoundCell,
    DensityBoundTable,
    transport_density_lower_bound,
    verify_transport_density_bound,
)
from .estimators import (
    DecayRateEstimate,
    HistogramComparison,
    QsdHistogram,
    WindowFit,
    clopper_pearson,
    compare_histograms,
    estimate_lambda0,
    estimate_qsd,
    estimate_survival_curve,
)
from .geometry import ConvexPolygon, Disk, Domain, domain_from_dict, sample_uniform
from .transport import (
    BlockOutcome,
    InitialLaw,
    NeutronSpec,
    PathRecord,
    PdmpState,
    SimulationConfig,
    block_stream,
    exit_time,
    run_block,
    simulate_cloud,
    simulate_path,
)

__all__ = [
    "AssumptionBParams",
    "BlockOutcome",
    "BoundCell",
    "ConvexPolygon",
    "DecayRateEstimate",
    "DensityBoundTable",
    "Disk",
    "Domain",
    "HistogramComparison",
    "InitialLaw",
    "NeutronSpec",
    "PathRecord",
    "PdmpState",
    "QsdHistogram",
    "SimulationConfig",
    "WindowFit",
    "block_stream",
    "clopper_pearson",
    "compare_histograms",
    "disk_assumption_b_params",
    "domain_from_dict",
    "estimate_lambda0",
    "estimate_qsd",
    "estimate_survival_curve",
    "exit_time",
    "run_block",
    "sample_uniform",
    "simulate_cloud",
    "simulate_path",
    "transport_density_lower_bound",
    "verify_transport_density_bound",
]
