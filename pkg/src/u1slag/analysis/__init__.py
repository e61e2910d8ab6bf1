from .singular import (BoundReport, NonisolatedLine, SingularityRecord, check_bounds,
                       classify_singularity_type, count_boundary_extrema, find_singularities,
                       reflect_solution)
from .winding import LoopSamples, contour_winding, winding_number
from .zeros import (AnalyticPair, LeadingOrderFit, ZeroRecord, ZeroSet, difference, find_zeros,
                    leading_order_fit, multiplicity_at)

__all__ = [
    "AnalyticPair", "BoundReport", "LeadingOrderFit", "LoopSamples", "NonisolatedLine",
    "SingularityRecord", "ZeroRecord", "ZeroSet", "check_bounds", "classify_singularity_type",
    "contour_winding", "count_boundary_extrema", "difference", "find_singularities", "find_zeros",
    "leading_order_fit", "multiplicity_at", "reflect_solution", "winding_number",
]
