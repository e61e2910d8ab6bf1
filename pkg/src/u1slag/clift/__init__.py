from .examples import (analytic_example, catenoid, catenoid_potential, example_names, harvey_lawson,
                       hl_patch, linear, sampler_hl, sampler_hl_arrays, twosheet)
from .fibration import (DisjointnessReport, FibrationFamily, SeamReport, build_fibration,
                        check_disjointness, fibration_map_explicit, fibre_arrays, fibre_patch,
                        fibre_sample, seam_continuity)
from .lift import (C3Point, CalibrationEval, MeshPatch, frame_check, frame_forms, lift_arrays,
                   lift_functions, lift_mesh, lift_point, lift_radii, omega, plane_patch, sl_residual)
