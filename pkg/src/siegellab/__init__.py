"""Numerical laboratory for Siegel disks of the quadratic family P(z) = lambda z + z^2."""

from types import ModuleType as _ModuleType

__version__ = "0.1.0"

from ._backend import BACKEND
from .curvegeom import (C1Check, PinchingReport, QuasicircleEstimate, RegularityProbe,
                        check_c1_stability, hausdorff_distance, holder_exponent, pinch,
                        pinch_profile, point_set_diameter, quasicircle_constant,
                        sup_norm_distance)
from .curves import SampledCurve, circle, dumbbell, ellipse, koch_snowflake
from .errors import (CoincidentPoints, DegenerateFit, GridMismatch, InsufficientDepth,
                     InsufficientScales, NoCandidates, PrecisionExhausted, RationalAngle,
                     SiegelLabError, TailTooLarge)
from .lab import (ExperimentConfig, ExperimentTrace, RoundRecord, TargetUnreachable,
                  chain_perturbations, radius_targeted_search, run_perturbation)
from .linearization import (LinearizationSeries, critical_point_distance, estimate_radius,
                            linearize, residual, sample_curve)
from .rotation import (ContinuedFraction, RotationNumber, bounded_type_approximant,
                       bruno_sum, cf_expand, convergents, parse_theta)

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, _ModuleType)]
