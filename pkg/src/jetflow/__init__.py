"""jetflow: quantum trajectories from a truncated hierarchy of momentum ODEs.

A particle state is a position plus the spatial derivatives of the complex
action (the log-wave-function), truncated at a configurable order.  The
hierarchy of ordinary differential equations for these momentums is
integrated directly and verified against an independent grid Schrödinger
solver, ensemble statistics, a one-step Feynman integral, measurement
models, and spin precession.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AmbiguousBranch,
    ConfigError,
    GridTooCoarse,
    JetflowError,
    MissingMomentum,
    NodeApproach,
    NodeError,
    PacketsOverlap,
    QuadratureDivergence,
    StepFailure,
)
from .multiindex import MultiIndex  # noqa: F401
