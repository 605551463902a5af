"""Exception types shared across the package."""


class JetflowError(Exception):
    """Base class for all package-specific failures."""


class NodeError(JetflowError):
    """Wave function too small at the requested point; momentums diverge."""


class StepFailure(JetflowError):
    """Adaptive step-size controller underflowed its minimum step."""


class NodeApproach(JetflowError):
    """Trajectory drifting into a wave-function zero (log-amplitude blow-up)."""


class MissingMomentum(JetflowError):
    """A trajectory record does not retain a momentum required downstream."""


class GridTooCoarse(JetflowError):
    """Spectral tail of a grid state exceeds the aliasing budget."""


class QuadratureDivergence(JetflowError):
    """Integrand tail estimate too large for the requested quadrature domain."""


class PacketsOverlap(JetflowError):
    """Measurement outcome packets overlap beyond the separability threshold."""


class AmbiguousBranch(JetflowError):
    """A configuration-space point lies inside more than one outcome packet."""


class ConfigError(JetflowError):
    """Malformed or inconsistent scenario configuration."""
