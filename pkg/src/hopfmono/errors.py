"""Exception types shared across the toolkit."""


class ToolError(Exception):
    """Base class for all hopfmono errors."""


class NonUnitPoint(ToolError):
    """Base point is not on the unit sphere (no silent renormalisation)."""


class PolicyChartMiss(ToolError):
    """Point lies outside the chart of the requested frame policy."""


class FrameDegenerate(ToolError):
    """Frame policy is undefined or degenerate at the point."""


class StepFailure(ToolError):
    """Adaptive or fixed-step integration failed to meet tolerance."""


class BadDegree(ToolError):
    """Form degree not supported by the Hodge operator."""


class BadParams(ToolError):
    """Invalid parameters for a constructor or builtin field."""


class BadAlpha(ToolError):
    """Hoelder exponent outside (0, 1]."""


class EmptySamples(ToolError):
    """Sample set is empty or too small."""


class CalibrationFailed(ToolError):
    """No lattice point passed the calibration suite."""

    def __init__(self, table):
        self.table = table
        super().__init__("calibration search failed; residual table attached")


class OriginNotInCone(ToolError):
    """The origin of C^2 does not correspond to a cone point."""


class EvalDomain(ToolError):
    """Field evaluated outside its smoothness domain."""


class DomainExcluded(ToolError):
    """A flow orbit crosses the field's excluded set."""


class StencilOutOfBox(ToolError):
    """Finite-difference stencil leaves the flow-box interior."""


class ReductionInconsistent(ToolError):
    """Profile ODE residual could not be driven below tolerance."""


class SingularGauge(ToolError):
    """Gauge transformation is singular at a sample point."""


class LoopExitsDomain(ToolError):
    """Holonomy loop leaves the field's smooth domain."""


class NotABogomolnySolution(ToolError):
    """Operation requires a near-solution of the monopole equation."""


class MissingInputs(ToolError):
    """Aggregate report is missing a component module's output."""


class ConfigInvalid(ToolError):
    """Configuration file contains unknown or invalid keys."""
