"""Exception hierarchy for the flowldp package."""


class FlowLdpError(Exception):
    """Base class for all package errors."""


class NotPrimitive(FlowLdpError):
    """Transition matrix is reducible or periodic."""


class ZeroRow(FlowLdpError):
    """A symbol has no admissible successor (or no predecessor)."""


class LengthOverflow(FlowLdpError):
    """Requested enumeration exceeds the configured cap."""


class WindowOverrun(FlowLdpError):
    """Word too short to evaluate the requested Birkhoff sum or window."""


class InadmissibleWord(FlowLdpError):
    """Word violates the transition matrix."""


class MissingEntry(FlowLdpError):
    """Potential table lacks an admissible window."""


class NoConvergence(FlowLdpError):
    """Power iteration failed to reach tolerance."""


class DimensionCap(FlowLdpError):
    """Matrix dimension exceeds the dense eigensolver cap."""


class RootBracketFailure(FlowLdpError):
    """Pressure root could not be bracketed (indicates a bad roof function)."""


class EnumerationCap(FlowLdpError):
    """Path enumeration would exceed the configured cap."""


class DegenerateVariance(FlowLdpError):
    """Asymptotic variance below threshold: observable cohomologous to a constant."""


class OutsideGammaG(FlowLdpError):
    """Level a not bracketed by the derivative of the free energy on the t-range."""


class NotReducible(FlowLdpError):
    """Past-independence assertion failed in the coboundary reduction."""


class NearPole(FlowLdpError):
    """Series evaluation requested too close to the pole set."""


class NewtonDivergence(FlowLdpError):
    """Complex Newton iteration for the pole curve diverged."""


class CalibrationAmbiguous(FlowLdpError):
    """No residue normalization candidate matched the enumeration oracle."""


class ZeroHits(FlowLdpError):
    """Direct Monte Carlo produced no hits; interval too rare for this mode."""


class QuadratureFailure(FlowLdpError):
    """Adaptive quadrature failed to converge."""


class TailDominates(FlowLdpError):
    """Truncation tail bound exceeds the tolerated fraction of the value."""


class FamilyContractViolated(FlowLdpError):
    """Declared monotonicity or derivative bound fails on samples."""


class ParseError(FlowLdpError):
    """Config file could not be parsed."""


class ValidationError(FlowLdpError):
    """Config parsed but failed validation; carries the full error list."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
