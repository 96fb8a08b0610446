"""Exception hierarchy.

Every error carries an ``exit_code`` category so the CLI can map failures
to distinct process exit statuses.
"""


class CompositeDPError(ValueError):
    exit_code = 1


# -- parameter validation ---------------------------------------------------

class InvalidParameter(CompositeDPError):
    exit_code = 4


class NonPositiveEpsilon(InvalidParameter):
    pass


class NonPositiveSensitivity(InvalidParameter):
    pass


class DeltaOutOfRange(InvalidParameter):
    pass


class MissingDelta(InvalidParameter):
    pass


class InvalidShape(InvalidParameter):
    pass


# -- domain / mapping -------------------------------------------------------

class DegenerateInputRange(InvalidParameter):
    """Raised when Cp_max <= Cp_min, i.e. no input can be represented."""


class OutOfBounds(CompositeDPError):
    exit_code = 4


class CpOutOfRange(CompositeDPError):
    exit_code = 4


# -- shape solving / optimisation -------------------------------------------

class Infeasible(CompositeDPError):
    """A shape parameterisation violates one of the feasibility constraints.

    ``constraint`` names the failing check: ``"width"``, ``"positivity"``,
    ``"height"``, ``"dp_ratio"``, ``"edge_value"`` or ``"normalization"``.
    """

    exit_code = 4

    def __init__(self, constraint: str, message: str = ""):
        self.constraint = constraint
        super().__init__(message or f"infeasible: {constraint} constraint violated")


class InfeasibleRegion(CompositeDPError):
    exit_code = 4


class TargetUnreachable(CompositeDPError):
    exit_code = 4


class ZeroActivationMass(CompositeDPError):
    exit_code = 4


class CertificationFailed(CompositeDPError):
    """The sup/inf density ratio exceeds e^epsilon.

    ``witness`` holds ``((a_sup, x_sup), (a_inf, x_inf))``: the activation
    offsets and points where the supremum and infimum were attained.
    """

    exit_code = 5

    def __init__(self, ratio: float, bound: float, witness=None):
        self.ratio = ratio
        self.bound = bound
        self.witness = witness
        super().__init__(f"density ratio {ratio:.12g} exceeds e^eps = {bound:.12g}")


class NumericNonconvergence(CompositeDPError):
    exit_code = 1


# -- data ingestion -----------------------------------------------------------

class DataError(CompositeDPError):
    exit_code = 3


class ColumnMissing(DataError):
    pass


class NoNumericRows(DataError):
    pass


class EmptySeries(DataError):
    pass
