"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):
``InputError`` for inputs that violate a precondition, and
``NumericalError`` for numerical procedures that failed on valid input.
"""


class PotlabError(Exception):
    """Base class for all errors raised by potlab."""


class InputError(PotlabError, ValueError):
    """Invalid input or violated precondition (CLI exit code 1)."""


class NumericalError(PotlabError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance (CLI exit code 2)."""


# algebraic_core
class NotSquarefree(InputError):
    pass


class DegenerateDiscriminant(InputError):
    pass


class LeadingCoefficientVanishes(InputError):
    def __init__(self, z, msg=None):
        self.z = z
        super().__init__(msg or f"leading coefficient vanishes at z={z!r}")


class PathHitsSingularSet(InputError):
    pass


class NoConvergence(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


# harmonic_field
class QuadratureNoConvergence(NumericalError):
    pass


class SeedNotOnCurve(InputError):
    pass


class DegenerateCurve(InputError):
    pass


class GradientStall(NumericalError):
    pass


class RadiusTooLarge(InputError):
    pass


class OrderNotResolved(NumericalError):
    pass


# configurations
class NotCollinear(InputError):
    pass


class NotAGraph(InputError):
    pass


# riesz_measure
class TooCloseToSupport(InputError):
    pass


class AmbiguousInterface(InputError):
    pass


class CircleExitsGrid(InputError):
    pass


# tree_lab
class DegenerateCritical(InputError):
    pass


class CriticalValueAtPole(InputError):
    pass


class AmbiguousExteriorBranch(NumericalError):
    pass


class InvalidTree(InputError):
    pass


class ContinuationBlocked(NumericalError):
    pass


class SideCollision(NumericalError):
    pass
