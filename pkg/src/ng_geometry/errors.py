"""Exception hierarchy for numerical guards.

Every guard failure derives from :class:`NumericalGuardError` and carries the
name of the module that raised it and the invariant that failed, so the CLI
can report a single-line diagnostic.
"""


class NumericalGuardError(ValueError):
    """A numerical invariant was violated."""

    invariant = "numerical guard"

    def __init__(self, message, module="ng_geometry"):
        super().__init__(message)
        self.module = module

    def diagnostic(self):
        return f"{self.module}: {self.invariant}: {self}"


class HermiticityViolation(NumericalGuardError):
    invariant = "hermiticity"


class TraceViolation(NumericalGuardError):
    invariant = "unit trace"


class NegativityViolation(NumericalGuardError):
    invariant = "positivity"


class TruncationLeak(NumericalGuardError):
    invariant = "truncation guard"


class UncertaintyViolation(NumericalGuardError):
    invariant = "uncertainty relation"


class DomainError(NumericalGuardError):
    invariant = "function domain"


class SupportViolation(NumericalGuardError):
    invariant = "support inclusion"


class DivisionGuard(NumericalGuardError):
    invariant = "division guard"


class InfeasibleConstraint(NumericalGuardError):
    invariant = "feasible constraint set"


class BadSpec(ValueError):
    """Malformed target or perturbation specification (a usage error)."""
