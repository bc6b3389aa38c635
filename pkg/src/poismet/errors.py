"""Exception types shared across the package."""


class PoismetError(Exception):
    """Base class for all package errors."""


class ExprSyntaxError(PoismetError):
    """Malformed expression text; carries the offending position."""

    def __init__(self, message, position, text):
        super().__init__(f"{message} (at position {position} in {text!r})")
        self.position = position
        self.text = text


class ExprNameError(PoismetError):
    """Identifier that is neither a coordinate nor a known function."""

    def __init__(self, name, position, text):
        super().__init__(f"unknown identifier {name!r} (at position {position} in {text!r})")
        self.name = name
        self.position = position
        self.text = text


class EvaluationError(PoismetError):
    """Runtime evaluation failure (division by zero, log of a nonpositive value, ...)."""


class DegenerateMetric(PoismetError):
    """|det g| fell below the nondegeneracy floor at some point."""


class DegeneratePoisson(PoismetError):
    """|det pi| fell below the invertibility floor where inversion was required."""


class AnchorViolation(PoismetError):
    """Cotangent-curve anchor condition failed beyond tolerance."""


class NotKilling(PoismetError):
    """A check required a Killing field but the residual was too large."""


class NotInvariant(PoismetError):
    """A check required an ad-invariant bilinear form but invariance fails."""


class SceneError(PoismetError):
    """Scene, curve or algebra input file failed validation."""
