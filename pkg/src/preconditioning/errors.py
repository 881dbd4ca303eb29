"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the CLI and the
HTTP service can report failures as JSON.
"""


class PreconditioningError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(v):
    if hasattr(v, "tolist"):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


class InvalidInputError(PreconditioningError, ValueError):
    code = "invalid-input"


class WrongOutcomeError(PreconditioningError, TypeError):
    code = "wrong-outcome"


class SchemaError(PreconditioningError, ValueError):
    code = "schema"


class EmptyScreenError(PreconditioningError, ValueError):
    code = "empty-screen"


class RankError(PreconditioningError, ValueError):
    code = "rank"


class DegenerateStepError(PreconditioningError, ArithmeticError):
    code = "degenerate-step"


class ConvergenceError(PreconditioningError, ArithmeticError):
    code = "convergence"


class NoEventsError(PreconditioningError, ValueError):
    code = "no-events"


class DegenerateCovariateError(PreconditioningError, ValueError):
    code = "degenerate-covariate"


class InvalidClassError(PreconditioningError, ValueError):
    code = "invalid-class"


class SpecError(PreconditioningError, ValueError):
    code = "spec"


class SingularityError(PreconditioningError, ArithmeticError):
    code = "singular"


class SizeError(PreconditioningError, MemoryError):
    code = "size"
