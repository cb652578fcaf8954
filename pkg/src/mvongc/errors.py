"""Exception hierarchy.

Every error carries a stable ``code`` string; the CLI reports it verbatim in
its error JSON.
"""


class MvongcError(Exception):
    code = "Error"

    def __init__(self, detail="", where=""):
        super().__init__(detail)
        self.detail = detail
        self.where = where


class NonFinite(MvongcError, ValueError):
    code = "NonFinite"


class DegenerateScale(MvongcError, ValueError):
    code = "DegenerateScale"


class KOutOfRange(MvongcError, ValueError):
    code = "KOutOfRange"


class IsolatedVertex(MvongcError, ValueError):
    code = "IsolatedVertex"


class NoConvergence(MvongcError, RuntimeError):
    code = "NoConvergence"


class NoProgress(MvongcError, RuntimeError):
    code = "NoProgress"


class DimensionMismatch(MvongcError, ValueError):
    code = "DimensionMismatch"


class SingularSystem(MvongcError, ValueError):
    code = "SingularSystem"


class InvalidConfig(MvongcError, ValueError):
    code = "InvalidConfig"


class CTooLarge(MvongcError, ValueError):
    code = "CTooLarge"


class MethodRequiresSquare(MvongcError, ValueError):
    code = "MethodRequiresSquare"


class LengthMismatch(MvongcError, ValueError):
    code = "LengthMismatch"


class ParseError(MvongcError, ValueError):
    code = "ParseError"


class ShapeMismatch(MvongcError, ValueError):
    code = "ShapeMismatch"


class AsymmetricGraph(MvongcError, ValueError):
    code = "AsymmetricGraph"
