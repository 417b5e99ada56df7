"""Exception classes raised across the package."""


class GoclustError(Exception):
    pass


class InvalidModel(GoclustError, ValueError):
    pass


class DimensionMismatch(GoclustError, ValueError):
    pass


class EmptySet(GoclustError, ValueError):
    pass


class BadLabel(GoclustError, ValueError):
    pass


class LengthMismatch(GoclustError, ValueError):
    pass


class KTooLarge(GoclustError, ValueError):
    pass


class TransformFailure(GoclustError, ArithmeticError):
    pass


class SingularInput(TransformFailure):
    pass


class DegenerateDimension(GoclustError, ValueError):
    pass


class ParseError(GoclustError, ValueError):
    def __init__(self, msg, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + msg)
        self.path = path
        self.line = line


class SchemaError(ParseError):
    pass
