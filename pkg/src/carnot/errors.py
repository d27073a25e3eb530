"""Exception hierarchy. Everything raised on purpose derives from CarnotError."""


class CarnotError(Exception):
    pass


class ParseError(CarnotError, ValueError):
    pass


class GroupFileError(ParseError):
    pass


class MissingComponent(CarnotError, KeyError):
    pass


class MissingCoordinate(CarnotError, KeyError):
    pass


class UnknownBuiltin(CarnotError, ValueError):
    pass


class InvalidAlgebra(CarnotError, ValueError):
    pass


class SingularFrame(CarnotError, ArithmeticError):
    pass


class NotGenerating(CarnotError, ValueError):
    pass


class NonpositiveRadius(CarnotError, ValueError):
    pass


class WrongStep(CarnotError, ValueError):
    pass


class NotAbelian(WrongStep):
    pass


class NotConstantLaplacian(CarnotError, ValueError):
    pass


class StructureMismatch(CarnotError, ValueError):
    pass


class NoWitnessFound(CarnotError, LookupError):
    pass
