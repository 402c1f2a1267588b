"""Exception hierarchy.

Every error carries the name of the invariant or precondition it reports, so
the command line front end can print it verbatim.
"""


class SoftPackError(Exception):
    invariant = "unspecified"

    def __init__(self, message="", invariant=None):
        super().__init__(message)
        if invariant is not None:
            self.invariant = invariant

    def __str__(self):
        msg = super().__str__()
        return f"[{self.invariant}] {msg}" if msg else f"[{self.invariant}]"


class InvalidBody(SoftPackError, ValueError):
    invariant = "body"


class InvalidConfig(SoftPackError, ValueError):
    invariant = "config"


class DegeneratePosition(SoftPackError):
    invariant = "general-position"


class WindowTooSmall(SoftPackError):
    invariant = "window-size"


class BodyNotThreefold(SoftPackError):
    invariant = "threefold-symmetry"


class ZeroAreaCell(SoftPackError):
    invariant = "positive-cell-area"


class NotAPacking(SoftPackError):
    invariant = "packing-condition"


class DegenerateQuadruple(SoftPackError):
    invariant = "non-antipodal-quadruple"


class NumericalDegeneracy(SoftPackError):
    invariant = "face-identification"


class LambdaOutOfRange(SoftPackError, ValueError):
    invariant = "lambda-range"


class CoincidentCenters(SoftPackError):
    invariant = "distinct-centers"


class DegenerateDeformation(SoftPackError):
    invariant = "non-rigid-deformation"
