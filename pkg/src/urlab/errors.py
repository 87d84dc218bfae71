"""Exception hierarchy.  Every error is a ``ValueError`` so callers can catch broadly."""


class UrlabError(ValueError):
    pass


class NotSquare(UrlabError):
    pass


class NotHermitian(UrlabError):
    pass


class ZeroVector(UrlabError):
    pass


class NotPositive(UrlabError):
    pass


class TraceNotOne(UrlabError):
    pass


class NotPure(UrlabError):
    pass


class DimMismatch(UrlabError):
    pass


class ZeroDeviation(UrlabError):
    """Raised when an observable has (numerically) zero spread in the state."""

    def __init__(self, label, deviation=0.0):
        self.label = label
        self.deviation = deviation
        super().__init__(f"observable {label!r} has zero deviation ({deviation:.3g}) in this state")


class NotEffectivelyCompatible(UrlabError):
    def __init__(self, first, second, residual):
        self.residual = residual
        super().__init__(
            f"<[{first}, {second}]> = {residual:.3g} does not vanish in this state"
        )


class DegenerateTransform(UrlabError):
    pass


class ZeroDenominator(UrlabError):
    pass


class DimFactorMismatch(UrlabError):
    pass


class GridTooCoarse(UrlabError):
    pass
