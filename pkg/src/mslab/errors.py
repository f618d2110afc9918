"""Exception hierarchy shared by every module."""


class MSLabError(Exception):
    """Base class for all library errors."""


class TangentialCrossing(MSLabError):
    """A jump-set segment meets a circle (nearly) tangentially; perturb the radius."""


class EmptySet(MSLabError):
    pass


class EmptyIntersection(MSLabError):
    pass


class DegenerateTriple(MSLabError):
    pass


class OnJumpSet(MSLabError):
    """Evaluation point lies on the discontinuity set."""


class OutOfDomain(MSLabError):
    pass


class NotAJumpArc(MSLabError):
    pass


class WrongCrossingCount(MSLabError):
    def __init__(self, count):
        super().__init__(f"expected exactly one crossing, found {count}")
        self.count = count


class TooCloseToK(MSLabError):
    pass


class BracketFailure(MSLabError):
    pass


class GridMismatch(MSLabError):
    pass


class NotOdd(MSLabError):
    pass


class NonmonotoneEnergy(MSLabError):
    pass


class DomainTooSmall(MSLabError):
    pass
