"""Exception types raised by bloomkit."""


class BloomkitError(Exception):
    """Base class for all library errors."""


class DegenerateInput(BloomkitError):
    pass


class BoundaryEdge(BloomkitError):
    pass


class EmptyIntersection(BloomkitError):
    pass


class DegenerateTriangle(BloomkitError):
    pass


class SourceIsVertex(BloomkitError):
    pass


class CutsNotSpanningTree(BloomkitError):
    pass


class NonTreeDual(BloomkitError):
    pass


class OverlapDetected(BloomkitError):
    def __init__(self, faces, area):
        self.faces = tuple(faces)
        self.area = float(area)
        super().__init__(f"faces {self.faces[0]} and {self.faces[1]} overlap (area {self.area:.3g})")


class NotSerpentine(BloomkitError):
    pass


class EpsilonTooLarge(BloomkitError):
    pass


class DeltaTooLarge(BloomkitError):
    pass


class TimeOutOfRange(BloomkitError):
    pass


class VerificationBudgetExceeded(BloomkitError):
    def __init__(self, epsilon, delta, report=None):
        self.epsilon = epsilon
        self.delta = delta
        self.report = report
        super().__init__(f"no crossing-free schedule found (best eps={epsilon:.3g}, delta={delta:.3g})")


class CrossingFound(BloomkitError):
    def __init__(self, time, faces, witness):
        self.time = time
        self.faces = tuple(faces)
        self.witness = witness
        super().__init__(f"faces {self.faces} cross at t={time:.6g}")


class UnexpectedTouch(BloomkitError):
    def __init__(self, time, event):
        self.time = time
        self.event = event
        super().__init__(f"unexpected touch at t={time:.6g}: {event}")
