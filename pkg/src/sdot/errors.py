"""Exception hierarchy for the sdot package."""


class SdotError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateSites(SdotError):
    """All sites are collinear (or too few), so no planar hull exists."""


class EmptyCellDetected(SdotError):
    """A height vector left the admissible space: some power cell vanished."""

    def __init__(self, message="empty power cell detected", sites=()):
        super().__init__(message)
        self.sites = tuple(sites)


class NearDegenerateFace(SdotError):
    """The support planes of a hull face are too close to parallel."""


class CoincidentSites(SdotError):
    """Two target points coincide; the shared-wall derivative is undefined."""


class InadmissibleState(SdotError):
    """Gradient/Hessian assembly requested at a state with empty cells."""


class SingularReducedSystem(SdotError):
    """The reduced Newton system could not be solved."""


class StepExhausted(SdotError):
    """Step halving hit its budget without restoring admissibility."""


class MassMismatch(SdotError):
    """Source and target total masses disagree beyond tolerance."""


class Infeasible(SdotError):
    """Transportation oracle marginals do not balance."""


class DegenerateTriangle(SdotError):
    """A mesh triangle has (near-)zero parameter-plane area."""

    def __init__(self, message, face_index=None):
        super().__init__(message)
        self.face_index = face_index
