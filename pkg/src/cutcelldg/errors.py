"""Exception hierarchy shared by all modules."""


class CutCellDGError(Exception):
    """Base class for all package errors."""


class GeometryError(CutCellDGError):
    pass


class NoRootError(GeometryError):
    """Chord-fraction function does not behave monotonically on the bracket
    (boundary segment doubles back inside one cell)."""


class MeshError(CutCellDGError):
    pass


class SplitCellError(MeshError):
    """A background cell is divided into more than one fluid component."""


class TunnelError(MeshError):
    """The boundary tunnels through a cell (fluid region with a hole)."""


class DegenerateCutError(MeshError):
    """Intersection pattern too degenerate to mesh (e.g. two crossings on one
    grid edge, or snapping produced an inconsistent polygon)."""


class TriangulationError(CutCellDGError):
    """Cut-cell polygon could not be triangulated with positive Jacobians."""


class RankDeficientError(CutCellDGError):
    """QR factor R has a negligible diagonal entry; quadrature rule cannot
    resolve the requested polynomial space."""


class MergeFailure(CutCellDGError):
    """No merging neighborhood satisfies the volume constraint."""


class SolverBlowup(CutCellDGError):
    """Non-finite values appeared in the solution."""


class PositivityFailure(CutCellDGError):
    """A cell average is outside the admissible set; scaling cannot help."""


class NonAdmissibleState(CutCellDGError):
    """Flux evaluation received an inadmissible state."""


class BisectionFailure(CutCellDGError):
    """Root bracketing failed in an exact-solution evaluation."""


class MaxStepsExceeded(CutCellDGError):
    pass


class ConfigError(CutCellDGError):
    pass
