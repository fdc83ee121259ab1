"""Cut-cell discontinuous Galerkin solver with state-redistribution
stabilization for 2D hyperbolic conservation laws."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BisectionFailure,
    ConfigError,
    CutCellDGError,
    DegenerateCutError,
    GeometryError,
    MaxStepsExceeded,
    MergeFailure,
    MeshError,
    NoRootError,
    NonAdmissibleState,
    PositivityFailure,
    RankDeficientError,
    SolverBlowup,
    SplitCellError,
    TunnelError,
    TriangulationError,
)
