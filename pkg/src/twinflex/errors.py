"""Exception types shared across the toolkit."""


class MeshError(ValueError):
    """Invalid mesh structure or geometry (bad index, non-manifold edge, ...)."""


class SymmetryError(ValueError):
    """Quadrilateral does not satisfy the requested symmetry conditions."""


class ConstructionError(ValueError):
    """A surgery or gluing operation cannot produce a valid surface."""


class DoubleCoverError(ConstructionError):
    """Twinning a cap that is already symmetric would only double-cover it."""


class CatalogError(ValueError):
    """Unknown catalog model or out-of-range parameter."""


class SolveError(RuntimeError):
    """Newton solve or continuation failed; `reason` is machine-readable."""

    def __init__(self, message, reason="solver_failure"):
        super().__init__(message)
        self.reason = reason


class NetError(ValueError):
    """Unfolding is impossible or the net is empty."""
