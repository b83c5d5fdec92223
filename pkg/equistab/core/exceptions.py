class EquistabException(Exception):
    """Base exception for all custom exceptions in the project."""

    code = "EquistabError"

    def __init__(self, message: str = None, details: dict = None):
        self.message = message or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)

# ============================================
# Symmetry Exceptions
# ============================================

class NonOrthogonalRhoError(EquistabException):
    """Exception raised when a spatial action is not an orthogonal matrix."""

    code = "NonOrthogonalRho"

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(
            message=f"rho is not orthogonal (residual {residual:.3e})",
            details={"residual": residual}
        )

class GroupNotClosedError(EquistabException):
    """Exception raised when the generated group exceeds the element cap."""

    code = "GroupNotClosed"

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(
            message=f"Group closure exceeded {cap} elements",
            details={"cap": cap}
        )

class InconsistentTauError(EquistabException):
    """Exception raised when tau contradicts the (rho, sigma) relations."""

    code = "InconsistentTau"

class MisalignedFundamentalDomainError(EquistabException):
    """Exception raised when [0, pi] is not a fundamental domain for tau(G)."""

    code = "MisalignedFundamentalDomain"

class DimensionMismatchError(EquistabException):
    """Exception raised when array shapes disagree with the problem."""

    code = "DimensionMismatch"

class MassOrbitMismatchError(EquistabException):
    """Exception raised when sigma permutes bodies of unequal mass."""

    code = "MassOrbitMismatch"

    def __init__(self, body: int, image: int):
        self.body = body
        self.image = image
        super().__init__(
            message=f"sigma maps body {body} to body {image} of different mass",
            details={"body": body, "image": image}
        )

class DiscontinuousUnfoldError(EquistabException):
    """Exception raised when the unfolded path jumps at a segment joint."""

    code = "DiscontinuousUnfold"

    def __init__(self, mismatch: float, joint: int):
        self.mismatch = mismatch
        self.joint = joint
        super().__init__(
            message=f"Joint {joint} mismatch {mismatch:.3e} exceeds tolerance",
            details={"mismatch": mismatch, "joint": joint}
        )

class DegenerateProjectionError(EquistabException):
    """Exception raised when the equivariant subspace is trivial."""

    code = "DegenerateProjection"

# ============================================
# Dynamics / Action Exceptions
# ============================================

class CollisionalConfigurationError(EquistabException):
    """Exception raised for configurations closer than the collision guard."""

    code = "CollisionalConfiguration"

    def __init__(self, min_distance: float, threshold: float):
        self.min_distance = min_distance
        self.threshold = threshold
        super().__init__(
            message=f"Bodies at distance {min_distance:.3e} < {threshold:.1e}",
            details={"min_distance": min_distance, "threshold": threshold}
        )

class CollisionalPathError(CollisionalConfigurationError):
    """Exception raised when a loop comes closer than the collision guard."""

    code = "CollisionalPath"

# ============================================
# Optimizer Exceptions
# ============================================

class MaxIterationsError(EquistabException):
    """Exception raised when the optimizer runs out of iterations."""

    code = "MaxIterations"

    def __init__(self, iterations: int, gradient_norm: float, result=None):
        self.iterations = iterations
        self.gradient_norm = gradient_norm
        self.result = result
        super().__init__(
            message=f"No critical point after {iterations} iterations (|grad| = {gradient_norm:.3e})",
            details={"iterations": iterations, "gradient_norm": gradient_norm}
        )

class CollisionStallError(EquistabException):
    """Exception raised when step halving cannot avoid a collision."""

    code = "CollisionStall"

    def __init__(self, halvings: int):
        self.halvings = halvings
        super().__init__(
            message=f"Step still collisional after {halvings} halvings",
            details={"halvings": halvings}
        )

class SingularHessianError(EquistabException):
    """Exception raised when Levenberg damping grows past its cap."""

    code = "SingularHessian"

class NotInBasinError(EquistabException):
    """Exception raised when Newton refinement starts too far from a critical point."""

    code = "NotInBasin"

    def __init__(self, gradient_norm: float, threshold: float):
        self.gradient_norm = gradient_norm
        super().__init__(
            message=f"|grad| = {gradient_norm:.3e} above basin threshold {threshold:.1e}",
            details={"gradient_norm": gradient_norm, "threshold": threshold}
        )

class NoConvergedStartError(EquistabException):
    """Exception raised when every start of a multistart run fails."""

    code = "NoConvergedStart"

    def __init__(self, starts: int, errors: list[str]):
        self.starts = starts
        self.errors = errors
        super().__init__(
            message=f"None of {starts} starts converged",
            details={"starts": starts, "errors": errors}
        )

# ============================================
# Stability Exceptions
# ============================================

class NonFiniteIntegrationError(EquistabException):
    """Exception raised when the variational equation produces NaN or inf."""

    code = "NonFiniteIntegration"

class EigenFailureError(EquistabException):
    """Exception raised when the eigen-decomposition does not converge."""

    code = "EigenFailure"

class NotCriticalError(EquistabException):
    """Exception raised when an index is requested away from a critical point."""

    code = "NotCritical"

    def __init__(self, residual: float, threshold: float):
        self.residual = residual
        super().__init__(
            message=f"Residual {residual:.3e} above {threshold:.1e}: not a critical point",
            details={"residual": residual, "threshold": threshold}
        )

class NotSymmetricError(EquistabException):
    """Exception raised for Hessians that are not symmetric."""

    code = "NotSymmetric"

# ============================================
# I/O Exceptions
# ============================================

class SchemaError(EquistabException):
    """Exception raised for problem/orbit files that fail validation."""

    code = "SchemaError"

class UnsupportedFormatError(EquistabException):
    """Exception raised for unknown export formats."""

    code = "UnsupportedFormat"

    def __init__(self, fmt: str):
        self.fmt = fmt
        super().__init__(
            message=f"Unsupported format '{fmt}'",
            details={"format": fmt}
        )
