"""Exception types shared across the package.

Every error carries a module-qualified ``code`` so the CLI can emit
machine-readable error JSON.
"""


class HyplabError(Exception):
    code = "hyplab.error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class InvalidPointError(HyplabError):
    code = "hypgeom.invalid_point"


class InvalidLengthError(HyplabError):
    code = "hypgeom.invalid_length"


class RangeError(HyplabError):
    code = "hypgeom.range"


class NoPerpendicularError(HyplabError):
    code = "hypgeom.no_perpendicular"


class CollarDomainError(HyplabError):
    code = "collar.domain"


class LocationError(HyplabError):
    code = "collar.location"


class IncompleteGluingError(HyplabError):
    code = "pants.incomplete_gluing"


class GenusError(HyplabError):
    code = "pants.genus"


class MeshResolutionError(HyplabError):
    code = "pants.mesh_resolution"


class MeshQualityError(HyplabError):
    code = "pants.mesh_quality"


class AssemblyError(HyplabError):
    code = "spectral.assembly"


class ConvergenceError(HyplabError):
    code = "spectral.convergence"


class CoverageError(HyplabError):
    code = "spectral.coverage"


class ConnectivityError(HyplabError):
    code = "spectral.connectivity"


class UnreachableError(HyplabError):
    code = "extremal.unreachable"


class DegeneratePairError(HyplabError):
    code = "extremal.degenerate_pair"


class SamplingError(HyplabError):
    code = "extremal.sampling"


class GraphSettingError(HyplabError):
    code = "graphana.setting"


class GraphConnectivityError(HyplabError):
    code = "graphana.disconnected"


class ProfileError(HyplabError):
    code = "sharpness.profile"


class SpecValidationError(HyplabError):
    code = "harness.spec_validation"

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = violations or []


class UnsupportedFeatureError(SpecValidationError):
    code = "harness.unsupported_feature"


class ReportError(HyplabError):
    code = "harness.report"
