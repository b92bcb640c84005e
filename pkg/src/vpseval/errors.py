"""Exception taxonomy.

Every rejection of bad input is raised as one of these classes so callers
(and the command line front end, which maps them to exit codes) can tell
apart configuration mistakes, broken data, and metrics that are genuinely
undefined for the given input.
"""


class VpsEvalError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(VpsEvalError):
    """A configuration document (category registry, scene or corruption
    spec file) is malformed or violates its schema."""


class IntegrityError(VpsEvalError):
    """Video data is internally inconsistent: pixels referencing unknown
    segments, duplicate instance pairs, mismatched frame sizes, values
    outside the category registry."""


class CapacityError(VpsEvalError):
    """A value exceeds what the on-disk encoding can represent."""


class ShapeError(VpsEvalError):
    """Two inputs that must agree in dimensions or frame count do not."""


class SpecError(VpsEvalError):
    """A scene or corruption spec asks for something the generator cannot
    produce (instance larger than the frame, id swap without a swappable
    pair, ...)."""


class LabelError(VpsEvalError):
    """Accumulators with incompatible labels (different window spans)
    were asked to merge."""


class UndefinedMetricError(VpsEvalError):
    """The requested metric has an empty domain (no categories present,
    no ground-truth tracks). Reported explicitly, never as a silent 0."""


class ManifestError(VpsEvalError):
    """A dataset manifest does not resolve: missing video directories,
    unpaired prediction/ground-truth entries."""
