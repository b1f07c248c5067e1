"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI in its
``ERROR <code>: <detail>`` lines and mapped to exit status 2 (validation/I-O)
or 3 (no compatible source).
"""


class XferselError(Exception):
    """Base class for all library errors."""

    code = "Error"
    exit_code = 2

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(detail)

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}" if self.detail else self.code


class MissingManifestError(XferselError):
    code = "MissingManifest"


class ShapeMismatchError(XferselError):
    code = "ShapeMismatch"


class CorruptBinaryError(XferselError):
    code = "CorruptBinary"


class NonFiniteFeatureError(XferselError):
    code = "NonFiniteFeature"


class IoFailureError(XferselError):
    code = "IoFailure"


class EmptyFeatureSetError(XferselError):
    code = "EmptyFeatureSet"


class EmptyImageError(XferselError):
    code = "EmptyImage"


class EmptyLabelSetError(XferselError):
    code = "EmptyLabelSet"


class DegenerateInputError(XferselError):
    code = "DegenerateInput"


class DimensionMismatchError(XferselError):
    code = "DimensionMismatch"


class NonFiniteCostError(XferselError):
    code = "NonFiniteCost"


class LengthMismatchError(XferselError):
    code = "LengthMismatch"


class DuplicateTaskIdError(XferselError):
    code = "DuplicateTaskId"


class NonFiniteScoreError(XferselError):
    code = "NonFiniteScore"


class IdSetMismatchError(XferselError):
    code = "IdSetMismatch"


class KOutOfRangeError(XferselError):
    code = "KOutOfRange"


class UnknownTaskError(XferselError):
    code = "UnknownTask"


class NoCompatibleSourceError(XferselError):
    code = "NoCompatibleSource"
    exit_code = 3


class MissingLabelsError(XferselError):
    code = "MissingLabels"


class MissingFeaturesError(XferselError):
    code = "MissingFeatures"


class InvalidSpecError(XferselError):
    code = "InvalidSpec"
