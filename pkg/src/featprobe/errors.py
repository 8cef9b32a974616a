"""Exception types shared across the toolkit.

Class names double as stable error codes: the CLI serializes the class
name into its JSON error envelope, so renaming a class is a breaking
change to the command-line contract.
"""


class FeatProbeError(Exception):
    """Base class for all toolkit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- tensor_store ---------------------------------------------------------

class BadMagic(FeatProbeError):
    pass


class UnsupportedVersion(FeatProbeError):
    pass


class UnsupportedDtype(FeatProbeError):
    pass


class TruncatedPayload(FeatProbeError):
    pass


class NonFiniteValue(FeatProbeError):
    pass


class IoFailure(FeatProbeError):
    pass


class BadManifest(FeatProbeError):
    pass


class MissingStride(FeatProbeError):
    def __init__(self, stride: int):
        super().__init__(f"manifest is missing stride {stride}")
        self.stride = stride


class ShapeMismatch(FeatProbeError):
    pass


class FileNotFound(FeatProbeError):
    pass


# --- numerics --------------------------------------------------------------

class DegenerateInput(FeatProbeError):
    pass


class SingleCluster(FeatProbeError):
    pass


class LengthMismatch(FeatProbeError):
    pass


class ZeroVariance(FeatProbeError):
    pass


# --- image_ops -------------------------------------------------------------

class TooSmall(FeatProbeError):
    pass


class ShiftTooLarge(FeatProbeError):
    pass


class BadRadii(FeatProbeError):
    pass


# --- metrics ---------------------------------------------------------------

class GridTooFine(FeatProbeError):
    pass


class NoValidSegments(FeatProbeError):
    pass


# --- planning --------------------------------------------------------------

class TooFewProfiles(FeatProbeError):
    pass


class SameEncoder(FeatProbeError):
    pass


# --- synthesis -------------------------------------------------------------

class BadSpec(FeatProbeError):
    pass


class TooLarge(FeatProbeError):
    pass
