"""Exception types raised across the package.

Every failure mode that callers may want to catch separately gets its own
class; all inherit from FlowNoiseError so `except FlowNoiseError` catches
anything this package raises deliberately.
"""


class FlowNoiseError(Exception):
    pass


class FlowFormatError(FlowNoiseError):
    """Base for malformed .flo byte sequences."""


class BadMagic(FlowFormatError):
    pass


class TruncatedPayload(FlowFormatError):
    pass


class NonPositiveDims(FlowFormatError):
    pass


class OversizeDims(FlowFormatError):
    pass


class UnknownFlowPresent(FlowNoiseError):
    """Flow contains sentinel-marked (unknown) components."""


class NonFiniteFlow(FlowNoiseError):
    pass


class DimensionMismatch(FlowNoiseError):
    pass


class DegenerateInput(FlowNoiseError):
    pass


class ZeroDimension(FlowNoiseError):
    pass


class FrameTooSmall(FlowNoiseError):
    pass


class EmptyClip(FlowNoiseError):
    pass


class SubsetTooSmall(FlowNoiseError):
    pass


class NotEnoughEligibleClasses(FlowNoiseError):
    pass


class DuplicateClipId(FlowNoiseError):
    pass
