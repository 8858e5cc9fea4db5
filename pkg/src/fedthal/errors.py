"""Exception types raised across the package."""


class FedThalError(Exception):
    """Base class for every error raised by fedthal."""


class HeaderMismatch(FedThalError):
    pass


class EmptyDataset(FedThalError):
    pass


class AllRowsDropped(FedThalError):
    pass


class DegenerateSplit(FedThalError):
    pass


class TooFewRecords(FedThalError):
    pass


class InvalidRange(FedThalError):
    pass


class NonFiniteValue(FedThalError):
    pass


class NegativeAge(FedThalError):
    pass


class InvalidConfig(FedThalError):
    pass


class NotADistribution(FedThalError):
    pass


class NegativeAlpha(FedThalError):
    pass


class SingleClassDataset(FedThalError):
    pass


class LengthMismatch(FedThalError):
    pass


class HeterogeneousModels(FedThalError):
    pass


class EmptyShards(FedThalError):
    pass


class ProtocolError(FedThalError):
    """Base for wire-format failures."""


class FrameTooLarge(ProtocolError):
    pass


class MalformedPayload(ProtocolError):
    pass


class UnknownType(ProtocolError):
    pass


class VersionMismatch(ProtocolError):
    pass


class PrivacyViolation(FedThalError):
    """A message type forbidden by the active mode reached the transport."""


class PipelineError(FedThalError):
    """Any failure inside run_simulation, tagged with the stage that failed."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
