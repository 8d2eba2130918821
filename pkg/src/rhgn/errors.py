"""Exception types shared across the package."""


class LengthMismatch(ValueError):
    """Pattern length does not match the pyramid's configured length."""


class EvenLength(ValueError):
    """Pyramids require an odd pattern length."""


class NonFinite(ValueError):
    """An observation contained NaN or infinity."""


class EmptyCorpus(ValueError):
    """Training requires a non-empty corpus."""


class LabelMismatch(ValueError):
    """An observation cited an environment label unknown to the bundle."""


class Untrained(RuntimeError):
    """The classifier has no probability tables yet."""


class IoFailure(OSError):
    """A bundle or trace file could not be read or written."""


class VersionMismatch(IoFailure):
    """A bundle file was written by an incompatible format version."""


class CorruptBundle(IoFailure):
    """A bundle file failed its checksum or structural checks."""


class DimensionMismatch(ValueError):
    """Probability tuples of different dimensions were mixed."""


class NothingToShare(RuntimeError):
    """No local samples recorded since the last broadcast."""


class EmptyCollection(RuntimeError):
    """Behaviour selection requested on an empty belief collection."""


class DomainError(ValueError):
    """Fitness arguments outside their allowed bounds."""


class UnknownId(KeyError):
    """Not a catalogued designed-environment id."""


class GenerationFailure(RuntimeError):
    """Environment generation exhausted its rejection budget."""


class EmptySample(ValueError):
    """Statistical tests require non-empty samples."""


class EmptyConfusion(ValueError):
    """A confusion matrix with all-zero counts."""


class MisalignedRuns(ValueError):
    """Per-instance result lists do not line up."""


class UnknownTruth(ValueError):
    """Error-rate curves need a known true environment."""


class UntrainedBundle(Untrained):
    """A classifier-driven controller was started without a trained bundle."""


class BudgetExhausted(RuntimeError):
    """Per-step send/receive budget already used."""


class BufferFull(RuntimeError):
    """Receiver buffer cannot take another packet."""
