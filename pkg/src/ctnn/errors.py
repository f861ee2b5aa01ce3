"""Exception hierarchy shared by all ctnn modules."""


class CTNNError(Exception):
    """Base class for every compute error raised by this package."""


class OutOfRange(CTNNError):
    pass


class InvalidGrid(CTNNError):
    pass


class InvalidNetwork(CTNNError):
    pass


class CyclicNetwork(InvalidNetwork):
    pass


class ArityMismatch(CTNNError):
    pass


class InvalidSpec(CTNNError):
    pass


class NonBooleanInput(CTNNError):
    pass


class Diverged(CTNNError):
    pass


class Blocked(CTNNError):
    """Invariant violated and no transition is enabled."""


class NondeterministicChoice(CTNNError):
    pass


class UnknownVariable(CTNNError):
    pass


class FileFormatError(CTNNError):
    pass
