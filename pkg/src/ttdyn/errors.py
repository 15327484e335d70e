"""Exception hierarchy shared by all ttdyn modules."""


class TtdynError(Exception):
    """Base class for every error raised by ttdyn."""


class InvalidLetter(TtdynError, ValueError):
    pass


class RankMismatch(TtdynError, ValueError):
    pass


class NotSurjective(TtdynError):
    pass


class AllTrivial(TtdynError, ValueError):
    pass


class TrivialClass(TtdynError, ValueError):
    pass


class NotMalnormal(TtdynError):
    pass


class NotComposable(TtdynError, ValueError):
    pass


class EmptyPath(TtdynError, ValueError):
    pass


class NotIrreducible(TtdynError):
    pass


class BadStratum(TtdynError, ValueError):
    pass


class NotEG(TtdynError):
    pass


class CapExceeded(TtdynError):
    pass


class EmptyNeighborhood(TtdynError):
    pass


class EmptyLaminationSet(TtdynError):
    pass


class DisjointnessFailed(TtdynError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class VerificationFailed(TtdynError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class SearchBudgetExceeded(TtdynError):
    pass


class EmptySample(TtdynError, ValueError):
    pass


class PreconditionFailed(TtdynError):
    pass


class BadConjugator(TtdynError):
    pass


class NotInvariant(TtdynError):
    pass


class ParseError(TtdynError):
    pass


class ValidationError(TtdynError):
    pass
