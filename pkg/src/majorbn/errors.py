"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`BayesNetError`
and carries an ``exit_code`` that the command-line front end returns verbatim.
"""

from __future__ import annotations


class BayesNetError(Exception):
    exit_code = 1


class InvalidArgument(BayesNetError, ValueError):
    exit_code = 2


class InputFileError(BayesNetError):
    """A file could not be opened or read."""

    exit_code = 3


# -- network construction ---------------------------------------------------


class NetworkError(BayesNetError):
    exit_code = 10


class CycleDetected(NetworkError):
    exit_code = 11


class CptShapeMismatch(NetworkError):
    exit_code = 12


class UnnormalizedRow(NetworkError):
    exit_code = 13


class DuplicateName(NetworkError):
    exit_code = 14


class InvalidProbability(NetworkError):
    exit_code = 15


class UnknownVariable(NetworkError, KeyError):
    exit_code = 16

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class UnknownState(NetworkError):
    exit_code = 17


# -- file formats -------------------------------------------------------------


class PositionedError(BayesNetError):
    """Parse failure that knows where in the input it happened."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column

    @property
    def position(self) -> tuple[int, int]:
        return self.line, self.column


class NetSyntaxError(PositionedError):
    exit_code = 20


class MalformedXml(PositionedError):
    exit_code = 21


class UnsupportedElement(PositionedError):
    exit_code = 22


# -- inference ----------------------------------------------------------------


class InferenceError(BayesNetError):
    exit_code = 30


class StateSpaceTooLarge(InferenceError):
    exit_code = 31


class ZeroProbabilityEvidence(InferenceError):
    exit_code = 32


class NoAcceptedSamples(InferenceError):
    exit_code = 33


class AllZeroWeights(InferenceError):
    exit_code = 34


# -- survey data --------------------------------------------------------------


class SurveyError(BayesNetError):
    exit_code = 40


class MalformedRow(SurveyError):
    exit_code = 41


class EmptyFile(SurveyError):
    exit_code = 42


class ScoreOutOfRange(SurveyError):
    exit_code = 43


class NoObservations(SurveyError):
    exit_code = 44


class BadFrequencyVector(SurveyError):
    exit_code = 45


class SchemaMismatch(SurveyError):
    exit_code = 46


class DatasetTooSmall(SurveyError):
    exit_code = 47


class EmptyTestSet(SurveyError):
    exit_code = 48
