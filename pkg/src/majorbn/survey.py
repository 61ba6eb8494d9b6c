"""Questionnaire data: loading, summary statistics, CPT learning, synthetic
students and the accuracy harness.

CSV dialect: UTF-8, comma separated, a header row of variable names, one
student per row, an empty cell meaning *missing*, state labels unquoted.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np

from .errors import (
    BadFrequencyVector,
    DatasetTooSmall,
    EmptyFile,
    EmptyTestSet,
    InputFileError,
    InvalidArgument,
    MalformedRow,
    NoObservations,
    NoAcceptedSamples,
    AllZeroWeights,
    SchemaMismatch,
    ScoreOutOfRange,
    UnknownState,
)
from .inference import ALGORITHMS, DEFAULT_EPSILON, derive_seed, forward_sample, map_state, posterior
from .network import QUAD_STATES, Network, QuadScale, Variable

MISSING = None
TARGET = "major"


@dataclass(frozen=True, eq=False)
class SurveyDataset:
    """Categorical records stored as state indices, ``-1`` for a missing cell.

    Column ``j`` of ``codes`` holds ``schema[j]``.
    """

    schema: tuple[Variable, ...]
    codes: np.ndarray

    def __post_init__(self):
        schema = tuple(self.schema)
        codes = np.array(self.codes, dtype=np.int64).reshape(-1, len(schema))
        codes.setflags(write=False)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_rows(cls, schema: Sequence[Variable], rows: Iterable[Mapping[str, str | None]]) -> "SurveyDataset":
        schema = tuple(schema)
        codes = []
        for row in rows:
            codes.append([
                -1 if row.get(v.name) is MISSING else v.index(row[v.name]) for v in schema
            ])
        return cls(schema, np.array(codes, dtype=np.int64).reshape(-1, len(schema)))

    def __len__(self) -> int:
        return self.codes.shape[0]

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.schema)

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise SchemaMismatch(f"dataset has no column {name!r}") from None

    def row(self, i: int) -> dict[str, str | None]:
        return {
            v.name: (MISSING if c < 0 else v.states[c]) for v, c in zip(self.schema, self.codes[i])
        }

    @property
    def rows(self) -> list[dict[str, str | None]]:
        return [self.row(i) for i in range(len(self))]

    def take(self, indices: Sequence[int]) -> "SurveyDataset":
        return SurveyDataset(self.schema, self.codes[np.asarray(indices, dtype=np.int64)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SurveyDataset):
            return NotImplemented
        return self.schema == other.schema and bool(np.array_equal(self.codes, other.codes))

    __hash__ = None  # type: ignore[assignment]


def _schema_of(schema: Network | Sequence[Variable]) -> tuple[Variable, ...]:
    if isinstance(schema, Network):
        return schema.variables
    return tuple(schema)


# -- score discretization -----------------------------------------------------


@dataclass(frozen=True)
class ScoreBinning:
    """Four bins over the 0-20 grade scale, mapped to the quad scale in order."""

    edges: tuple[float, ...] = (0.0, 10.0, 14.0, 17.0, 20.0)

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if len(edges) != 5:
            raise InvalidArgument("score binning needs exactly 5 edges (4 bins)")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise InvalidArgument("score bin edges must be strictly increasing")
        if edges[0] != 0.0 or edges[-1] != 20.0:
            raise InvalidArgument("score bins must cover [0, 20]")

    @classmethod
    def parse(cls, text: str) -> "ScoreBinning":
        try:
            return cls(tuple(float(x) for x in text.split(",")))
        except ValueError:
            raise InvalidArgument(f"cannot parse score bin edges {text!r}") from None


DEFAULT_BINNING = ScoreBinning()


def discretize_scores(raw_score: float, binning: ScoreBinning = DEFAULT_BINNING) -> str:
    """Map a 0-20 grade to a quad-scale state.

    Bins are left-closed and right-open, except the last, which includes 20.
    """
    edges = binning.edges
    if not (math.isfinite(raw_score) and edges[0] <= raw_score <= edges[-1]):
        raise ScoreOutOfRange(f"score {raw_score} outside [{edges[0]:g}, {edges[-1]:g}]")
    for i in range(4):
        if raw_score < edges[i + 1]:
            return QUAD_STATES[i]
    return QUAD_STATES[-1]


# -- CSV ---------------------------------------------------------------------


def _as_number(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_responses(
    source: str | Path | TextIO,
    schema: Network | Sequence[Variable],
    binning: ScoreBinning | None = None,
) -> SurveyDataset:
    """Read questionnaire responses.

    The header may name any subset of the schema's variables.  When a
    ``binning`` is supplied, numeric cells in quad-scale columns are treated
    as raw 0-20 scores and discretized.

    Raises:
        EmptyFile, MalformedRow, UnknownState, SchemaMismatch, ScoreOutOfRange.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8", newline="") as fh:
                text = fh.read()
        except (OSError, UnicodeDecodeError) as exc:
            raise InputFileError(f"cannot read {source}: {exc}") from None
    else:
        text = source.read()
    by_name = {v.name: v for v in _schema_of(schema)}
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    while header is not None and not any(h.strip() for h in header):
        header = next(reader, None)
    if header is None:
        raise EmptyFile("no header row")
    header = [h.strip() for h in header]
    for h in header:
        if h not in by_name:
            raise SchemaMismatch(f"column {h!r} is not a network variable")
    if len(set(header)) != len(header):
        raise SchemaMismatch("duplicate column in header")
    columns = [by_name[h] for h in header]

    codes = []
    for cells in reader:
        if not cells:
            continue
        line = reader.line_num
        if len(cells) != len(columns):
            raise MalformedRow(f"line {line}: {len(cells)} cells, header has {len(columns)}")
        row = []
        for var, cell in zip(columns, cells):
            cell = cell.strip()
            if cell == "":
                row.append(-1)
                continue
            if binning is not None and QuadScale.is_quad(var.states):
                score = _as_number(cell)
                if score is not None:
                    cell = discretize_scores(score, binning)
            try:
                row.append(var.index(cell))
            except UnknownState as exc:
                raise UnknownState(f"line {line}, column {var.name!r}: {exc}") from None
        codes.append(row)
    return SurveyDataset(tuple(columns), np.array(codes, dtype=np.int64).reshape(-1, len(columns)))


def dataset_to_csv(dataset: SurveyDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.columns)
    for codes in dataset.codes:
        writer.writerow(["" if c < 0 else v.states[c] for v, c in zip(dataset.schema, codes)])
    return buf.getvalue()


# -- questionnaire statistics -------------------------------------------------


@dataclass(frozen=True)
class SpectrumStats:
    factor: str
    frequencies: tuple[float, float, float, float]  # very_low, low, much, very_much
    average_effect: float


def spectrum_frequency(dataset: SurveyDataset, factor: str) -> tuple[float, float, float, float]:
    """Percentage of answers at each quad level, missing answers excluded."""
    j = dataset.column_index(factor)
    if not QuadScale.is_quad(dataset.schema[j].states):
        raise InvalidArgument(f"{factor!r} is not a quad-scale factor")
    col = dataset.codes[:, j]
    col = col[col >= 0]
    if col.size == 0:
        raise NoObservations(f"no answers recorded for {factor!r}")
    counts = np.bincount(col, minlength=4)
    return tuple(100.0 * float(c) / col.size for c in counts)


def average_effect(frequencies: Sequence[float]) -> float:
    """Weighted mean of the quad-level percentages with weights 1..4, in [1, 4]."""
    freqs = [float(f) for f in frequencies]
    if len(freqs) != 4 or any(not math.isfinite(f) or f < 0 for f in freqs):
        raise BadFrequencyVector(f"expected four non-negative percentages, got {frequencies!r}")
    if abs(math.fsum(freqs) - 100.0) > 1e-6:
        raise BadFrequencyVector(f"percentages sum to {math.fsum(freqs)}, not 100")
    return math.fsum(f * w for f, w in zip(freqs, (1, 2, 3, 4))) / 100.0


def factor_report(dataset: SurveyDataset) -> list[SpectrumStats]:
    """Statistics for every quad-scale factor, highest average effect first."""
    if len(dataset) == 0:
        raise NoObservations("dataset is empty")
    stats = []
    for v in dataset.schema:
        if not QuadScale.is_quad(v.states):
            continue
        freqs = spectrum_frequency(dataset, v.name)
        stats.append(SpectrumStats(v.name, freqs, average_effect(freqs)))
    if not stats:
        raise NoObservations("dataset has no quad-scale factor columns")
    return sorted(stats, key=lambda s: -s.average_effect)


# -- learning and synthesis ---------------------------------------------------


def learn_cpts(structure: Network, dataset: SurveyDataset, alpha: float = 1.0) -> Network:
    """Maximum-likelihood CPTs with additive (Laplace) smoothing.

    A row is counted for a CPT only if the child and all its parents are
    observed.  With ``alpha = 0`` an unseen parent configuration gets a
    uniform row.
    """
    if not (math.isfinite(alpha) and alpha >= 0):
        raise InvalidArgument("alpha must be a finite number >= 0")
    cols = {}
    for v in structure.variables:
        if v.name not in dataset.columns:
            raise SchemaMismatch(f"dataset lacks network variable {v.name!r}")
        j = dataset.column_index(v.name)
        if dataset.schema[j].states != v.states:
            raise SchemaMismatch(f"column {v.name!r} has states {dataset.schema[j].states}, network has {v.states}")
        cols[v.name] = j

    tables = {}
    for v in structure.variables:
        parents = structure.parents(v.name)
        involved = [cols[p] for p in parents] + [cols[v.name]]
        data = dataset.codes[:, involved]
        data = data[np.all(data >= 0, axis=1)]
        dims = [structure.cardinality(p) for p in parents] + [v.cardinality]
        flat = np.ravel_multi_index(data.T, dims) if data.size else np.empty(0, dtype=np.int64)
        counts = np.bincount(flat, minlength=math.prod(dims)).reshape(-1, v.cardinality).astype(float)
        counts += alpha
        totals = counts.sum(axis=1, keepdims=True)
        tables[v.name] = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 1.0 / v.cardinality)
    return structure.with_tables(tables)


def generate_synthetic(network: Network, n: int, seed: int) -> SurveyDataset:
    """``n`` complete student records forward-sampled from ``network``."""
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    return SurveyDataset(network.variables, forward_sample(network, n, seed))


def split_dataset(dataset: SurveyDataset, test_fraction: float, seed: int) -> tuple[SurveyDataset, SurveyDataset]:
    """Seeded shuffle, then ``round(n * test_fraction)`` rows go to the test set.

    Both parts keep the original row order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise InvalidArgument("test_fraction must lie in (0, 1)")
    n = len(dataset)
    n_test = int(math.floor(n * test_fraction + 0.5))
    if n_test == 0 or n_test == n:
        raise DatasetTooSmall(f"{n} rows cannot be split with test fraction {test_fraction}")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    return dataset.take(np.sort(perm[n_test:])), dataset.take(np.sort(perm[:n_test]))


# -- accuracy harness ---------------------------------------------------------


@dataclass(frozen=True)
class EvaluationRun:
    run_index: int
    algorithm: str
    accuracy_percent: float
    seed: int
    samples_per_query: int
    correct: int
    evaluated: int
    failed: int  # rows where the engine raised, counted as incorrect


def evaluate_accuracy(
    network: Network,
    test_set: SurveyDataset,
    algorithm: str,
    samples_per_query: int = 50000,
    seed: int = 1,
    target: str = TARGET,
    epsilon: float = DEFAULT_EPSILON,
    run_index: int = 1,
) -> EvaluationRun:
    """Predict ``target`` for each test row from all its other observed cells.

    The sampler seed for row ``i`` is ``derive_seed(seed, i)``, so rows can be
    processed in any order with the same outcome.
    """
    if algorithm not in ALGORITHMS:
        raise InvalidArgument(f"unknown algorithm {algorithm!r}")
    if len(test_set) == 0:
        raise EmptyTestSet("no rows to evaluate")
    network.variable(target)
    t = test_set.column_index(target)
    if np.any(test_set.codes[:, t] < 0):
        raise InvalidArgument(f"target {target!r} is missing in some test rows")
    features = [(j, v) for j, v in enumerate(test_set.schema) if v.name != target and v.name in network]

    correct = failed = 0
    for i, codes in enumerate(test_set.codes):
        evidence = {v.name: v.states[codes[j]] for j, v in features if codes[j] >= 0}
        try:
            post, _ = posterior(
                network, evidence, target, algorithm, samples_per_query, derive_seed(seed, i), epsilon
            )
        except (NoAcceptedSamples, AllZeroWeights):
            failed += 1
            continue
        if map_state(post) == test_set.schema[t].states[codes[t]]:
            correct += 1
    n = len(test_set)
    return EvaluationRun(run_index, algorithm, 100.0 * correct / n, seed, samples_per_query, correct, n, failed)


def run_evaluation(
    network: Network,
    dataset: SurveyDataset,
    runs: int = 9,
    algorithms: Sequence[str] = ("likelihood", "logic", "epis", "exact"),
    samples_per_query: int = 50000,
    seed: int = 1,
    test_fraction: float = 0.3,
    alpha: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
    target: str = TARGET,
    learn: bool = True,
    split_seed: int | None = None,
) -> list[EvaluationRun]:
    """Repeated split / learn / evaluate protocol.

    Run ``r`` (1-based) uses seed ``seed + r - 1`` for sampling and, unless
    ``split_seed`` pins it, for the train/test split.  With ``learn`` the CPTs
    are re-estimated from the training part; otherwise ``network`` is used
    as given.
    """
    if runs < 1:
        raise InvalidArgument("runs must be >= 1")
    results = []
    for r in range(1, runs + 1):
        run_seed = seed + r - 1
        train, test = split_dataset(dataset, test_fraction, run_seed if split_seed is None else split_seed)
        model = learn_cpts(network, train, alpha) if learn else network
        for algorithm in algorithms:
            results.append(
                evaluate_accuracy(model, test, algorithm, samples_per_query, run_seed, target, epsilon, r)
            )
    return results


EVALUATION_COLUMNS = (
    "run", "algorithm", "accuracy_percent", "correct", "evaluated", "failed", "seed", "samples_per_query",
)

ALGORITHM_LABELS = {
    "likelihood": "Likelihood Sampling",
    "logic": "Logic Sampling",
    "epis": "EPIS Sampling",
    "exact": "Exact (VE)",
}


def evaluation_csv(results: Sequence[EvaluationRun]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EVALUATION_COLUMNS)
    for r in results:
        writer.writerow([
            r.run_index, r.algorithm, f"{r.accuracy_percent:.4f}", r.correct, r.evaluated, r.failed,
            r.seed, r.samples_per_query,
        ])
    return buf.getvalue()


def evaluation_table(results: Sequence[EvaluationRun]) -> str:
    """Algorithm-by-run accuracy matrix for people to read."""
    runs = sorted({r.run_index for r in results})
    algorithms = list(dict.fromkeys(r.algorithm for r in results))
    cell = {(r.algorithm, r.run_index): r for r in results}
    label_width = max(len(ALGORITHM_LABELS.get(a, a)) for a in algorithms)
    head = "Algorithm".ljust(label_width) + "".join(f"{i:>8}" for i in runs) + "    mean"
    lines = [head, "-" * len(head)]
    for a in algorithms:
        accs = [cell[(a, i)].accuracy_percent for i in runs if (a, i) in cell]
        row = ALGORITHM_LABELS.get(a, a).ljust(label_width)
        row += "".join(f"{cell[(a, i)].accuracy_percent:>7.1f}%" if (a, i) in cell else " " * 8 for i in runs)
        row += f"{sum(accs) / len(accs):>7.1f}%"
        lines.append(row)
    failures = sum(r.failed for r in results)
    if failures:
        lines.append(f"({failures} queries failed to produce a posterior and were scored incorrect)")
    return "\n".join(lines) + "\n"
