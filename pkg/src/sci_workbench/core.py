"""Computational problems, query oracles, general algorithms and towers.

The model: an input is a finite symbolic description that carries both an
exact reference oracle (used by the target map and by verification) and a
query interface.  Algorithm protocols never see the input itself; they are
pure functions of the answer sequence received so far.  That makes the
locality law of general algorithms hold by construction, and
:func:`check_locality` exists as a regression guard against protocols that
smuggle input identity some other way.

Limits are never computed.  Towers are evaluated at finite multi-indices,
and :func:`probe_convergence` reports finite-stage stabilization instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Sequence

from .errors import (
    BudgetExceeded,
    FactorizationMismatch,
    IndexArityMismatch,
    ProtocolViolation,
    UnknownQuery,
)

# Structured query ids are plain tuples, e.g. ("ev", Fraction(1, 2)) or
# ("mu", 3, 3).  Algorithms only ever name finitely many of them, which is
# how countably (or uncountably) indexed families stay addressable.
QueryId = tuple

#: Hard cap on adaptive protocols; guarantees every run terminates.
DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class Ask:
    """Protocol step: emit a query id and wait for its value."""

    query_id: QueryId


@dataclass(frozen=True)
class Output:
    """Protocol step: stop and output a point of the output space."""

    value: Any


@dataclass(frozen=True)
class Query:
    """A single evaluation map, resolved from a family by its id."""

    id: QueryId
    evaluate: Callable[[Any], Any]


class QueryFamily:
    """A (possibly infinite) family of evaluation maps addressed by structured ids.

    ``resolver`` maps a query id to an evaluation callable, or ``None`` when
    the id is not a member.  ``canonical_ids`` is the finite,
    catalog-accessible sample used by default for verification sampling and
    consistency checks; ``sampler`` may widen that to a rule-based draw.
    A family constructed via :meth:`empty` has no members at all, which the
    appendix constructions rely on.
    """

    def __init__(
        self,
        name: str,
        resolver: Callable[[QueryId], Callable[[Any], Any] | None] | None,
        *,
        canonical_ids: Iterable[QueryId] = (),
        sampler: Callable[[Any], QueryId] | None = None,
        separators: Callable[[Any, Any], Iterable[QueryId]] | None = None,
    ):
        self.name = name
        self._resolver = resolver
        self.canonical_ids = tuple(canonical_ids)
        self._sampler = sampler
        self._separators = separators

    @classmethod
    def empty(cls, name: str) -> "QueryFamily":
        return cls(name, None)

    @property
    def is_empty(self) -> bool:
        return self._resolver is None

    def resolve(self, query_id: QueryId) -> Query:
        if self._resolver is not None:
            evaluate = self._resolver(query_id)
            if evaluate is not None:
                return Query(query_id, evaluate)
        raise UnknownQuery(f"{query_id!r} is not a member of {self.name}")

    def __contains__(self, query_id: QueryId) -> bool:
        return self._resolver is not None and self._resolver(query_id) is not None

    def sample_ids(self, rng, count: int) -> list[QueryId]:
        """Deterministic-in-seed draw of member ids for verification."""
        if self.is_empty:
            return []
        if self._sampler is not None:
            return [self._sampler(rng) for _ in range(count)]
        if not self.canonical_ids:
            return []
        return [rng.choice(self.canonical_ids) for _ in range(count)]

    def separator_ids(self, input_a, input_b) -> Iterator[QueryId]:
        """Candidate ids for separating two catalog inputs (consistency checks)."""
        if self._separators is not None:
            yield from self._separators(input_a, input_b)
        else:
            yield from self.canonical_ids


class InputCatalog:
    """Finite description set for a problem's input class, plus a sampler.

    ``admits`` widens membership beyond the listed descriptions to the whole
    input class the problem is defined on (e.g. encoded inputs produced by a
    reduction remain admissible).  The listed members are what tests and
    consistency checks iterate over.
    """

    def __init__(
        self,
        members: Iterable[Any],
        *,
        admits: Callable[[Any], bool] | None = None,
        sampler: Callable[[Any], Any] | None = None,
    ):
        self.members = tuple(members)
        self._admits = admits
        self._sampler = sampler

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def admits(self, candidate) -> bool:
        if self._admits is not None:
            return self._admits(candidate)
        return candidate in self.members

    def sample(self, rng):
        if self._sampler is not None:
            return self._sampler(rng)
        return rng.choice(self.members)


@dataclass(frozen=True)
class OutputSpace:
    """A metric output space, described by its distance on sampled points."""

    name: str
    distance: Callable[[Any, Any], Any]
    carrier: tuple | None = None  # finite carriers only; None when unbounded


@dataclass(frozen=True)
class Problem:
    """A computational problem: target map, input catalog, metric output space, query family."""

    name: str
    inputs: InputCatalog
    output_space: OutputSpace
    target: Callable[[Any], Any]
    queries: QueryFamily
    params: Any = None  # family-specific construction data, for reports


@dataclass(frozen=True)
class QueryTrace:
    """Ordered (query id, value) pairs of one completed run."""

    steps: tuple[tuple[QueryId, Any], ...]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def ids(self) -> tuple[QueryId, ...]:
        return tuple(qid for qid, _ in self.steps)

    @property
    def values(self) -> tuple:
        return tuple(value for _, value in self.steps)


@dataclass(frozen=True)
class GeneralAlgorithm:
    """An adaptive protocol that reads its input only through queries.

    ``protocol`` maps the answers received so far (a read-only sequence) to
    the next :class:`Ask` or the final :class:`Output`.  Because the input is
    not an argument, two inputs with identical answer sequences are
    indistinguishable to the protocol.
    """

    name: str
    protocol: Callable[[Sequence[Any]], Ask | Output]
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be a positive integer")


def fixed_query_algorithm(
    name: str,
    query_ids: Sequence[QueryId],
    finish: Callable[[tuple], Any],
    budget: int = DEFAULT_BUDGET,
) -> GeneralAlgorithm:
    """Protocol that asks ``query_ids`` in order, then outputs ``finish(answers)``."""
    ids = tuple(query_ids)
    if not ids:
        raise ValueError("a general algorithm must ask at least one query")

    def protocol(answers: Sequence[Any]):
        if len(answers) < len(ids):
            return Ask(ids[len(answers)])
        return Output(finish(tuple(answers)))

    return GeneralAlgorithm(name, protocol, budget)


def constant_algorithm(name: str, query_id: QueryId, value) -> GeneralAlgorithm:
    """Protocol that asks a single query (for a nonempty trace) and outputs ``value``."""
    return fixed_query_algorithm(name, (query_id,), lambda _: value)


def run_algorithm(alg: GeneralAlgorithm, problem: Problem, input) -> tuple[Any, QueryTrace]:
    """Drive ``alg`` against ``problem``'s query oracle on ``input``.

    Returns the protocol's output and the exact ordered trace.  Pure in
    (protocol, input): repeated runs are bit-identical.
    """
    if not problem.inputs.admits(input):
        raise ValueError(f"input {input!r} is not admissible for {problem.name}")
    answers: list = []
    steps: list[tuple[QueryId, Any]] = []
    while True:
        step = alg.protocol(answers)
        if isinstance(step, Output):
            if not steps:
                raise ProtocolViolation(
                    f"{alg.name} finished without querying; completed runs need a nonempty query set"
                )
            return step.value, QueryTrace(tuple(steps))
        if not isinstance(step, Ask):
            raise ProtocolViolation(f"{alg.name} emitted {step!r}, expected Ask or Output")
        if len(steps) >= alg.budget:
            raise BudgetExceeded(f"{alg.name} exceeded its budget of {alg.budget} queries")
        value = problem.queries.resolve(step.query_id).evaluate(input)
        steps.append((step.query_id, value))
        answers.append(value)


@dataclass(frozen=True)
class LocalityReport:
    """Outcome of replaying one input's answers against another's trace."""

    passed: bool
    premise_holds: bool
    detail: str


def check_locality(alg: GeneralAlgorithm, problem: Problem, input_a, input_b) -> LocalityReport:
    """Check the defining implication of general algorithms on a catalog pair.

    If ``input_b`` answers every query in ``input_a``'s trace identically,
    the two runs must produce the same output and the same emitted query
    sequence.  Protocols built here cannot fail this (they never see the
    input), so a failure indicates a protocol that leaks input identity.
    """
    out_a, trace_a = run_algorithm(alg, problem, input_a)
    for qid, value in trace_a.steps:
        if problem.queries.resolve(qid).evaluate(input_b) != value:
            return LocalityReport(True, False, f"inputs disagree on {qid!r}; implication is vacuous")
    out_b, trace_b = run_algorithm(alg, problem, input_b)
    if trace_b.ids != trace_a.ids:
        return LocalityReport(False, True, "emitted query sequences differ on agreeing inputs")
    if problem.output_space.distance(out_a, out_b) != 0:
        return LocalityReport(False, True, "outputs differ on agreeing inputs")
    return LocalityReport(True, True, "agreeing inputs produced identical runs")


@dataclass(frozen=True)
class Tower:
    """A height-``k`` family of general algorithms indexed by multi-indices.

    ``stages`` receives the multi-index ``(n_k, ..., n_1)`` (outermost level
    first; the empty tuple at height 0).  For height 0 the single algorithm
    is required to equal the target on the catalog; that is certified by
    :func:`finite_query_factorization`, not assumed here.
    """

    name: str
    height: int
    stages: Callable[[tuple[int, ...]], GeneralAlgorithm]

    def stage(self, multi_index: Sequence[int]) -> GeneralAlgorithm:
        idx = tuple(multi_index)
        if len(idx) != self.height:
            raise IndexArityMismatch(
                f"{self.name} has height {self.height}, got multi-index of length {len(idx)}"
            )
        return self.stages(idx)


def evaluate_tower(tower: Tower, multi_index: Sequence[int], problem: Problem, input):
    """Output of the stage algorithm at one finite multi-index."""
    value, _ = run_algorithm(tower.stage(multi_index), problem, input)
    return value


@dataclass(frozen=True)
class ConvergenceReport:
    """Finite-stage stabilization record for the outermost tower level."""

    stages: tuple
    values: tuple
    distances: tuple
    tol: Any
    tail: int
    stabilized: bool
    final: Any


def probe_convergence(
    tower: Tower,
    problem: Problem,
    input,
    schedule: Sequence,
    tol,
    tail: int = 1,
) -> ConvergenceReport:
    """Probe iterated limits along a finite schedule, innermost level first.

    ``schedule`` is either one increasing stage list applied to every level
    or one list per level (outermost first).  For height >= 2, the inner
    levels are swept over their full schedule for each outer stage and the
    deepest value stands in for the inner limit.  Non-stabilization is a
    report outcome, not an error.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if tower.height == 0:
        value = evaluate_tower(tower, (), problem, input)
        return ConvergenceReport(((),), (value,), (), tol, tail, True, value)

    levels = _per_level_schedules(schedule, tower.height)

    def resolved(prefix: tuple[int, ...]):
        level = len(prefix)
        if level == tower.height:
            return evaluate_tower(tower, prefix, problem, input)
        last = None
        for n in levels[level]:
            last = resolved(prefix + (n,))
        return last

    values = [resolved((n,)) for n in levels[0]]
    distance = problem.output_space.distance
    distances = tuple(distance(a, b) for a, b in zip(values, values[1:]))
    stabilized = len(distances) >= tail and all(d < tol for d in distances[-tail:])
    return ConvergenceReport(
        tuple(levels[0]), tuple(values), distances, tol, tail, stabilized, values[-1]
    )


def _per_level_schedules(schedule: Sequence, height: int) -> list[list[int]]:
    entries = list(schedule)
    if not entries:
        raise ValueError("schedule must be nonempty")
    if all(isinstance(e, int) for e in entries):
        return [entries] * height
    levels = [list(e) for e in entries]
    if len(levels) != height or any(not lvl for lvl in levels):
        raise ValueError("need one nonempty stage list per tower level")
    return levels


def finite_query_factorization(problem: Problem, query_ids: Sequence[QueryId], table) -> Tower:
    """Certify that the target factors through finitely many fixed queries.

    ``table`` maps the tuple of query values to the output (a mapping or a
    callable).  The factorization identity is checked eagerly on every
    catalog input; on success the returned height-0 tower's single algorithm
    asks exactly the given queries in order and outputs via the table.
    """
    ids = tuple(query_ids)
    if not ids:
        raise ValueError("a factorization needs at least one query")
    queries = [problem.queries.resolve(qid) for qid in ids]

    if callable(table):
        lookup = table
    else:
        def lookup(key, _table=table):
            try:
                return _table[key]
            except KeyError as exc:
                raise FactorizationMismatch(f"no table row for query values {key!r}") from exc

    distance = problem.output_space.distance
    for member in problem.inputs:
        key = tuple(q.evaluate(member) for q in queries)
        produced = lookup(key)
        if distance(problem.target(member), produced) != 0:
            raise FactorizationMismatch(
                f"table output {produced!r} differs from target on {member!r}"
            )

    alg = fixed_query_algorithm(f"table[{problem.name}]", ids, lookup)
    return Tower(f"factorization[{problem.name}]", 0, lambda _idx, _alg=alg: _alg)


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of checking the separating-query condition on a finite catalog."""

    pairs_checked: int
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures


def check_consistency(problem: Problem, *, max_candidates: int = 4096) -> ConsistencyReport:
    """Check that some catalog-accessible query separates every target-distinct pair."""
    distance = problem.output_space.distance
    members = problem.inputs.members
    checked = 0
    failures = []
    for a, b in itertools.combinations(members, 2):
        if distance(problem.target(a), problem.target(b)) == 0:
            continue
        checked += 1
        for qid in itertools.islice(problem.queries.separator_ids(a, b), max_candidates):
            query = problem.queries.resolve(qid)
            if query.evaluate(a) != query.evaluate(b):
                break
        else:
            failures.append((a, b))
    return ConsistencyReport(checked, tuple(failures))
