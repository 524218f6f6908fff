"""Finite-query evaluation reductions and their decoder-regular refinement.

A reduction from a source problem to a target problem is an encoder on
inputs, a decoder on outputs (tagged with its declared regularity class),
and a per-target-query simulation plan: finitely many source queries plus a
combiner reproducing the target query on encoded inputs.  Verification
samples the two defining equations; decoder-class membership is a declared
tag and is never machine-verified, since continuity is not decidable from
black-box access.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from .core import (
    DEFAULT_BUDGET,
    Ask,
    GeneralAlgorithm,
    Output,
    Problem,
    QueryId,
    Tower,
)
from .errors import PlanGap, ProblemMismatch, TagIncompatible


class DecoderClass(enum.Enum):
    """Declared regularity family of a decoding map."""

    CONT = "cont"
    BOR = "bor"
    ID = "id"


_COMPOSE_TABLE = {
    (DecoderClass.CONT, DecoderClass.CONT): DecoderClass.CONT,
    (DecoderClass.BOR, DecoderClass.BOR): DecoderClass.BOR,
    (DecoderClass.CONT, DecoderClass.BOR): DecoderClass.BOR,
    (DecoderClass.BOR, DecoderClass.CONT): DecoderClass.BOR,
}


def decoder_compose_class(a: DecoderClass, b: DecoderClass, *, same_space: bool = True) -> DecoderClass:
    """Composition table for decoder class tags.

    The identity-only class composes only with itself, and only when the
    output spaces coincide; space identity is supplied by the caller because
    metric-space equality is not observable from the maps.
    """
    if a is DecoderClass.ID and b is DecoderClass.ID:
        if not same_space:
            raise TagIncompatible("identity decoders compose only over one and the same space")
        return DecoderClass.ID
    try:
        return _COMPOSE_TABLE[(a, b)]
    except KeyError:
        raise TagIncompatible(f"no composition rule for ({a.value}, {b.value})") from None


@dataclass(frozen=True)
class Decoder:
    """Decoding map from the target's output space to the source's, with its tag."""

    map: Callable[[Any], Any]
    class_tag: DecoderClass
    name: str = "decoder"


@dataclass(frozen=True)
class PlanEntry:
    """Simulation of one target query: source query ids and the combiner."""

    source_ids: tuple[QueryId, ...]
    combine: Callable[[tuple], Any]

    @property
    def width(self) -> int:
        return len(self.source_ids)


class QueryPlan:
    """Total rule from target query ids to plan entries.

    Plans are rule-based rather than extensional because target families may
    be infinite.  ``rule`` returns ``None`` for ids it does not cover.
    """

    def __init__(self, name: str, rule: Callable[[QueryId], PlanEntry | None]):
        self.name = name
        self.rule = rule

    def entry(self, query_id: QueryId) -> PlanEntry:
        entry = self.rule(query_id)
        if entry is None:
            raise PlanGap(f"plan {self.name} does not cover query {query_id!r}")
        if entry.width < 1:
            raise PlanGap(f"plan {self.name} produced an empty block for {query_id!r}")
        return entry

    def covers(self, query_id: QueryId) -> bool:
        return self.rule(query_id) is not None


@dataclass(frozen=True)
class Reduction:
    """A finite-query evaluation reduction source <= target."""

    name: str
    source: Problem
    target: Problem
    encoder: Callable[[Any], Any]
    decoder: Decoder
    plan: QueryPlan


def _take_first(values: tuple):
    return values[0]


def identity_reduction(problem: Problem) -> Reduction:
    """The reflexivity witness: identity encoder/decoder, each query simulating itself."""

    def rule(query_id: QueryId):
        if query_id in problem.queries:
            return PlanEntry((query_id,), _take_first)
        return None

    return Reduction(
        name=f"identity[{problem.name}]",
        source=problem,
        target=problem,
        encoder=lambda a: a,
        decoder=Decoder(lambda y: y, DecoderClass.CONT, "identity"),
        plan=QueryPlan("identity", rule),
    )


def compose(first: Reduction, second: Reduction) -> Reduction:
    """Blockwise composition: ``first`` (R <= Q) then ``second`` (Q <= P) gives R <= P.

    Each target query of P expands through ``second``'s plan into queries of
    Q, and each of those through ``first``'s plan into queries of R; the
    composed width is the blockwise sum of the inner widths and the combiner
    substitutes inner combiners into the outer one.
    """
    if first.target is not second.source:
        raise ProblemMismatch(
            f"{first.name} ends at {first.target.name} but {second.name} starts at {second.source.name}"
        )
    same_space = (
        first.source.output_space.name
        == first.target.output_space.name
        == second.target.output_space.name
    )
    tag = decoder_compose_class(first.decoder.class_tag, second.decoder.class_tag, same_space=same_space)

    def encoder(a, _e1=first.encoder, _e2=second.encoder):
        return _e2(_e1(a))

    def decoder_map(y, _d1=first.decoder.map, _d2=second.decoder.map):
        return _d1(_d2(y))

    def rule(query_id: QueryId):
        outer = second.plan.rule(query_id)
        if outer is None:
            return None
        blocks = []
        for mid_id in outer.source_ids:
            inner = first.plan.rule(mid_id)
            if inner is None:
                return None
            blocks.append(inner)
        source_ids = tuple(sid for block in blocks for sid in block.source_ids)
        widths = tuple(block.width for block in blocks)

        def combine(values: tuple, _blocks=tuple(blocks), _widths=widths, _outer=outer):
            position = 0
            middles = []
            for block, width in zip(_blocks, _widths):
                middles.append(block.combine(values[position : position + width]))
                position += width
            return _outer.combine(tuple(middles))

        return PlanEntry(source_ids, combine)

    return Reduction(
        name=f"{first.name}>>{second.name}",
        source=first.source,
        target=second.target,
        encoder=encoder,
        decoder=Decoder(decoder_map, tag, f"{first.decoder.name}.{second.decoder.name}"),
        plan=QueryPlan(f"{first.plan.name}>>{second.plan.name}", rule),
    )


@dataclass(frozen=True)
class VerificationReport:
    """Sampled check of a reduction's two defining equations."""

    samples: int
    queries_per_sample: int
    target_failures: int
    query_failures: int
    max_discrepancy: float
    tol: float
    seed: int

    @property
    def passed(self) -> bool:
        return (
            self.target_failures == 0
            and self.query_failures == 0
            and self.max_discrepancy <= self.tol
        )


def _is_exact(value) -> bool:
    if isinstance(value, (bool, int, Fraction)):
        return True
    if isinstance(value, tuple):
        return all(_is_exact(v) for v in value)
    return False


def _mismatch(want, got, gap, tol: float) -> bool:
    """Exact data must agree exactly; float-tainted data gets the tolerance."""
    if _is_exact(want) and _is_exact(got):
        return gap != 0
    return gap > tol


def verify_reduction(
    reduction: Reduction,
    sample_count: int = 100,
    tol: float = 1e-9,
    *,
    queries_per_sample: int = 20,
    seed: int = 0,
) -> VerificationReport:
    """Sample catalog inputs and plan-covered queries against the two defining equations.

    Rational-valued data is compared exactly; anything involving floating
    point is compared within ``tol``.  Failures are report content, never
    exceptions.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = random.Random(seed)
    source, target = reduction.source, reduction.target
    distance = source.output_space.distance
    target_failures = 0
    query_failures = 0
    max_discrepancy = 0.0

    for _ in range(sample_count):
        a = source.inputs.sample(rng)
        encoded = reduction.encoder(a)

        want = source.target(a)
        got = reduction.decoder.map(target.target(encoded))
        gap = distance(want, got)
        max_discrepancy = max(max_discrepancy, float(gap))
        if _mismatch(want, got, gap, tol):
            target_failures += 1

        for query_id in target.queries.sample_ids(rng, queries_per_sample):
            entry = reduction.plan.rule(query_id)
            if entry is None:
                query_failures += 1
                continue
            want_q = target.queries.resolve(query_id).evaluate(encoded)
            answers = tuple(
                source.queries.resolve(sid).evaluate(a) for sid in entry.source_ids
            )
            got_q = entry.combine(answers)
            gap_q = abs(want_q - got_q)
            max_discrepancy = max(max_discrepancy, float(gap_q))
            if _mismatch(want_q, got_q, gap_q, tol):
                query_failures += 1

    return VerificationReport(
        samples=sample_count,
        queries_per_sample=queries_per_sample,
        target_failures=target_failures,
        query_failures=query_failures,
        max_discrepancy=max_discrepancy,
        tol=tol,
        seed=seed,
    )


def pullback_algorithm(reduction: Reduction, algorithm: GeneralAlgorithm) -> GeneralAlgorithm:
    """Simulate a target-problem algorithm on the source through the query plan.

    Whenever the target protocol emits a query f, the pulled-back protocol
    emits the plan's source block for f, feeds the combined answer back, and
    finally outputs the decoded target output.  The source trace is the
    concatenation of the blocks, so it stays a pure function of the source
    answers and locality is preserved.
    """
    plan = reduction.plan
    decode = reduction.decoder.map
    inner = algorithm.protocol

    def protocol(source_answers: Sequence[Any]):
        position = 0
        target_answers: list = []
        while True:
            step = inner(target_answers)
            if isinstance(step, Output):
                return Output(decode(step.value))
            if not isinstance(step, Ask):  # pragma: no cover - inner protocol misbehaving
                return step
            entry = plan.entry(step.query_id)
            have = len(source_answers) - position
            if have < entry.width:
                return Ask(entry.source_ids[have])
            block = tuple(source_answers[position : position + entry.width])
            target_answers.append(entry.combine(block))
            position += entry.width

    return GeneralAlgorithm(
        name=f"pullback[{algorithm.name}|{reduction.name}]",
        protocol=protocol,
        budget=max(algorithm.budget, DEFAULT_BUDGET),
    )


def pullback_tower(reduction: Reduction, tower: Tower) -> Tower:
    """Pull a tower back stage by stage; the height is unchanged."""
    return Tower(
        name=f"pullback[{tower.name}|{reduction.name}]",
        height=tower.height,
        stages=lambda idx: pullback_algorithm(reduction, tower.stage(idx)),
    )


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of the one structural obstruction check this module certifies."""

    verdict: str  # "infeasible" | "unknown"
    reason: str

    @property
    def infeasible(self) -> bool:
        return self.verdict == "infeasible"


def structural_feasibility(source: Problem, target: Problem) -> FeasibilityVerdict:
    """Certify the empty-family obstruction; everything else stays Unknown.

    Every plan block needs at least one source query, so a target with a
    nonempty query family is out of reach of a source with an empty one.
    No reduction-existence claim is ever made in the other direction.
    """
    if not target.queries.is_empty and source.queries.is_empty:
        return FeasibilityVerdict(
            "infeasible",
            "target queries need simulation blocks of width >= 1 but the source family is empty",
        )
    return FeasibilityVerdict("unknown", "no structural obstruction detected")
