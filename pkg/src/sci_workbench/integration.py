"""Exact point-evaluation integration on compact rational intervals.

Catalog functions are finite symbolic descriptions with exact reference
integrals: polynomials and tent bumps evaluate and integrate in rational
arithmetic, sines fall back to floats with a declared tolerance.  The
catalog is closed under affine precomposition so that encoded inputs keep
exact reference integrals, which is what reduction verification needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Sequence

from .core import (
    GeneralAlgorithm,
    InputCatalog,
    OutputSpace,
    Problem,
    QueryFamily,
    Tower,
    fixed_query_algorithm,
)
from .errors import DegenerateInterval
from .reductions import Decoder, DecoderClass, PlanEntry, QueryPlan, Reduction


@dataclass(frozen=True)
class Interval:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if not (isinstance(self.a, Fraction) and isinstance(self.b, Fraction)):
            raise TypeError("interval endpoints must be Fractions; use interval()")
        if self.a > self.b:
            raise ValueError(f"need a <= b, got [{self.a}, {self.b}]")

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    @property
    def length(self) -> Fraction:
        return self.b - self.a

    def __str__(self) -> str:
        return f"[{self.a},{self.b}]"


def interval(a, b) -> Interval:
    """Build an interval from ints, strings or Fractions."""
    return Interval(Fraction(a), Fraction(b))


class FunctionDescription:
    """Finite symbolic description of a continuous real function."""

    def value(self, x):
        raise NotImplementedError

    def integral(self, a, b):
        """Exact reference integral over [a, b] (rational or closed form)."""
        raise NotImplementedError

    def lipschitz(self, a, b):
        """An upper bound for the Lipschitz constant on [a, b]."""
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class Polynomial(FunctionDescription):
    """sum(coeffs[i] * x**i); all arithmetic exact."""

    coeffs: tuple[Fraction, ...]

    def value(self, x):
        if not self.coeffs:
            return Fraction(0)
        if isinstance(x, Fraction):
            # integer Horner with one normalizing Fraction at the end;
            # much cheaper than chained Fraction ops on 3.10
            p, q = x.numerator, x.denominator
            lead, *rest = reversed(self.coeffs)
            num, den = lead.numerator, lead.denominator
            for c in rest:
                num = num * c.denominator * p + c.numerator * den * q
                den = den * c.denominator * q
            return Fraction(num, den)
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def integral(self, a, b):
        total = Fraction(0)
        for i, c in enumerate(self.coeffs):
            total += c * (b ** (i + 1) - a ** (i + 1)) / (i + 1)
        return total

    def lipschitz(self, a, b):
        m = max(abs(a), abs(b))
        return sum(abs(c) * i * m ** (i - 1) for i, c in enumerate(self.coeffs) if i >= 1)

    def label(self) -> str:
        return "poly:" + ",".join(str(c) for c in self.coeffs)


def polynomial(*coeffs) -> Polynomial:
    return Polynomial(tuple(Fraction(c) for c in coeffs))


@dataclass(frozen=True)
class Sine(FunctionDescription):
    """amplitude * sin(frequency * x); double precision, declared tolerance."""

    amplitude: float
    frequency: float

    def value(self, x):
        return self.amplitude * math.sin(self.frequency * float(x))

    def integral(self, a, b):
        f = self.frequency
        return self.amplitude * (math.cos(f * float(a)) - math.cos(f * float(b))) / f

    def lipschitz(self, a, b):
        return abs(self.amplitude * self.frequency)

    def label(self) -> str:
        return f"sine:{self.amplitude},{self.frequency}"


@dataclass(frozen=True)
class Bump(FunctionDescription):
    """Tent supported on [u, v] with apex value 1; exact piecewise-linear arithmetic."""

    u: Fraction
    v: Fraction

    def __post_init__(self):
        if not self.u < self.v:
            raise ValueError("bump support needs u < v")

    @property
    def apex(self) -> Fraction:
        return (self.u + self.v) / 2

    def value(self, x):
        slope = Fraction(2, 1) / (self.v - self.u)
        return max(1 - slope * abs(x - self.apex), Fraction(0))

    def integral(self, a, b):
        total = Fraction(0)
        for lo, hi in ((self.u, self.apex), (self.apex, self.v)):
            p, q = max(a, lo), min(b, hi)
            if p < q:
                total += (self.value(p) + self.value(q)) * (q - p) / 2
        return total

    def lipschitz(self, a, b):
        return Fraction(2, 1) / (self.v - self.u)

    def label(self) -> str:
        return f"bump:{self.u},{self.v}"


@dataclass(frozen=True)
class AffineImage(FunctionDescription):
    """scale * base(alpha * x + beta); closes the catalog under affine encodings."""

    base: FunctionDescription
    scale: Fraction
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("affine images here use alpha > 0")

    def value(self, x):
        return self.scale * self.base.value(self.alpha * x + self.beta)

    def integral(self, a, b):
        return (self.scale / self.alpha) * self.base.integral(
            self.alpha * a + self.beta, self.alpha * b + self.beta
        )

    def lipschitz(self, a, b):
        inner = self.base.lipschitz(self.alpha * a + self.beta, self.alpha * b + self.beta)
        return abs(self.scale * self.alpha) * inner

    def label(self) -> str:
        return f"affine[{self.scale}*({self.base.label()})({self.alpha}x+{self.beta})]"


def default_functions(iv: Interval) -> tuple[FunctionDescription, ...]:
    """A small mixed catalog: exact polynomials plus float sines."""
    funcs: list[FunctionDescription] = [
        polynomial(1),
        polynomial(0, 1),
        polynomial(0, 0, 1),
        polynomial("1/2", "-1/3", 0, "1/4"),
        Sine(1.0, 1.0),
        Sine(0.5, 2.0),
    ]
    if not iv.degenerate:
        width = iv.length
        funcs.append(Bump(iv.a + width / 4, iv.a + 3 * width / 4))
    return tuple(funcs)


def _is_coordinate(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def make_problem(iv: Interval, functions: Sequence[FunctionDescription] | None = None) -> Problem:
    """The integration problem on ``iv``: point-evaluation queries, exact target.

    Query ids are ("ev", x) with rational x in [a, b]; the target is the
    exact reference integral of the description.  Degenerate intervals are
    legal inputs: their target is identically 0.
    """
    members = tuple(functions) if functions is not None else default_functions(iv)
    a, b = iv.a, iv.b

    def resolver(qid):
        if (
            isinstance(qid, tuple)
            and len(qid) == 2
            and qid[0] == "ev"
            and _is_coordinate(qid[1])
            and a <= qid[1] <= b
        ):
            x = qid[1]
            return lambda f: f.value(x)
        return None

    if iv.degenerate:
        canonical = (("ev", a),)
    else:
        canonical = tuple(("ev", a + iv.length * Fraction(j, 8)) for j in range(9))

    def sampler(rng):
        den = rng.choice((8, 16, 32, 64))
        return ("ev", a + iv.length * Fraction(rng.randrange(den + 1), den))

    def separators(f, g):
        for den in range(1, 65):
            for num in range(den + 1):
                yield ("ev", a + iv.length * Fraction(num, den))

    return Problem(
        name=f"integration{iv}",
        inputs=InputCatalog(
            members,
            admits=lambda f: isinstance(f, FunctionDescription),
        ),
        output_space=OutputSpace("real-line", lambda p, q: abs(p - q)),
        target=lambda f: f.integral(a, b),
        queries=QueryFamily(
            f"point-evaluations{iv}",
            resolver,
            canonical_ids=canonical,
            sampler=None if iv.degenerate else sampler,
            separators=None if iv.degenerate else separators,
        ),
        params=iv,
    )


def rectangle_tower(iv: Interval) -> Tower:
    """Height-1 tower of composite left-endpoint rectangle rules.

    Stage n queries the n grid nodes a + j*(b-a)/n (j < n) and outputs
    ((b-a)/n) * sum of the answers; this is the upper-bound witness at
    height 1 for every nondegenerate interval.
    """
    if iv.degenerate:
        raise DegenerateInterval(f"rectangle rule needs a < b, got {iv}")

    def stages(idx: tuple[int, ...]) -> GeneralAlgorithm:
        (n,) = idx
        if n < 1:
            raise ValueError("stage index must be >= 1")
        h = iv.length / n
        ids = _grid_ids(iv.a, iv.b, n)
        return fixed_query_algorithm(f"rectangle{iv}@{n}", ids, lambda vals: h * sum(vals))

    return Tower(f"rectangle{iv}", 1, stages)


@lru_cache(maxsize=512)
def _grid_ids(a: Fraction, b: Fraction, n: int) -> tuple:
    num, den = a.numerator, a.denominator
    step_num, step_den = (b - a).numerator, (b - a).denominator * n
    return tuple(
        ("ev", Fraction(num * step_den + j * step_num * den, den * step_den))
        for j in range(n)
    )


def grid_nodes(iv: Interval, n: int) -> tuple[Fraction, ...]:
    """The n left-endpoint nodes used by stage n of the rectangle tower."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return tuple(qid[1] for qid in _grid_ids(iv.a, iv.b, n))


@dataclass(frozen=True)
class BumpGadget:
    """Tent adversary vanishing on a given finite query set, positive integral."""

    u: Fraction
    v: Fraction

    @property
    def apex(self) -> Fraction:
        return (self.u + self.v) / 2

    @property
    def integral(self) -> Fraction:
        return (self.v - self.u) / 2

    def function(self) -> Bump:
        return Bump(self.u, self.v)

    def value(self, x):
        return self.function().value(x)


def adversary_bump(query_points: Sequence) -> BumpGadget:
    """Defeat any fixed finite-query protocol on the unit interval.

    Sort {0} | points | {1}, take the widest open gap between consecutive
    distinct values (ties resolved leftmost), and place the tent support on
    the middle half of that gap.  The tent vanishes at every query point yet
    integrates to (v-u)/2 > 0, so a protocol seeing only those points cannot
    tell it apart from the zero function.
    """
    cuts = {Fraction(0), Fraction(1)}
    for p in query_points:
        q = Fraction(p)
        if not 0 <= q <= 1:
            raise ValueError(f"query point {q} lies outside [0, 1]")
        cuts.add(q)
    ordered = sorted(cuts)
    best_left, best_right = ordered[0], ordered[1]
    for left, right in zip(ordered, ordered[1:]):
        if right - left > best_right - best_left:
            best_left, best_right = left, right
    gap = best_right - best_left
    return BumpGadget(best_left + gap / 4, best_right - gap / 4)


def affine_reduction(target: Problem, source: Problem | None = None) -> Reduction:
    """Reduction from integration on [0,1] (or on ``source``) into ``target``.

    The encoder rescales: (E f)(x) = r * f(r*x + shift) with r the length
    ratio, so the reference integrals agree; each point evaluation of the
    target is simulated by exactly one source evaluation with combiner
    z -> r*z.  The decoder is the identity on the real line (tag Cont).
    """
    if source is None:
        source = make_problem(interval(0, 1))
    s, t = source.params, target.params
    if not isinstance(s, Interval) or not isinstance(t, Interval):
        raise ValueError("affine reductions are defined between integration problems")
    if s.degenerate or t.degenerate:
        raise DegenerateInterval("affine reductions need nondegenerate intervals")

    ratio = s.length / t.length
    shift = s.a - t.a * ratio

    def encoder(f: FunctionDescription) -> AffineImage:
        return AffineImage(f, ratio, ratio, shift)

    def rule(qid):
        if (
            isinstance(qid, tuple)
            and len(qid) == 2
            and qid[0] == "ev"
            and _is_coordinate(qid[1])
            and t.a <= qid[1] <= t.b
        ):
            source_id = ("ev", ratio * qid[1] + shift)
            return PlanEntry((source_id,), lambda vals, _r=ratio: vals[0] * _r)
        return None

    return Reduction(
        name=f"affine[{s}->{t}]",
        source=source,
        target=target,
        encoder=encoder,
        decoder=Decoder(lambda y: y, DecoderClass.CONT, "identity"),
        plan=QueryPlan(f"affine[{s}->{t}]", rule),
    )


def degenerate_algorithm(a) -> Tower:
    """Height-0 tower for a one-point interval: query ev_a once, output 0.

    The empty integral makes the target constant zero, so this single
    algorithm equals the target outright; it passes the finite-query
    factorization check with the one-row table (value,) -> 0.
    """
    point = Fraction(a)
    alg = fixed_query_algorithm(f"degenerate[{point}]", (("ev", point),), lambda _vals: Fraction(0))
    return Tower(f"degenerate[{point}]", 0, lambda _idx, _alg=alg: _alg)


@dataclass(frozen=True)
class IntervalClassification:
    height: int
    reduction_available: bool


def classify_interval(iv: Interval) -> IntervalClassification:
    """Exact height of an interval member and whether the unit source reduces into it.

    Inside the interval ambient class the two answers coincide: height 1
    exactly on the nondegenerate members, which are exactly the members the
    unit-interval source reduces into.
    """
    if iv.degenerate:
        return IntervalClassification(0, False)
    return IntervalClassification(1, True)


def quadrature_error_bound(f: FunctionDescription, iv: Interval, n: int):
    """Left-endpoint error bound L*(b-a)^2/(2n) for an L-Lipschitz integrand."""
    return f.lipschitz(iv.a, iv.b) * iv.length**2 / (2 * n)
