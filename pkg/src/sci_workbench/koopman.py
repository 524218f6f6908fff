"""Finite-space Koopman operators and their height-0 collapse.

On a finite weighted space the composition operator (K_F g)(x) = g(F(x)) is
a row-selection matrix, and the full map F is readable off the N point
evaluations, so both spectral targets factor through finitely many fixed
queries.  ``sigma_ap`` is computed structurally from the functional graph
(cycle lengths give roots of unity, off-cycle nodes give 0); the numeric
SVD/eigenvalue routines serve as the independent oracle in tests.

Only the weighted 2-norm is implemented; the weights enter sigma_inf via
the diagonal similarity and leave eigenvalues untouched.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import InputCatalog, OutputSpace, Problem, QueryFamily, Tower, fixed_query_algorithm
from .errors import EmptySet, GridTooCoarse


@dataclass(frozen=True)
class FiniteSpace:
    """N points coded as 1..N, each carrying a positive rational weight."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("a finite space has at least one point")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive; zero atoms would change the space dimension")

    @property
    def size(self) -> int:
        return len(self.weights)


def uniform_space(n: int) -> FiniteSpace:
    return FiniteSpace((Fraction(1),) * n)


@dataclass(frozen=True)
class MapTable:
    """A total self-map of 1..N given by its image tuple."""

    image: tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if n == 0:
            raise ValueError("empty map table")
        if any(not (1 <= v <= n) for v in self.image):
            raise ValueError(f"map values must lie in 1..{n}")

    @property
    def size(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i - 1]


@dataclass(frozen=True)
class KoopmanMatrix:
    """0/1 row-selection matrix: row i has its single 1 in column F(i)."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for row in self.entries:
            if sum(row) != 1 or any(v not in (0, 1) for v in row):
                raise ValueError("each row selects exactly one column")

    @property
    def size(self) -> int:
        return len(self.entries)

    def image(self) -> tuple[int, ...]:
        return tuple(row.index(1) + 1 for row in self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex)


def koopman_matrix(space: FiniteSpace, table: MapTable) -> KoopmanMatrix:
    if table.size != space.size:
        raise ValueError("map table size differs from space size")
    n = space.size
    rows = tuple(
        tuple(1 if j == table(i) else 0 for j in range(1, n + 1)) for i in range(1, n + 1)
    )
    return KoopmanMatrix(rows)


def sigma_inf(matrix: KoopmanMatrix, z: complex, weights: Sequence[Fraction] | None = None) -> float:
    """Injection modulus at z: smallest singular value of the weighted shift.

    With W = diag(weights) this is the smallest singular value of
    W^(1/2) (M - zI) W^(-1/2), i.e. the infimum of the weighted 2-norm of
    (K_F - zI)g over the weighted unit sphere.
    """
    a = matrix.as_array() - complex(z) * np.eye(matrix.size)
    if weights is not None:
        w = np.sqrt(np.array([float(x) for x in weights]))
        a = (a * w[:, None]) / w[None, :]
    return float(np.linalg.svd(a, compute_uv=False)[-1])


@dataclass(frozen=True)
class CompactSetApprox:
    """Finite point list standing for a nonempty compact subset of the plane."""

    points: tuple[complex, ...]
    resolution: float = 0.0

    def __post_init__(self):
        if not self.points:
            raise EmptySet("compact-set approximations are nonempty")


def hausdorff(a: CompactSetApprox, b: CompactSetApprox) -> float:
    """Max of the two directed max-min distances between the point lists."""
    pa, pb = _points(a), _points(b)
    forward = max(min(abs(p - q) for q in pb) for p in pa)
    backward = max(min(abs(p - q) for q in pa) for p in pb)
    return float(max(forward, backward))


def _points(value) -> tuple[complex, ...]:
    pts = value.points if isinstance(value, CompactSetApprox) else tuple(value)
    if not pts:
        raise EmptySet("cannot take distances to an empty set")
    return pts


_EXACT_ROOTS = {
    Fraction(0): 1 + 0j,
    Fraction(1, 2): -1 + 0j,
    Fraction(1, 4): 1j,
    Fraction(3, 4): -1j,
}


def _cycle_lengths(image: tuple[int, ...]) -> tuple[set[int], bool]:
    """Cycle lengths of the functional graph and whether any node is off-cycle."""
    n = len(image)
    state = [0] * (n + 1)  # 0 new, 1 on current path, 2 settled
    on_cycle = [False] * (n + 1)
    lengths: set[int] = set()
    for start in range(1, n + 1):
        if state[start]:
            continue
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = image[node - 1]
        if state[node] == 1:  # found a new cycle along this path
            cycle = path[path.index(node):]
            lengths.add(len(cycle))
            for member in cycle:
                on_cycle[member] = True
        for member in path:
            state[member] = 2
    has_tail = any(not on_cycle[i] for i in range(1, n + 1))
    return lengths, has_tail


def sigma_ap(matrix: KoopmanMatrix, weights: Sequence[Fraction] | None = None) -> CompactSetApprox:
    """Approximate point spectrum of the finite Koopman matrix (= its spectrum).

    Each cycle of length L contributes the L-th roots of unity; any node off
    a cycle contributes 0.  Roots at quarter turns are exact; the rest are
    double precision.  Weights are accepted for interface symmetry but do
    not move eigenvalues (the weighted operator is similar to the matrix).
    """
    lengths, has_tail = _cycle_lengths(matrix.image())
    angles: set[Fraction] = set()
    for length in lengths:
        for k in range(length):
            angles.add(Fraction(k, length))
    points = [_EXACT_ROOTS.get(angle, cmath.exp(2j * cmath.pi * angle)) for angle in angles]
    if has_tail:
        points.append(0j)
    points.sort(key=lambda p: (p.real, p.imag))
    return CompactSetApprox(tuple(points))


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned sampling rectangle with fixed spacing."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float
    spacing: float

    def __post_init__(self):
        if self.spacing <= 0 or self.re_lo > self.re_hi or self.im_lo > self.im_hi:
            raise ValueError("bad grid rectangle")

    def points(self):
        n_re = int((self.re_hi - self.re_lo) / self.spacing + 1e-9)
        n_im = int((self.im_hi - self.im_lo) / self.spacing + 1e-9)
        for i in range(n_re + 1):
            for j in range(n_im + 1):
                yield complex(self.re_lo + i * self.spacing, self.im_lo + j * self.spacing)


def sigma_ap_eps(
    matrix: KoopmanMatrix,
    eps: float,
    grid: GridSpec,
    weights: Sequence[Fraction] | None = None,
) -> CompactSetApprox:
    """Grid sample of the eps-approximate point spectrum.

    Retains every grid point with sigma_inf <= eps plus the eigenvalues
    themselves (their sigma_inf is 0), so sigma_ap is a subset as a point
    set.  Since sigma_inf is 1-Lipschitz in z, the sample is within one grid
    spacing of the true set in Hausdorff distance; the spacing must not
    exceed eps/4 and the rectangle must cover the spectrum plus an eps
    margin.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if grid.spacing > eps / 4:
        raise GridTooCoarse(f"spacing {grid.spacing} exceeds eps/4 = {eps / 4}")
    spectrum = sigma_ap(matrix, weights)
    for lam in spectrum.points:
        if not (
            grid.re_lo <= lam.real - eps
            and lam.real + eps <= grid.re_hi
            and grid.im_lo <= lam.imag - eps
            and lam.imag + eps <= grid.im_hi
        ):
            raise GridTooCoarse(f"grid does not cover {lam} with an eps margin")
    kept = [z for z in grid.points() if sigma_inf(matrix, z, weights) <= eps]
    kept.extend(spectrum.points)
    kept.sort(key=lambda p: (p.real, p.imag))
    return CompactSetApprox(tuple(kept), resolution=grid.spacing)


_HAUSDORFF_SPACE = OutputSpace("compact-sets", hausdorff)

TargetSpec = tuple  # ("ap",) or ("ap_eps", eps, GridSpec)

AP: TargetSpec = ("ap",)


def ap_eps(eps: float, grid: GridSpec) -> TargetSpec:
    return ("ap_eps", eps, grid)


def _compute_target(space: FiniteSpace, table: MapTable, target: TargetSpec) -> CompactSetApprox:
    matrix = koopman_matrix(space, table)
    if target[0] == "ap":
        return sigma_ap(matrix, space.weights)
    if target[0] == "ap_eps":
        return sigma_ap_eps(matrix, target[1], target[2], space.weights)
    raise ValueError(f"unknown spectral target {target!r}")


def make_problem(space: FiniteSpace, tables: Sequence[MapTable], target: TargetSpec = AP) -> Problem:
    """Spectral problem over map tables with point-evaluation queries ev_i = F(i)."""
    n = space.size
    ids = tuple(("ev", i) for i in range(1, n + 1))

    def resolver(qid):
        if (
            isinstance(qid, tuple)
            and len(qid) == 2
            and qid[0] == "ev"
            and isinstance(qid[1], int)
            and 1 <= qid[1] <= n
        ):
            i = qid[1]
            return lambda table: table(i)
        return None

    label = "ap" if target[0] == "ap" else f"ap_eps[{target[1]}]"
    return Problem(
        name=f"koopman[N={n}|{label}]",
        inputs=InputCatalog(
            tuple(tables),
            admits=lambda t: isinstance(t, MapTable) and t.size == n,
        ),
        output_space=_HAUSDORFF_SPACE,
        target=lambda table: _compute_target(space, table, target),
        queries=QueryFamily(f"koopman-evals[N={n}]", resolver, canonical_ids=ids),
        params={"space": space, "target": target},
    )


def height0_algorithm(space: FiniteSpace, target: TargetSpec = AP) -> Tower:
    """The finite-space collapse witness: N queries reconstruct F, then compute exactly.

    The single algorithm asks ev_1 .. ev_N, rebuilds the map table from the
    answers, forms the Koopman matrix and evaluates the requested spectral
    target; a concrete finite-query factorization through the point
    evaluations.
    """
    n = space.size
    ids = tuple(("ev", i) for i in range(1, n + 1))

    def finish(values: tuple) -> CompactSetApprox:
        table = MapTable(tuple(int(v) for v in values))
        return _compute_target(space, table, target)

    alg = fixed_query_algorithm(f"koopman-collapse[N={n}]", ids, finish)
    return Tower(f"koopman-collapse[N={n}]", 0, lambda _idx, _alg=alg: _alg)


def eigenvalue_oracle(matrix: KoopmanMatrix) -> CompactSetApprox:
    """Independent numeric spectrum via dense eigenvalues (the brute-force route)."""
    values = np.linalg.eigvals(matrix.as_array())
    points = sorted((complex(v) for v in values), key=lambda p: (p.real, p.imag))
    return CompactSetApprox(tuple(points))
