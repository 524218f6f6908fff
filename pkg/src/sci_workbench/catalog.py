"""JSON catalogs of problems and the named-rule reduction registry.

A catalog document is ``{"schema": ..., "entries": [{"problem": <kind>,
"params": {...}}, ...]}``; rationals are encoded as strings ("1/3") or
ints so nothing passes through floating point on the exact paths.  The
schema is documented in docs/catalog-schema.md.  Reduction specifications
name shipped construction rules; free-form reductions are not accepted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from . import integration, koopman, spectral
from .core import Problem
from .errors import CatalogError, WorkbenchError
from .reductions import Reduction, identity_reduction

CATALOG_SCHEMA = "sci-workbench/catalog@1"


def parse_fraction(value) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise CatalogError(f"exact rational expected, got {value!r}; encode as string or int")
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise CatalogError(f"cannot parse rational from {value!r}") from exc


def function_from_json(data: dict) -> integration.FunctionDescription:
    kind = data.get("kind")
    if kind == "poly":
        return integration.Polynomial(tuple(parse_fraction(c) for c in data["coeffs"]))
    if kind == "sine":
        return integration.Sine(float(data["amplitude"]), float(data["frequency"]))
    if kind == "bump":
        return integration.Bump(parse_fraction(data["u"]), parse_fraction(data["v"]))
    raise CatalogError(f"unknown function kind {kind!r}")


def diagonal_from_json(data: dict) -> spectral.DiagonalSpec:
    kind = data.get("kind")
    if kind == "const":
        return spectral.constant_diagonal(parse_fraction(data["value"]))
    if kind == "finite_list":
        return spectral.FiniteThenConstant(
            tuple(parse_fraction(v) for v in data["values"]),
            parse_fraction(data["tail"]),
        )
    if kind == "harmonic":
        return spectral.HarmonicSequence(parse_fraction(data["base"]), parse_fraction(data["coef"]))
    if kind == "enum":
        return spectral.RationalEnumeration(parse_fraction(data["lo"]), parse_fraction(data["hi"]))
    raise CatalogError(f"unknown diagonal kind {kind!r}")


def _spectral_pairs(params: dict, j_domain: spectral.Domain) -> tuple[spectral.Pair, ...]:
    pairs = []
    for raw in params["pairs"]:
        spec = diagonal_from_json(raw["diagonal"])
        window = spectral.Window(parse_fraction(raw["z"]), j_domain)
        pairs.append((spec, window))
    return tuple(pairs)


def _koopman_target(raw) -> koopman.TargetSpec:
    if raw == "ap":
        return koopman.AP
    if isinstance(raw, dict) and "ap_eps" in raw:
        spec = raw["ap_eps"]
        grid = koopman.GridSpec(*(float(v) for v in spec["grid"]))
        return koopman.ap_eps(float(spec["eps"]), grid)
    raise CatalogError(f"unknown koopman target {raw!r}")


def problem_from_json(entry: dict) -> Problem:
    """Build the typed problem for one catalog entry."""
    kind = entry.get("problem")
    params = entry.get("params")
    if not isinstance(params, dict):
        raise CatalogError("entry needs a params object")

    if kind == "integration":
        a, b = (parse_fraction(v) for v in params["interval"])
        iv = integration.Interval(a, b)
        functions = None
        if "functions" in params:
            functions = tuple(function_from_json(f) for f in params["functions"])
        return integration.make_problem(iv, functions)

    if kind == "spectral_source":
        j_domain = spectral.domain(*(parse_fraction(v) for v in params["domain"]))
        return spectral.source_problem(j_domain, _spectral_pairs(params, j_domain))

    if kind == "spectral_stabilized":
        j_domain = spectral.domain(*(parse_fraction(v) for v in params["domain"]))
        stabilizer = spectral.StabilizerSpec.certify(
            diagonal_from_json(params["stabilizer"]), j_domain
        )
        return spectral.stabilized_problem(
            j_domain, stabilizer, _spectral_pairs(params, j_domain)
        )

    if kind == "koopman":
        space = koopman.FiniteSpace(tuple(parse_fraction(w) for w in params["weights"]))
        tables = tuple(koopman.MapTable(tuple(m)) for m in params["maps"])
        return koopman.make_problem(space, tables, _koopman_target(params.get("target", "ap")))

    raise CatalogError(f"unknown problem kind {kind!r}")


@dataclass(frozen=True)
class CatalogEntry:
    kind: str
    problem: Problem
    params: dict


@dataclass(frozen=True)
class Catalog:
    path: str
    entries: tuple[CatalogEntry, ...]

    def problems(self, kind: str | None = None) -> list[Problem]:
        return [e.problem for e in self.entries if kind is None or e.kind == kind]

    def first(self, kind: str) -> CatalogEntry:
        for entry in self.entries:
            if entry.kind == kind:
                return entry
        raise CatalogError(f"catalog has no {kind!r} entry")


def default_catalog_path() -> Path:
    return Path(resources.files("sci_workbench").joinpath("data/default_catalog.json"))


def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load and type-check a catalog document; errors carry the entry location."""
    location = Path(path) if path is not None else default_catalog_path()
    try:
        document = json.loads(location.read_text())
    except FileNotFoundError as exc:
        raise CatalogError(f"catalog file not found: {location}") from exc
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{location}: invalid JSON at line {exc.lineno}") from exc

    if not isinstance(document, dict) or document.get("schema") != CATALOG_SCHEMA:
        raise CatalogError(f"{location}: expected schema {CATALOG_SCHEMA!r}")
    raw_entries = document.get("entries")
    if not isinstance(raw_entries, list):
        raise CatalogError(f"{location}: entries must be a list")

    entries = []
    for index, raw in enumerate(raw_entries):
        try:
            problem = problem_from_json(raw)
        except CatalogError as exc:
            raise CatalogError(f"{location}: entry {index}: {exc}") from exc
        except (WorkbenchError, KeyError, TypeError, ValueError) as exc:
            raise CatalogError(f"{location}: entry {index}: {exc!r}") from exc
        entries.append(CatalogEntry(raw["problem"], problem, raw.get("params", {})))
    return Catalog(str(location), tuple(entries))


def reduction_from_json(spec: dict) -> Reduction:
    """Instantiate one of the shipped, named reduction rules.

    Rules: "identity" (over any catalog entry), "integration_affine"
    (between two interval problems; source defaults to the unit interval),
    "spectral_forward" / "spectral_backward" (two sides of block-diagonal
    stabilization).
    """
    rule = spec.get("rule")
    params = spec.get("params", {})

    if rule == "identity":
        return identity_reduction(problem_from_json(params["problem"]))

    if rule == "integration_affine":
        target_iv = integration.Interval(*(parse_fraction(v) for v in params["target"]))
        target_problem = integration.make_problem(target_iv)
        source_problem = None
        if "source" in params:
            source_iv = integration.Interval(*(parse_fraction(v) for v in params["source"]))
            source_problem = integration.make_problem(source_iv)
        return integration.affine_reduction(target_problem, source_problem)

    if rule in ("spectral_forward", "spectral_backward"):
        j_domain = spectral.domain(*(parse_fraction(v) for v in params["domain"]))
        stabilizer = spectral.StabilizerSpec.certify(
            diagonal_from_json(params["stabilizer"]), j_domain
        )
        pairs = _spectral_pairs(params, j_domain)
        forward, backward = spectral.stabilization_reductions(j_domain, stabilizer, pairs)
        return forward if rule == "spectral_forward" else backward

    raise CatalogError(f"unknown reduction rule {rule!r}; only shipped named rules are accepted")
