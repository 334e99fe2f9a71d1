"""Discrete structural causal models with deterministic lookup-table equations.

All randomness lives in the exogenous marginals; every endogenous variable is a
total function of its parents. Probabilities are :class:`fractions.Fraction`
throughout so that independence checks can use exact equality.
"""
from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .tables import JointTable

__all__ = [
    "EXOGENOUS_STATE_CAP",
    "CapExceededError",
    "Endogenous",
    "Exogenous",
    "ModelError",
    "ModelSyntaxError",
    "ProbabilisticSCM",
    "ValidationReport",
    "observational_joint",
    "parse_model",
    "render_model",
    "solve",
    "validate",
]

#: Default ceiling on the number of joint exogenous states an enumeration may visit.
EXOGENOUS_STATE_CAP = 2**20

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
# reserved for counterfactual duplicates, see worlds.counterfactual_name
_RESERVED = "_do_"


class ModelError(ValueError):
    """Raised for semantically invalid models or queries against a model."""


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class CapExceededError(ModelError):
    pass


@dataclass(frozen=True)
class Exogenous:
    name: str
    domain: tuple[str, ...]
    marginal: tuple[Fraction, ...]


@dataclass(frozen=True)
class Endogenous:
    """An endogenous variable and its structural equation.

    ``table`` holds ``(parent_values, value)`` rows in the order they were
    declared. Totality is a validation concern, not a construction one, so an
    incomplete table can be represented and reported.
    """

    name: str
    domain: tuple[str, ...]
    parents: tuple[str, ...]
    table: tuple[tuple[tuple[str, ...], str], ...]

    @cached_property
    def lookup(self) -> dict[tuple[str, ...], str]:
        return dict(self.table)


def _as_tuple(values: Iterable) -> tuple[str, ...]:
    return tuple(str(v) for v in values)


def exogenous(name: str, domain: Iterable, marginal: Iterable) -> Exogenous:
    """Convenience constructor coercing labels to ``str`` and weights to ``Fraction``."""
    return Exogenous(name, _as_tuple(domain), tuple(Fraction(p) for p in marginal))


def endogenous(name: str, domain: Iterable, parents: Iterable[str], table) -> Endogenous:
    """Convenience constructor.

    ``table`` is either a mapping from parent-value tuples to values, or a
    callable evaluated over the Cartesian product of parent domains (in which
    case the parent domains must be supplied by :meth:`ProbabilisticSCM.build`).
    """
    rows = table.items() if isinstance(table, Mapping) else table
    return Endogenous(
        name,
        _as_tuple(domain),
        tuple(parents),
        tuple((_as_tuple(given), str(then)) for given, then in rows),
    )


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ProbabilisticSCM:
    exogenous: tuple[Exogenous, ...]
    endogenous: tuple[Endogenous, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "exogenous", tuple(self.exogenous))
        object.__setattr__(self, "endogenous", tuple(self.endogenous))
        index = {}
        for var in (*self.exogenous, *self.endogenous):
            index.setdefault(var.name, var)
        object.__setattr__(self, "_index", index)

    @classmethod
    def build(cls, exogenous_specs, endogenous_specs) -> "ProbabilisticSCM":
        """Build a model where endogenous tables may be given as functions.

        ``endogenous_specs`` items are ``(name, domain, parents, fn)`` where
        ``fn`` receives one positional argument per parent (as labels) and
        returns an output label.
        """
        domains = {ex.name: ex.domain for ex in exogenous_specs}
        endo = []
        for name, domain, parents, fn in endogenous_specs:
            if callable(fn):
                rows = [(combo, fn(*combo)) for combo in itertools.product(*(domains[p] for p in parents))]
            else:
                rows = fn
            var = endogenous(name, domain, parents, rows)
            domains[name] = var.domain
            endo.append(var)
        return cls(tuple(exogenous_specs), tuple(endo))

    # -- lookups ---------------------------------------------------------------

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> Exogenous | Endogenous:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in (*self.exogenous, *self.endogenous))

    @cached_property
    def exogenous_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.exogenous)

    @cached_property
    def endogenous_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.endogenous)

    def is_exogenous(self, name: str) -> bool:
        return isinstance(self[name], Exogenous)

    def domain(self, name: str) -> tuple[str, ...]:
        return self[name].domain

    def edges(self) -> list[tuple[str, str]]:
        return [(p, v.name) for v in self.endogenous for p in v.parents]

    @cached_property
    def order(self) -> tuple[str, ...]:
        """Endogenous names in topological order, ties broken by declaration order."""
        order = _topological_order(self.endogenous_names, {v.name: v.parents for v in self.endogenous})
        if order is None:
            raise ModelError("graph contains a cycle")
        return order

    @cached_property
    def state_count(self) -> int:
        return math.prod(len(ex.domain) for ex in self.exogenous)

    def exogenous_states(self, cap: int = EXOGENOUS_STATE_CAP) -> Iterator[tuple[int, tuple[str, ...]]]:
        """Yield ``(weight, u)`` for every joint exogenous state.

        Weights are integers over the common denominator :attr:`denominator`,
        which keeps the inner loop free of ``Fraction`` arithmetic.
        """
        if self.state_count > cap:
            raise CapExceededError(
                f"exogenous state space has {self.state_count} states, above the cap of {cap}"
            )
        scaled = []
        for ex in self.exogenous:
            denom = math.lcm(*(p.denominator for p in ex.marginal))
            scaled.append([(int(p * denom), label) for p, label in zip(ex.marginal, ex.domain)])
        for combo in itertools.product(*scaled):
            weight = 1
            for w, _ in combo:
                weight *= w
            if weight:
                yield weight, tuple(label for _, label in combo)

    @cached_property
    def denominator(self) -> int:
        return math.prod(math.lcm(*(p.denominator for p in ex.marginal)) for ex in self.exogenous)


def _topological_order(names: Sequence[str], parents: Mapping[str, Iterable[str]]) -> tuple[str, ...] | None:
    # Kahn's algorithm restricted to `names`; always picks the earliest-declared ready node.
    members = set(names)
    pending = {n: {p for p in parents.get(n, ()) if p in members} for n in names}
    order: list[str] = []
    while pending:
        ready = next((n for n in names if n in pending and not pending[n]), None)
        if ready is None:
            return None
        order.append(ready)
        del pending[ready]
        for deps in pending.values():
            deps.discard(ready)
    return tuple(order)


# -- validation ------------------------------------------------------------------


def validate(model: ProbabilisticSCM) -> ValidationReport:
    """Check every model invariant and collect violations instead of raising."""
    problems: list[str] = []
    seen: set[str] = set()
    for var in (*model.exogenous, *model.endogenous):
        if not var.name or not _NAME_RE.match(var.name):
            problems.append(f"invalid variable name {var.name!r}")
        elif _RESERVED in var.name:
            problems.append(f"variable name {var.name!r} uses the reserved infix {_RESERVED!r}")
        if var.name in seen:
            problems.append(f"duplicate variable name {var.name!r}")
        seen.add(var.name)
        if not var.domain:
            problems.append(f"{var.name}: empty domain")
        if len(set(var.domain)) != len(var.domain):
            problems.append(f"{var.name}: duplicate domain labels")

    for ex in model.exogenous:
        if len(ex.marginal) != len(ex.domain):
            problems.append(f"{ex.name}: marginal length does not match domain")
        if any(p < 0 for p in ex.marginal):
            problems.append(f"{ex.name}: negative probability")
        if sum(ex.marginal, Fraction(0)) != 1:
            problems.append(f"{ex.name}: marginal not normalized")

    known = {v.name: v for v in (*model.exogenous, *model.endogenous)}
    for var in model.endogenous:
        if len(set(var.parents)) != len(var.parents):
            problems.append(f"{var.name}: duplicate parents")
        missing = [p for p in var.parents if p not in known]
        if missing:
            problems.append(f"{var.name}: unknown parents {missing}")
            continue
        expected = set(itertools.product(*(known[p].domain for p in var.parents)))
        rows = [given for given, _ in var.table]
        if len(set(rows)) != len(rows):
            problems.append(f"{var.name}: duplicate equation rows")
        if set(rows) - expected:
            problems.append(f"{var.name}: equation rows outside the parent domains")
        if expected - set(rows):
            problems.append(f"{var.name}: incomplete equation table")
        bad = sorted({then for _, then in var.table if then not in var.domain})
        if bad:
            problems.append(f"{var.name}: equation outputs {bad} outside domain")

    if not problems:
        order = _topological_order(model.endogenous_names, {v.name: v.parents for v in model.endogenous})
        if order is None:
            problems.append("graph contains a cycle")
        else:
            # exogenous-ancestor coverage, in topological order
            covered: set[str] = set()
            for name in order:
                var = known[name]
                if any(p in covered or p in model.exogenous_names for p in var.parents):
                    covered.add(name)
                else:
                    problems.append(f"{name}: no exogenous ancestor")
    return ValidationReport(tuple(problems))


def check(model: ProbabilisticSCM) -> ProbabilisticSCM:
    report = validate(model)
    if not report.ok:
        raise ModelError("; ".join(report.violations))
    return model


# -- evaluation ----------------------------------------------------------------


def _evaluate(model: ProbabilisticSCM, values: dict[str, str]) -> dict[str, str]:
    for name in model.order:
        var = model._index[name]
        values[name] = var.lookup[tuple(values[p] for p in var.parents)]
    return values


def solve(model: ProbabilisticSCM, u: Mapping[str, object]) -> dict[str, str]:
    """Evaluate every structural equation under exogenous context ``u``."""
    values: dict[str, str] = {}
    for ex in model.exogenous:
        if ex.name not in u:
            raise ModelError(f"missing exogenous assignment for {ex.name}")
        label = str(u[ex.name])
        if label not in ex.domain:
            raise ModelError(f"{label!r} is not in the domain of {ex.name}")
        values[ex.name] = label
    return _evaluate(model, values)


def solutions(model: ProbabilisticSCM, cap: int = EXOGENOUS_STATE_CAP) -> Iterator[tuple[int, dict[str, str]]]:
    """Yield ``(integer weight, full solution)`` for every exogenous state."""
    names = model.exogenous_names
    for weight, u in model.exogenous_states(cap):
        yield weight, _evaluate(model, dict(zip(names, u)))


def observational_joint(model: ProbabilisticSCM, variables: Iterable[str], cap: int = EXOGENOUS_STATE_CAP) -> JointTable:
    """Exact joint distribution of ``variables`` by full exogenous enumeration."""
    variables = tuple(variables)
    for v in variables:
        model[v]
    counts: dict[tuple[str, ...], int] = {}
    for weight, sol in solutions(model, cap):
        key = tuple(sol[v] for v in variables)
        counts[key] = counts.get(key, 0) + weight
    return JointTable.from_counts(variables, counts, model.denominator)


# -- model file format -----------------------------------------------------------


def _fraction(text, where: str) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ModelSyntaxError(f"{where}: probability must be a 'p/q' string or an integer")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ModelSyntaxError(f"{where}: malformed rational {text!r}") from None


def _labels(raw, where: str) -> tuple[str, ...]:
    if not isinstance(raw, list):
        raise ModelSyntaxError(f"{where}: expected a list")
    out = []
    for item in raw:
        if isinstance(item, bool) or not isinstance(item, (str, int)):
            raise ModelSyntaxError(f"{where}: value labels must be strings or integers")
        out.append(str(item))
    return tuple(out)


def _require(obj, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ModelSyntaxError(f"{where}: missing field {key!r}")
    return obj[key]


def parse_model(text: str, check_model: bool = True) -> ProbabilisticSCM:
    """Parse the JSON model format.

    :param text: document content.
    :param check_model: run :func:`validate` and raise :class:`ModelError` listing
        every violation. Pass ``False`` to obtain a structurally parsed but
        unchecked model.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ModelSyntaxError("model document must be a JSON object")

    exo = []
    for i, item in enumerate(_require(doc, "exogenous", "model")):
        where = f"exogenous[{i}]"
        name = _require(item, "name", where)
        marginal = _require(item, "marginal", where)
        if not isinstance(marginal, list):
            raise ModelSyntaxError(f"{where}: marginal must be a list")
        exo.append(
            Exogenous(
                str(name),
                _labels(_require(item, "domain", where), where),
                tuple(_fraction(p, where) for p in marginal),
            )
        )

    endo = []
    for i, item in enumerate(_require(doc, "endogenous", "model")):
        where = f"endogenous[{i}]"
        parents = _require(item, "parents", where)
        if not isinstance(parents, list) or not all(isinstance(p, str) for p in parents):
            raise ModelSyntaxError(f"{where}: parents must be a list of names")
        rows = []
        for j, row in enumerate(_require(item, "table", where)):
            given = _labels(_require(row, "given", f"{where}.table[{j}]"), f"{where}.table[{j}]")
            then = _require(row, "then", f"{where}.table[{j}]")
            rows.append((given, _labels([then], f"{where}.table[{j}]")[0]))
        endo.append(
            Endogenous(
                str(_require(item, "name", where)),
                _labels(_require(item, "domain", where), where),
                tuple(parents),
                tuple(rows),
            )
        )

    model = ProbabilisticSCM(tuple(exo), tuple(endo))
    return check(model) if check_model else model


def _rational(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}"


def render_model(model: ProbabilisticSCM) -> str:
    """Canonical serializer: declaration order, rationals in lowest terms."""
    doc = {
        "exogenous": [
            {"name": ex.name, "domain": list(ex.domain), "marginal": [_rational(p) for p in ex.marginal]}
            for ex in model.exogenous
        ],
        "endogenous": [
            {
                "name": var.name,
                "domain": list(var.domain),
                "parents": list(var.parents),
                "table": [{"given": list(given), "then": then} for given, then in var.table],
            }
            for var in model.endogenous
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
