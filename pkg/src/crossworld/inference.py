"""Exact counterfactual probabilities.

Three independent routes answer ``P(Y_x = y | e)``:

* ``enumerate``: condition the cross-world joint (real values and
  counterfactual values solved for each exogenous context);
* ``abduction``: reweight ``P(u)`` by the evidence, solve the mutilated model;
* ``adjust``: the cross-world adjustment sum, which only touches the
  observational distribution and is licensed by a d-separation check on the
  teleporter graph.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .graph import Path, d_separated
from .scm import (
    EXOGENOUS_STATE_CAP,
    ModelError,
    ProbabilisticSCM,
    observational_joint,
    solve,
    solutions,
)
from .tables import JointTable, ZeroProbabilityError
from .worlds import (
    CrossWorldModel,
    Intervention,
    build_teleporter,
    counterfactual_name,
    intervene,
)

__all__ = [
    "CriterionVerdict",
    "EnvironmentAdjustment",
    "InadmissibleError",
    "PositivityError",
    "QueryError",
    "ZeroEvidenceError",
    "abduction_action_prediction",
    "adjustment_estimate",
    "check_ci_numeric",
    "consistency_check",
    "counterfactual_criterion",
    "counterfactual_probability",
    "crossworld_joint",
    "graphood_eq7",
    "oracle_probability",
]


class QueryError(ModelError):
    pass


class ZeroEvidenceError(QueryError, ZeroProbabilityError):
    def __init__(self, message: str = "evidence has zero probability"):
        super().__init__(message)


class InadmissibleError(QueryError):
    pass


class PositivityError(QueryError):
    pass


def _strs(mapping: Mapping[str, object] | None) -> dict[str, str]:
    return {k: str(v) for k, v in (mapping or {}).items()}


def crossworld_joint(
    model: ProbabilisticSCM, iv: Intervention, variables: Iterable[str], cap: int = EXOGENOUS_STATE_CAP
) -> JointTable:
    """Exact joint over real and counterfactual variables.

    Counterfactual variables are addressed as ``counterfactual_name(Y, iv)``;
    for a non-descendant of the target that name denotes the same quantity as
    the real ``Y``.
    """
    variables = tuple(variables)
    cw = CrossWorldModel(model, iv)
    if any(v in model and model.is_exogenous(v) for v in variables):
        counts: dict[tuple[str, ...], int] = {}
        names = model.exogenous_names
        for weight, u in model.exogenous_states(cap):
            vals = cw.evaluate(dict(zip(names, u)))
            try:
                key = tuple(vals[v] for v in variables)
            except KeyError as exc:
                raise ModelError(f"unknown cross-world variable {exc.args[0]!r}") from None
            counts[key] = counts.get(key, 0) + weight
        return JointTable.from_counts(variables, counts, model.denominator)

    cols = [cw.column(v) for v in variables]
    counts = {}
    for row, weight in cw.world_counts(cap).items():
        key = tuple(iv.value if c is None else row[c] for c in cols)
        counts[key] = counts.get(key, 0) + weight
    return JointTable.from_counts(variables, counts, model.denominator)


def _target_node(model: ProbabilisticSCM, iv: Intervention, target: str) -> tuple[str, str]:
    """Return (base variable, counterfactual column name) for a target given either way."""
    prefix = counterfactual_name("", iv)
    base = target[: -len(prefix)] if target.endswith(prefix) else target
    if base not in model or model.is_exogenous(base):
        raise QueryError(f"unknown counterfactual target {target!r}")
    if base == iv.target:
        raise QueryError("the target must differ from the intervened variable")
    return base, counterfactual_name(base, iv)


def _check_evidence(model: ProbabilisticSCM, evidence: Mapping[str, str]) -> None:
    for name, value in evidence.items():
        if name not in model:
            raise QueryError(f"evidence variable {name!r} is not a real-world variable")
        if value not in model.domain(name):
            raise QueryError(f"{value!r} is not in the domain of {name}")


def oracle_probability(
    model: ProbabilisticSCM,
    iv: Intervention,
    target: tuple[str, object],
    evidence: Mapping[str, object] | None = None,
    cap: int = EXOGENOUS_STATE_CAP,
) -> Fraction:
    """``P(Y_x = y | e)`` read off the enumerated cross-world joint."""
    evidence = _strs(evidence)
    _check_evidence(model, evidence)
    _, cf = _target_node(model, iv, target[0])
    table = crossworld_joint(model, iv, (cf, *evidence), cap)
    try:
        return table.conditional({cf: str(target[1])}, evidence)
    except ZeroProbabilityError:
        raise ZeroEvidenceError() from None


def abduction_action_prediction(
    model: ProbabilisticSCM,
    iv: Intervention,
    target: tuple[str, object],
    evidence: Mapping[str, object] | None = None,
    cap: int = EXOGENOUS_STATE_CAP,
) -> Fraction:
    """Abduction (``P(u | e)``), action (``M_x``), prediction (``P(Y_x = y | e)``)."""
    evidence = _strs(evidence)
    _check_evidence(model, evidence)
    base, _ = _target_node(model, iv, target[0])
    want = str(target[1])
    mutilated = intervene(model, iv)
    names = model.exogenous_names

    posterior: list[tuple[int, dict[str, str]]] = []
    for weight, u in model.exogenous_states(cap):
        ctx = dict(zip(names, u))
        real = solve(model, ctx)
        if all(real[k] == v for k, v in evidence.items()):
            posterior.append((weight, ctx))
    mass = sum(w for w, _ in posterior)
    if mass == 0:
        raise ZeroEvidenceError()
    hit = sum(w for w, ctx in posterior if solve(mutilated, ctx)[base] == want)
    return Fraction(hit, mass)


def _as_names(x) -> tuple[str, ...]:
    if x is None:
        return ()
    if isinstance(x, str):
        return (x,)
    return tuple(x)


def check_ci_numeric(table: JointTable, a, b, cond=()) -> bool:
    """Exact test of ``a ⊥ b | cond`` on every positive-probability slice."""
    a, b, cond = _as_names(a), _as_names(b), _as_names(cond)
    sub = table.marginal((*a, *b, *cond))
    na, nb = len(a), len(b)
    slices: dict[tuple, dict] = {}
    for key, p in sub.rows.items():
        ka, kb, kc = key[:na], key[na : na + nb], key[na + nb :]
        s = slices.setdefault(kc, {"total": Fraction(0), "a": {}, "b": {}, "ab": {}})
        s["total"] += p
        s["a"][ka] = s["a"].get(ka, Fraction(0)) + p
        s["b"][kb] = s["b"].get(kb, Fraction(0)) + p
        s["ab"][(ka, kb)] = s["ab"].get((ka, kb), Fraction(0)) + p
    for s in slices.values():
        for (ka, pa), (kb, pb) in itertools.product(s["a"].items(), s["b"].items()):
            if s["ab"].get((ka, kb), Fraction(0)) * s["total"] != pa * pb:
                return False
    return True


@dataclass(frozen=True)
class CriterionVerdict:
    satisfied: bool
    separating_set_used: frozenset[str]
    witness_path: Path | None = None

    def __bool__(self) -> bool:
        return self.satisfied


def counterfactual_criterion(
    model: ProbabilisticSCM,
    iv: Intervention,
    target: str,
    evidence_vars: Iterable[str] = (),
    adjust: Iterable[str] = (),
) -> CriterionVerdict:
    """Is ``X`` d-separated from ``Y_x`` given ``E ∪ Z`` in the teleporter graph?"""
    base, _ = _target_node(model, iv, target)
    merged = build_teleporter(model, iv)
    node = merged.resolve(base, counterfactual=True)
    cond = frozenset(evidence_vars) | frozenset(adjust)
    for name in cond:
        if name not in merged.graph:
            raise QueryError(f"{name!r} is not a node of the teleporter graph")
    if iv.target in cond or node in cond:
        raise QueryError("the conditioning set must not contain the treatment or the counterfactual target")
    verdict = d_separated(merged.graph, iv.target, node, cond)
    return CriterionVerdict(verdict.separated, cond, verdict.witness)


def _observable(model: ProbabilisticSCM, names: Sequence[str], role: str) -> None:
    for n in names:
        if n not in model:
            raise QueryError(f"{role} variable {n!r} is not a real-world variable")
        if model.is_exogenous(n):
            raise QueryError(f"{role} variable {n!r} is exogenous and not observable")


def adjustment_estimate(
    model: ProbabilisticSCM,
    iv: Intervention,
    target: tuple[str, object],
    evidence: Mapping[str, object] | None = None,
    adjust: Iterable[str] = (),
    cap: int = EXOGENOUS_STATE_CAP,
) -> Fraction:
    """Cross-world adjustment ``Σ_z P(y | z, x, e) P(z | e)`` from observational data.

    Raises :class:`InadmissibleError` when the counterfactual criterion fails
    and :class:`PositivityError` when a slice with ``P(z | e) > 0`` has
    ``P(x, z, e) = 0``.
    """
    evidence = _strs(evidence)
    adjust = tuple(adjust)
    _check_evidence(model, evidence)
    _observable(model, tuple(evidence), "evidence")
    _observable(model, adjust, "adjustment")
    base, _ = _target_node(model, iv, target[0])
    y = str(target[1])
    if set(adjust) & set(evidence):
        raise QueryError("adjustment and evidence sets must be disjoint")
    if iv.target in evidence or iv.target in adjust:
        raise QueryError("the treatment cannot be evidence or an adjustment variable")

    merged = build_teleporter(model, iv)
    if base not in merged.duplicates:
        # not affected by the intervention: Y_x is Y itself
        obs = observational_joint(model, (base, *evidence), cap)
        try:
            return obs.conditional({base: y}, evidence)
        except ZeroProbabilityError:
            raise ZeroEvidenceError() from None

    verdict = counterfactual_criterion(model, iv, base, evidence, adjust)
    if not verdict.satisfied:
        raise InadmissibleError(f"adjustment set not admissible: open path {verdict.witness_path}")

    obs = observational_joint(model, tuple(dict.fromkeys((iv.target, base, *evidence, *adjust))), cap)
    p_e = obs.prob(evidence) if evidence else Fraction(1)
    if p_e == 0:
        raise ZeroEvidenceError()
    z_given_e = obs.marginal((*adjust, *evidence)).rows
    total = Fraction(0)
    for key, p_ze in z_given_e.items():
        z = dict(zip(adjust, key[: len(adjust)]))
        if any(key[len(adjust) + i] != evidence[e] for i, e in enumerate(evidence)):
            continue
        p_xze = obs.prob({iv.target: iv.value, **z, **evidence})
        if p_xze == 0:
            raise PositivityError(f"positivity violation at slice {z}")
        p_yxze = obs.prob({base: y, iv.target: iv.value, **z, **evidence})
        total += (p_yxze / p_xze) * (p_ze / p_e)
    return total


def consistency_check(model: ProbabilisticSCM, iv: Intervention, cap: int = EXOGENOUS_STATE_CAP) -> bool:
    """Whenever ``X(u) = x`` the mutilated model must reproduce every real value."""
    mutilated = intervene(model, iv)
    names = model.exogenous_names
    for _, real in solutions(model, cap):
        if real[iv.target] == iv.value:
            if solve(mutilated, {k: real[k] for k in names}) != real:
                return False
    return True


def counterfactual_probability(
    model: ProbabilisticSCM,
    iv: Intervention,
    target: tuple[str, object],
    evidence: Mapping[str, object] | None = None,
    method: str = "enumerate",
    adjust: Iterable[str] = (),
    cap: int = EXOGENOUS_STATE_CAP,
) -> Fraction:
    if method == "enumerate":
        return oracle_probability(model, iv, target, evidence, cap)
    if method == "abduction":
        return abduction_action_prediction(model, iv, target, evidence, cap)
    if method == "adjust":
        return adjustment_estimate(model, iv, target, evidence, adjust, cap)
    raise QueryError(f"unknown method {method!r}")


@dataclass(frozen=True)
class EnvironmentAdjustment:
    table: JointTable
    oracle: JointTable
    terms: int
    certified: bool

    @property
    def matches(self) -> bool:
        return self.table == self.oracle


def graphood_eq7(
    model: ProbabilisticSCM,
    iv: Intervention,
    x_prime: object,
    treatment_env: str = "E",
    outcome: str = "Y",
    cap: int = EXOGENOUS_STATE_CAP,
) -> EnvironmentAdjustment:
    """``P(Y_x = y | X = x') = Σ_e P(Y = y | X = x, E = e) P(E = e | X = x')``.

    Checked against the enumeration oracle; ``certified`` reports whether the
    teleporter graph gives ``X ⊥ Y_x | E``.
    """
    x, xp = iv.target, str(x_prime)
    env = treatment_env
    for name in (x, env, outcome):
        if name not in model or model.is_exogenous(name):
            raise QueryError(f"fixture shape mismatch: missing endogenous variable {name!r}")
    merged = build_teleporter(model, iv)
    if env in merged.duplicates or outcome not in merged.duplicates:
        raise QueryError("fixture shape mismatch: E must be a teleporter and Y a descendant of X")
    if xp not in model.domain(x):
        raise QueryError(f"{xp!r} is not in the domain of {x}")
    certified = d_separated(merged.graph, x, merged.duplicates[outcome], {env}).separated

    obs = observational_joint(model, (x, env, outcome), cap)
    p_xp = obs.prob({x: xp})
    if p_xp == 0:
        raise ZeroEvidenceError()
    env_given_xp = obs.condition({x: xp}).marginal(env).rows
    rows: dict[tuple[str, ...], Fraction] = {}
    for y in model.domain(outcome):
        total = Fraction(0)
        for (e,), p_e in env_given_xp.items():
            p_xe = obs.prob({x: iv.value, env: e})
            if p_xe == 0:
                raise PositivityError(f"positivity violation at slice {{{env!r}: {e!r}}}")
            total += obs.prob({x: iv.value, env: e, outcome: y}) / p_xe * p_e
        if total:
            rows[(y,)] = total
    cf = counterfactual_name(outcome, iv)
    table = JointTable((cf,), rows)
    oracle = crossworld_joint(model, iv, (cf, x), cap).condition({x: xp})
    return EnvironmentAdjustment(table, oracle, len(env_given_xp), certified)
