"""Seeded random SCMs and batch soundness trials.

A trial draws one model and one intervention, then checks two claims against
exact enumeration:

* d-separation on the teleporter graph implies numeric conditional
  independence in the cross-world joint;
* whenever the counterfactual criterion holds, the adjustment formula equals
  the enumerated counterfactual probability.

Parameter-degenerate independences (numeric CI without d-separation) are
expected with random tables and are not failures.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import d_separated
from .inference import (
    PositivityError,
    ZeroEvidenceError,
    adjustment_estimate,
    check_ci_numeric,
    consistency_check,
    counterfactual_criterion,
    crossworld_joint,
    oracle_probability,
)
from .scm import EXOGENOUS_STATE_CAP, ProbabilisticSCM, endogenous, exogenous, validate
from .worlds import Intervention, build_teleporter, build_twin

__all__ = ["GenConfig", "TrialReport", "derive_seed", "dsep_record", "random_scm", "run_trials", "soundness_trial"]


def derive_seed(seed: int, *path: object) -> int:
    """Stable 64-bit child seed; independent of ``PYTHONHASHSEED``."""
    digest = hashlib.sha256(":".join(map(str, (seed, *path))).encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n_endogenous: int = 4
    max_parents: int = 2
    domain_size: int = 2
    #: probability that a pair of endogenous variables shares an extra exogenous parent
    confounder_prob: float = 0.3
    #: weights over output values for each equation row; ``None`` is uniform
    table_fill: tuple[float, ...] | None = None
    cap: int = EXOGENOUS_STATE_CAP

    def check(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 2 <= self.n_endogenous <= 6:
            raise ValueError("n_endogenous must be in 2..6")
        if not 1 <= self.max_parents <= 3:
            raise ValueError("max_parents must be in 1..3")
        if self.domain_size < 2:
            raise ValueError("domain_size must be at least 2")
        if self.table_fill is not None and len(self.table_fill) != self.domain_size:
            raise ValueError("table_fill needs one weight per domain value")
        if self.domain_size**self.n_endogenous > self.cap:
            raise ValueError("dedicated exogenous variables alone exceed the enumeration cap")


def random_scm(cfg: GenConfig) -> ProbabilisticSCM:
    """One exogenous parent per endogenous variable plus random shared confounders."""
    cfg.check()
    rng = random.Random(cfg.seed)
    names = [f"V{i}" for i in range(1, cfg.n_endogenous + 1)]
    domain = tuple(str(k) for k in range(cfg.domain_size))

    def marginal():
        weights = [rng.randint(1, 9) for _ in domain]
        total = sum(weights)
        return [Fraction(w, total) for w in weights]

    exo = [exogenous(f"U_{v}", domain, marginal()) for v in names]
    extra: dict[str, list[str]] = {v: [] for v in names}
    states = cfg.domain_size ** len(exo)
    for a, b in itertools.combinations(names, 2):
        if rng.random() < cfg.confounder_prob and states * cfg.domain_size <= cfg.cap:
            u = f"U_{a}_{b}"
            exo.append(exogenous(u, domain, marginal()))
            extra[a].append(u)
            extra[b].append(u)
            states *= cfg.domain_size

    endo = []
    for i, v in enumerate(names):
        k = rng.randint(0, min(i, cfg.max_parents))
        parents = sorted(rng.sample(names[:i], k), key=names.index)
        parents += [f"U_{v}", *extra[v]]
        parent_domains = [domain] * len(parents)
        rows = [
            (combo, rng.choices(domain, weights=cfg.table_fill)[0]) for combo in itertools.product(*parent_domains)
        ]
        endo.append(endogenous(v, domain, parents, rows))
    model = ProbabilisticSCM(tuple(exo), tuple(endo))
    report = validate(model)
    if not report.ok:  # pragma: no cover - generator invariant
        raise AssertionError(f"generator produced an invalid model: {report.violations}")
    return model


def dsep_record(model: ProbabilisticSCM, iv: Intervention, a: str, b: str, cond: Iterable[str], twin=None, tele=None) -> dict:
    """Twin verdict, teleporter verdict and exact CI for one cross-world query."""
    cond = sorted(cond)
    twin = twin or build_twin(model, iv)
    tele = tele or build_teleporter(model, iv)
    twin_sep = d_separated(twin.graph, a, b, cond).separated
    tele_sep = d_separated(tele.graph, a, b, cond).separated
    joint = crossworld_joint(model, iv, (a, b, *cond))
    return {
        "kind": "dsep",
        "query": {"a": a, "b": b, "given": cond},
        "twin_verdict": "separated" if twin_sep else "connected",
        "teleporter_verdict": "separated" if tele_sep else "connected",
        "oracle_ci": check_ci_numeric(joint, a, b, cond),
    }


def _adjust_records(model, iv, tele, rng: random.Random) -> list[dict]:
    desc = sorted(tele.duplicates, key=model.endogenous_names.index)
    desc = [d for d in desc if d != iv.target]
    y = rng.choice(desc)
    y_val = rng.choice(model.domain(y))
    pool_e = [v for v in model.endogenous_names if v not in (iv.target, y)]
    evidence_vars = rng.sample(pool_e, rng.randint(0, min(1, len(pool_e))))
    evidence = {e: rng.choice(model.domain(e)) for e in evidence_vars}
    candidates = [v for v in model.endogenous_names if v in tele.teleporters() and v not in evidence]

    out = []
    base = {"kind": "adjust", "query": {"target": y, "value": y_val, "evidence": evidence}}
    try:
        oracle = oracle_probability(model, iv, (y, y_val), evidence)
    except ZeroEvidenceError:
        return [{**base, "status": "zero-evidence"}]
    for size in range(0, min(2, len(candidates)) + 1):
        for z in itertools.combinations(candidates, size):
            if not counterfactual_criterion(model, iv, y, evidence, z).satisfied:
                continue
            rec = {**base, "query": {**base["query"], "adjust": list(z)}}
            try:
                est = adjustment_estimate(model, iv, (y, y_val), evidence, z)
            except PositivityError as exc:
                out.append({**rec, "status": "positivity-violation", "detail": str(exc)})
                continue
            delta = est - oracle
            out.append({**rec, "status": "admissible", "estimate": str(est), "oracle": str(oracle), "adjustment_delta": str(delta)})
    return out


@dataclass
class TrialReport:
    records: list[dict] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        dsep = [r for r in self.records if r["kind"] == "dsep"]
        adj = [r for r in self.records if r["kind"] == "adjust"]
        admissible = [r for r in adj if r.get("status") == "admissible"]
        return {
            "dsep_queries": len(dsep),
            "soundness_violations": sum(r["teleporter_verdict"] == "separated" and not r["oracle_ci"] for r in dsep),
            "twin_soundness_violations": sum(r["twin_verdict"] == "separated" and not r["oracle_ci"] for r in dsep),
            "dominance_violations": sum(
                r["twin_verdict"] == "separated" and r["teleporter_verdict"] == "connected" for r in dsep
            ),
            "twin_misses": sum(
                r["twin_verdict"] == "connected" and r["teleporter_verdict"] == "separated" for r in dsep
            ),
            "admissible_adjustments": len(admissible),
            "nonzero_adjustment_deltas": sum(Fraction(r["adjustment_delta"]) != 0 for r in admissible),
            "positivity_violations": sum(r.get("status") == "positivity-violation" for r in adj),
            "zero_evidence": sum(r.get("status") == "zero-evidence" for r in adj),
            "trials": sum(r["kind"] == "trial" for r in self.records),
            "consistency_failures": sum(r["kind"] == "trial" and not r["consistency"] for r in self.records),
        }

    def extend(self, other: "TrialReport") -> None:
        self.records.extend(other.records)

    def lines(self) -> list[str]:
        out = [json.dumps(r, sort_keys=True) for r in self.records]
        out.append(json.dumps({"summary": self.summary}, sort_keys=True))
        return out

    def dumps(self) -> str:
        return "\n".join(self.lines()) + "\n"


def soundness_trial(
    cfg: GenConfig,
    n_queries: int = 3,
    model: ProbabilisticSCM | None = None,
    iv: Intervention | None = None,
) -> TrialReport:
    """Run one trial; ``model``/``iv`` may be injected instead of drawn."""
    rng = random.Random(derive_seed(cfg.seed, "queries"))
    model = model or random_scm(cfg)
    if iv is None:
        with_desc = [v for v in model.endogenous_names if any(v in p.parents for p in model.endogenous)]
        target = rng.choice(with_desc or list(model.endogenous_names))
        iv = Intervention(target, rng.choice(model.domain(target)))
    twin, tele = build_twin(model, iv), build_teleporter(model, iv)
    report = TrialReport()
    head = {
        "intervention": f"{iv.target}={iv.value}",
        "duplicates": sorted(tele.duplicates.values()),
        "consistency": consistency_check(model, iv),
    }
    report.records.append({"kind": "trial", **head})

    dups = [tele.duplicates[v] for v in model.endogenous_names if v in tele.duplicates]
    reals = list(model.endogenous_names)
    if not dups:
        return report
    for _ in range(n_queries):
        a = iv.target if rng.random() < 0.5 else rng.choice(reals)
        b = rng.choice(dups)
        pool = [n for n in (*reals, *dups) if n not in (a, b)]
        cond = rng.sample(pool, rng.randint(0, min(2, len(pool))))
        report.records.append(dsep_record(model, iv, a, b, cond, twin, tele))
        report.records.extend(_adjust_records(model, iv, tele, rng))
    return report


def _one(args) -> TrialReport:
    index, seed, n_queries, n_max, max_parents = args
    rng = random.Random(derive_seed(seed, index, "config"))
    cfg = GenConfig(
        seed=derive_seed(seed, index),
        n_endogenous=rng.randint(2, n_max),
        max_parents=max_parents,
    )
    rep = soundness_trial(cfg, n_queries)
    for rec in rep.records:
        rec["trial"] = index
    return rep


def run_trials(
    seed: int, count: int, n_queries: int = 3, n_max: int = 5, max_parents: int = 2, workers: int = 1
) -> TrialReport:
    """``count`` independent trials with per-trial derived seeds, rows ordered by trial index."""
    jobs = [(i, seed, n_queries, n_max, max_parents) for i in range(count)]
    report = TrialReport()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts: Sequence[TrialReport] = list(pool.map(_one, jobs, chunksize=16))
    else:
        parts = [_one(j) for j in jobs]
    for part in parts:
        report.extend(part)
    return report
