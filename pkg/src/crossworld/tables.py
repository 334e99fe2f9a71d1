"""Exact joint probability tables."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

__all__ = ["JointTable", "ZeroProbabilityError"]


class ZeroProbabilityError(ValueError):
    pass


def _names(vars_) -> tuple[str, ...]:
    if isinstance(vars_, str):
        return (vars_,)
    return tuple(vars_)


@dataclass(frozen=True)
class JointTable:
    """Sparse joint distribution: only rows with positive probability are stored.

    >>> t = JointTable(("X",), {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)})
    >>> t.prob({"X": "1"})
    Fraction(1, 2)
    """

    variables: tuple[str, ...]
    rows: Mapping[tuple[str, ...], Fraction]

    @classmethod
    def from_counts(cls, variables, counts: Mapping[tuple[str, ...], int], denominator: int) -> "JointTable":
        rows = {k: Fraction(c, denominator) for k, c in sorted(counts.items()) if c}
        return cls(tuple(variables), rows)

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variables in joint table")

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointTable):
            return NotImplemented
        if set(self.variables) != set(other.variables):
            return False
        aligned = other.marginal(self.variables)
        return dict(aligned.rows) == dict(self.rows)

    __hash__ = None

    def total(self) -> Fraction:
        return sum(self.rows.values(), Fraction(0))

    def _positions(self, names: Iterable[str]) -> list[int]:
        try:
            return [self.variables.index(n) for n in names]
        except ValueError:
            missing = [n for n in names if n not in self.variables]
            raise KeyError(f"variables {missing} not in table over {list(self.variables)}") from None

    def marginal(self, keep) -> "JointTable":
        keep = _names(keep)
        idx = self._positions(keep)
        out: dict[tuple[str, ...], Fraction] = {}
        for key, p in self.rows.items():
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, Fraction(0)) + p
        return JointTable(keep, dict(sorted(out.items())))

    def prob(self, assignment: Mapping[str, str]) -> Fraction:
        """Probability of the event where every named variable takes the given value."""
        names = tuple(assignment)
        idx = self._positions(names)
        want = tuple(str(assignment[n]) for n in names)
        return sum((p for key, p in self.rows.items() if tuple(key[i] for i in idx) == want), Fraction(0))

    def condition(self, evidence: Mapping[str, str]) -> "JointTable":
        """Renormalized table over the remaining variables given ``evidence``."""
        names = tuple(evidence)
        idx = self._positions(names)
        want = tuple(str(evidence[n]) for n in names)
        rest = [i for i in range(len(self.variables)) if i not in idx]
        kept: dict[tuple[str, ...], Fraction] = {}
        for key, p in self.rows.items():
            if tuple(key[i] for i in idx) == want:
                sub = tuple(key[i] for i in rest)
                kept[sub] = kept.get(sub, Fraction(0)) + p
        mass = sum(kept.values(), Fraction(0))
        if mass == 0:
            raise ZeroProbabilityError(f"evidence {dict(evidence)} has zero probability")
        return JointTable(tuple(self.variables[i] for i in rest), {k: v / mass for k, v in sorted(kept.items())})

    def conditional(self, event: Mapping[str, str], given: Mapping[str, str]) -> Fraction:
        """``P(event | given)``; raises :class:`ZeroProbabilityError` when ``P(given) = 0``."""
        denom = self.prob(given) if given else self.total()
        if denom == 0:
            raise ZeroProbabilityError(f"evidence {dict(given)} has zero probability")
        return self.prob({**given, **event}) / denom

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "rows": [{"values": list(k), "p": f"{p.numerator}/{p.denominator}"} for k, p in self.rows.items()],
        }

    def __str__(self) -> str:
        head = " ".join(self.variables) or "(empty)"
        lines = [f"{head} | P"]
        for key, p in self.rows.items():
            lines.append(f"{' '.join(key) or '()'} | {p}")
        return "\n".join(lines)
