"""Small binary models shaped like the worked examples.

Each model has a fixed graph; the equations and exogenous marginals are
arbitrary but biased away from 1/2 so that d-connected pairs come out
numerically dependent.

Endogenous variables of ``fig2`` to ``fig5`` use letter labels (``a`` for
"true", ``a'`` for "false") so queries read naturally: ``do(A=a)``,
``D_a``. ``fig1`` is plain 0/1.
"""
from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

from .scm import ProbabilisticSCM, exogenous, parse_model, render_model

__all__ = ["FIXTURES", "build", "emit", "load", "text"]

BIT = ("0", "1")


def _coin(name: str, p_one: Fraction | str) -> object:
    p = Fraction(p_one)
    return exogenous(name, BIT, (1 - p, p))


def _letters(letter: str) -> tuple[str, str]:
    return (f"{letter}'", letter)


def _truth(value: str) -> bool:
    return not value.endswith("'") and value != "0"


def _lift(domain: tuple[str, str], fn):
    """Turn a boolean function of parent truth values into a label-valued equation."""
    return lambda *vals: domain[int(bool(fn(*(_truth(v) for v in vals))))]


def fig1() -> ProbabilisticSCM:
    """Confounded treatment: Z -> X, Z -> Y, X -> Y."""
    return ProbabilisticSCM.build(
        [_coin("U_Z", "3/5"), _coin("U_X", "1/4"), _coin("U_Y", "1/6")],
        [
            ("Z", BIT, ["U_Z"], _lift(BIT, lambda u: u)),
            ("X", BIT, ["Z", "U_X"], _lift(BIT, lambda z, u: z ^ u)),
            ("Y", BIT, ["X", "Z", "U_Y"], _lift(BIT, lambda x, z, u: (x and z) ^ u)),
        ],
    )


def fig2() -> ProbabilisticSCM:
    """Firing squad: court order U, captain C, riflemen A and B, death D."""
    A, B, C, D = _letters("a"), _letters("b"), _letters("c"), _letters("d")
    return ProbabilisticSCM.build(
        [_coin("U", "2/3")],
        [
            ("C", C, ["U"], _lift(C, lambda u: u)),
            ("A", A, ["C"], _lift(A, lambda c: c)),
            ("B", B, ["C"], _lift(B, lambda c: c)),
            ("D", D, ["A", "B"], _lift(D, lambda a, b: a or b)),
        ],
    )


def fig3() -> ProbabilisticSCM:
    """Back-door chain C -> Z -> T -> Y with C -> X -> Y."""
    C, X, Z, T, Y = (_letters(v) for v in "cxzty")
    return ProbabilisticSCM.build(
        [_coin("U_C", "3/5"), _coin("U_X", "1/4"), _coin("U_Z", "1/3"), _coin("U_T", "1/5"), _coin("U_Y", "2/7")],
        [
            ("C", C, ["U_C"], _lift(C, lambda u: u)),
            ("X", X, ["C", "U_X"], _lift(X, lambda c, u: c ^ u)),
            ("Z", Z, ["C", "U_Z"], _lift(Z, lambda c, u: c ^ u)),
            ("T", T, ["Z", "U_T"], _lift(T, lambda z, u: z ^ u)),
            ("Y", Y, ["X", "T", "U_Y"], _lift(Y, lambda x, t, u: (x and t) ^ u)),
        ],
    )


def fig4() -> ProbabilisticSCM:
    """Collider evidence: X -> W <- Z, Z -> T -> Y, X -> Y."""
    X, Z, W, T, Y = (_letters(v) for v in "xzwty")
    return ProbabilisticSCM.build(
        [_coin("U_X", "1/3"), _coin("U_Z", "2/5"), _coin("U_W", "1/8"), _coin("U_T", "1/4"), _coin("U_Y", "1/5")],
        [
            ("X", X, ["U_X"], _lift(X, lambda u: u)),
            ("Z", Z, ["U_Z"], _lift(Z, lambda u: u)),
            ("W", W, ["X", "Z", "U_W"], _lift(W, lambda x, z, u: (x or z) ^ u)),
            ("T", T, ["Z", "U_T"], _lift(T, lambda z, u: z ^ u)),
            ("Y", Y, ["X", "T", "U_Y"], _lift(Y, lambda x, t, u: (x and t) ^ u)),
        ],
    )


def fig5(variant: str = "default") -> ProbabilisticSCM:
    """Input X, environment E, representation R, label Y.

    ``variant``: ``"default"`` (E -> X), ``"independent"`` (no E -> X edge) or
    ``"deterministic"``, where X is three-valued and observing ``x''`` pins
    E to ``e`` while ``x`` remains possible under either environment.
    """
    X, E, R, Y = (_letters(v) for v in "xery")
    exo = [_coin("U_E", "2/3"), _coin("U_X", "1/4"), _coin("U_R", "1/5"), _coin("U_Y", "1/7")]
    if variant == "default":
        x_eq = ("X", X, ["E", "U_X"], _lift(X, lambda e, u: e ^ u))
    elif variant == "independent":
        x_eq = ("X", X, ["U_X"], _lift(X, lambda u: u))
    elif variant == "deterministic":
        X = ("x'", "x", "x''")

        def x_of(e, u):
            if u == "0":
                return "x"
            return "x''" if _truth(e) else "x'"

        x_eq = ("X", X, ["E", "U_X"], x_of)
    else:
        raise ValueError(f"unknown fig5 variant {variant!r}")
    return ProbabilisticSCM.build(
        exo,
        [
            ("E", E, ["U_E"], _lift(E, lambda u: u)),
            x_eq,
            ("R", R, ["X", "E", "U_R"], _lift(R, lambda x, e, u: (x and e) ^ u)),
            ("Y", Y, ["R", "U_Y"], _lift(Y, lambda r, u: r ^ u)),
        ],
    )


_BUILDERS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}
FIXTURES = tuple(_BUILDERS)


def build(name: str) -> ProbabilisticSCM:
    return _BUILDERS[name]()


def text(name: str) -> str:
    """Embedded model file for ``name``."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return resources.files(__package__).joinpath("fixtures", f"{name}.json").read_text()


def load(name: str) -> ProbabilisticSCM:
    return parse_model(text(name))


def emit(directory: str | Path) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in FIXTURES:
        path = out / f"{name}.json"
        path.write_text(text(name))
        written.append(path)
    return written


if __name__ == "__main__":  # regenerate the embedded files
    here = Path(__file__).parent / "fixtures"
    for name, builder in _BUILDERS.items():
        (here / f"{name}.json").write_text(render_model(builder()))
