"""Counterfactual prediction under an environment variable.

Input X, environment E, representation R and label Y. Because E is a
teleporter, X ⊥ Y_x | E, so P(Y_x | X = x') is a sum over environments of
ordinary conditionals.
"""
from crossworld import Intervention, build_teleporter, export_dot, graphood_eq7
from crossworld.fixtures import fig5

iv = Intervention("X", "x")
for variant, xp in (("default", "x'"), ("independent", "x'"), ("deterministic", "x''")):
    r = graphood_eq7(fig5(variant), iv, xp)
    print(f"{variant:<13} terms={r.terms} certified={r.certified} matches={r.matches}")
    print("  formula:", r.table.prob({"Y_do_X=x": "y"}), " oracle:", r.oracle.prob({"Y_do_X=x": "y"}))

print(export_dot(build_teleporter(fig5(), iv), conditioned=["E"]))
