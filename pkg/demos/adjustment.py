"""Counterfactual probabilities three ways: enumeration, abduction, adjustment.

The adjustment formula needs only the observational distribution, so it is
what you would use with data. Here the answers are exact rationals and must
agree to the last digit.
"""
from crossworld import (
    InadmissibleError,
    Intervention,
    abduction_action_prediction,
    adjustment_estimate,
    counterfactual_criterion,
    oracle_probability,
)
from crossworld.fixtures import load

# %% back-door chain, no evidence
m = load("fig3")
iv = Intervention("X", "x")
print("oracle       ", oracle_probability(m, iv, ("Y", "y")))
print("abduction    ", abduction_action_prediction(m, iv, ("Y", "y")))
for z in ("C", "Z", "T"):
    crit = counterfactual_criterion(m, iv, "Y", (), [z])
    print(f"adjust {{{z}}}   ", adjustment_estimate(m, iv, ("Y", "y"), {}, [z]), "criterion:", crit.satisfied)

# %% evidence on a collider
m = load("fig4")
evidence = {"W": "w"}
print("\nP(Y_x=y | W=w) oracle:", oracle_probability(m, iv, ("Y", "y"), evidence))
for z in (["T"], ["Z"], []):
    try:
        print(f"adjust {z}:", adjustment_estimate(m, iv, ("Y", "y"), evidence, z))
    except InadmissibleError as exc:
        print(f"adjust {z}: {exc}")
