"""Why a twin network can miss an independence that the teleporter graph finds.

A court order U makes the captain C signal; riflemen A and B both fire on the
signal and the prisoner D dies if either fires. We ask: had A fired, would D
have died? and whether that answer depends on what A actually did, once we
know what B did.
"""
from crossworld import (
    Intervention,
    build_teleporter,
    build_twin,
    check_ci_numeric,
    counterfactual_name,
    crossworld_joint,
    d_separated,
    export_dot,
)
from crossworld.fixtures import load

model = load("fig2")
iv = Intervention("A", "a")
d_a = counterfactual_name("D", iv)

twin = build_twin(model, iv)
tele = build_teleporter(model, iv)
print("twin nodes:      ", ", ".join(twin.graph.names))
print("teleporter nodes:", ", ".join(tele.graph.names))

# %% the same query in both graphs
for given in (["B"], ["C"]):
    t = d_separated(twin.graph, "A", d_a, given)
    m = d_separated(tele.graph, "A", d_a, given)
    print(f"\nA ⊥ D_a | {given}")
    print("  twin:      ", "separated" if t else f"connected via {t.witness}")
    print("  teleporter:", "separated" if m else f"connected via {m.witness}")

# %% brute force settles it
joint = crossworld_joint(model, iv, ("A", d_a, "B"))
print("\nexact CI in the enumerated cross-world joint:", check_ci_numeric(joint, "A", d_a, ["B"]))
print(joint)

# %% conditioning on the real-world D opens the collider
for given in (["D", "C"], ["D", "B"]):
    v = d_separated(tele.graph, "A", d_a, given)
    print(f"teleporter A ⊥ D_a | {given}:", "separated" if v else f"connected via {v.witness}")

# %% render it
print()
print(export_dot(tele, conditioned=["B"]))
