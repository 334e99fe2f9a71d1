"""Write a model by hand, save it, and query it from Python and the shell.

A drug T is taken more often by sicker patients S; recovery R depends on both.
"""
import subprocess
import sys
import tempfile
from pathlib import Path

from crossworld import Intervention, ProbabilisticSCM, counterfactual_probability, render_model, validate
from crossworld.scm import exogenous

bit = ("0", "1")
model = ProbabilisticSCM.build(
    [
        exogenous("U_S", bit, ["7/10", "3/10"]),
        exogenous("U_T", bit, ["4/5", "1/5"]),
        exogenous("U_R", bit, ["9/10", "1/10"]),
    ],
    [
        ("S", bit, ["U_S"], lambda u: u),
        ("T", bit, ["S", "U_T"], lambda s, u: str(int(s) ^ int(u))),
        ("R", bit, ["T", "S", "U_R"], lambda t, s, u: str((int(t) or not int(s)) ^ int(u))),
    ],
)
print("violations:", validate(model).violations)

# %% would an untreated patient who did not recover have recovered on the drug?
iv = Intervention("T", "1")
for method in ("enumerate", "abduction"):
    print(method, counterfactual_probability(model, iv, ("R", "1"), {"T": "0", "R": "0"}, method))

# %% the population-level question is identifiable from observational data by adjusting for S
for method, adjust in (("enumerate", ()), ("adjust", ["S"])):
    print(method, counterfactual_probability(model, iv, ("R", "1"), {}, method, adjust))

# %% same thing from the command line
path = Path(tempfile.mkdtemp()) / "drug.json"
path.write_text(render_model(model))
cli = [sys.executable, "-m", "crossworld"]
sys.stdout.flush()
subprocess.run([*cli, "query", str(path), "--do", "T=1", "--target", "R_1=1", "--method", "adjust:S", "--check"])
subprocess.run([*cli, "build", str(path), "--do", "T=1", "--emit", "dot"])
