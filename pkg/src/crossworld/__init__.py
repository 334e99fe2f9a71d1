"""Exact cross-world counterfactual reasoning for discrete structural causal models."""
from .graph import (
    CausalGraph,
    GraphError,
    NodeKind,
    Path,
    SeparationVerdict,
    all_paths,
    ancestors,
    backdoor_admissible,
    d_separated,
    descendants,
)
from .inference import (
    CriterionVerdict,
    InadmissibleError,
    PositivityError,
    QueryError,
    ZeroEvidenceError,
    abduction_action_prediction,
    adjustment_estimate,
    check_ci_numeric,
    consistency_check,
    counterfactual_criterion,
    counterfactual_probability,
    crossworld_joint,
    graphood_eq7,
    oracle_probability,
)
from .scm import (
    CapExceededError,
    Endogenous,
    Exogenous,
    ModelError,
    ModelSyntaxError,
    ProbabilisticSCM,
    ValidationReport,
    observational_joint,
    parse_model,
    render_model,
    solve,
    validate,
)
from .tables import JointTable
from .worlds import (
    CrossWorldGraph,
    CrossWorldModel,
    Intervention,
    Role,
    build_teleporter,
    build_twin,
    counterfactual_name,
    export_dot,
    find_teleporters,
    intervene,
    model_graph,
)

__version__ = "0.1.0"
