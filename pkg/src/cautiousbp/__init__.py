"""Junction-tree inference for discrete Bayesian networks with direct access
to evidence-subset probabilities, conflict analysis, sensitivity
classification and propagation-free what-if queries."""

from .analysis import (
    ConflictReport,
    SensitivityReport,
    SensitivityThresholds,
    SubsetClassification,
    classify_sensitivity,
    conflict,
    partial_conflict,
    posterior_given_subset,
    what_if_posterior,
)
from .cautious import AccessibleSubset, CautiousState, FindingMessage
from .errors import (
    CapacityError,
    CautiousBPError,
    DuplicateFindingError,
    ImpossibleEvidenceError,
    ImpossibleHypothesisError,
    InconsistencyError,
    ModelError,
    NotAccessibleError,
    PartitionError,
    StructuralError,
    UndefinedPosteriorError,
    UnknownFindingError,
    UnknownVariableError,
)
from .hugin import HuginState, condition_on_hypothesis
from .jointree import (
    Clique,
    JunctionTree,
    Separator,
    assemble_tree,
    build_junction_tree,
    compile_network,
    initialize_consistent,
)
from .model import (
    BayesianNetwork,
    Finding,
    Hypothesis,
    Variable,
    hard_finding,
    indicator,
    network_from_document,
    network_to_document,
    parse_findings,
    parse_network,
    serialize_network,
)
from .oracle import joint, oracle_posterior, oracle_prob, oracle_table
from .potentials import (
    EMPTY_DOMAIN,
    Domain,
    OpCounters,
    Potential,
    divide,
    marginalize,
    multiply,
    unit,
)

__version__ = "0.1.0"
