"""Ground truth by full joint enumeration.

Deliberately naive: multiply every CPT into one table over all variables and
sum.  Used by tests to check every engine; kept independent of the junction
tree machinery so it stays trustworthy.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import CapacityError, ImpossibleEvidenceError
from .model import BayesianNetwork, Finding, Hypothesis
from .potentials import Domain, Potential, marginalize, multiply, unit

DEFAULT_CAP = 2**20


def joint(net: BayesianNetwork, cap: int = DEFAULT_CAP) -> Potential:
    """The full joint P(all variables), variables in declaration order."""
    domain = Domain.of(net.names, (net.cardinality(v) for v in net.names))
    if domain.size > cap:
        raise CapacityError(
            f"joint table would need {domain.size} cells, cap is {cap}"
        )
    p = unit(domain)
    for name in net.names:
        p = multiply(p, net.cpts[name])
    return p


def oracle_table(
    net: BayesianNetwork,
    findings: Iterable[Finding],
    variables: Sequence[str],
    cap: int = DEFAULT_CAP,
) -> Potential:
    """P(variables, findings): the joint times every likelihood, marginalized."""
    p = joint(net, cap)
    for f in findings:
        p = multiply(p, f.table())
    return marginalize(p, variables)


def oracle_prob(
    net: BayesianNetwork, findings: Iterable[Finding], cap: int = DEFAULT_CAP
) -> float:
    """P(e) for the given findings by direct summation."""
    return oracle_table(net, findings, (), cap).scalar()


def oracle_posterior(
    net: BayesianNetwork,
    hypothesis: Hypothesis,
    findings: Iterable[Finding],
    cap: int = DEFAULT_CAP,
) -> float:
    """P(h | e) by two direct summations."""
    findings = list(findings)
    denominator = oracle_prob(net, findings, cap)
    if denominator == 0.0:
        raise ImpossibleEvidenceError("evidence has zero mass")
    numerator = oracle_prob(
        net, findings + hypothesis.findings(net.state_labels), cap
    )
    return numerator / denominator
