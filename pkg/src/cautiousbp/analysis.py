"""Conflict and sensitivity analysis on top of the two engines.

Conflict compares the product of the individual finding probabilities with
the joint evidence probability (natural log; well above 0 hints that the
findings disagree).  Sensitivity classifies accessible evidence subsets
against a hypothesis using the two-tree workflow: one propagated state on
the clean tree and one on the tree conditioned on the hypothesis, with
Bayes' formula joining them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .cautious import CautiousState
from .errors import (
    ImpossibleEvidenceError,
    ImpossibleHypothesisError,
    PartitionError,
    UndefinedPosteriorError,
)
from .model import Finding, Hypothesis


@dataclass(frozen=True)
class SensitivityThresholds:
    theta1: float = 0.2
    theta2: float = 0.2
    theta3: float = 0.2

    def __post_init__(self) -> None:
        for name in ("theta1", "theta2", "theta3"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta1, self.theta2, self.theta3)


@dataclass
class ConflictReport:
    conf: float
    p_e: float
    finding_probabilities: dict[str, float]
    partition_conflicts: list[dict] = field(default_factory=list)

    def to_document(self) -> dict:
        return {
            "conf": self.conf,
            "p_e": self.p_e,
            "finding_probabilities": dict(sorted(self.finding_probabilities.items())),
            "partition_conflicts": self.partition_conflicts,
        }


def conflict(state: CautiousState, trace_singletons: bool = True) -> ConflictReport:
    """conf(e) = ln( prod_f P(f) / P(e) ) from one propagated state.

    Every singleton is accessible under cautious entering, so no extra
    propagation happens.  When ``trace_singletons`` is set, each finding
    whose complement is accessible also gets its one-against-the-rest
    partial conflict, which is the usual way of tracing a conflict down.
    """
    if not state.propagated:
        raise ImpossibleEvidenceError("state has not been propagated")
    p_e = state.evidence_mass
    if not p_e:
        raise ImpossibleEvidenceError("evidence has zero probability")
    probabilities = {
        fid: state.subset_probability([fid]) for fid in sorted(state.finding_ids)
    }
    conf_value = sum(math.log(p) for p in probabilities.values()) - math.log(p_e)
    report = ConflictReport(conf_value, p_e, probabilities)
    if trace_singletons and len(probabilities) > 1:
        family = {s.ids for s in state.accessible_subsets()}
        for fid in sorted(state.finding_ids):
            rest = state.finding_ids - {fid}
            if rest in family:
                value = partial_conflict(state, [fid], rest)
                report.partition_conflicts.append(
                    {"part": [fid], "rest": sorted(rest), "conf": value}
                )
    return report


def partial_conflict(
    state: CautiousState, part_a: Iterable[str], part_b: Iterable[str]
) -> float:
    """ln( P(e1) P(e2) / P(e) ) for a partition e = e1 ∪ e2 of the evidence."""
    a = frozenset(part_a)
    b = frozenset(part_b)
    if a & b or (a | b) != state.finding_ids:
        raise PartitionError("the two sets must partition the entered evidence")
    if not state.evidence_mass:
        raise ImpossibleEvidenceError("evidence has zero probability")
    p_a = state.subset_probability(a)
    p_b = state.subset_probability(b)
    return math.log(p_a) + math.log(p_b) - math.log(state.evidence_mass)


def posterior_given_subset(
    clean: CautiousState,
    conditioned: CautiousState,
    p_h: float,
    ids: Iterable[str],
) -> float:
    """P(h | e') by Bayes: P(e' | h) P(h) / P(e'), with P(e' | h) read from
    the state propagated on the hypothesis-conditioned tree."""
    wanted = frozenset(ids)
    p_subset = clean.subset_probability(wanted)
    if p_subset == 0.0:
        raise UndefinedPosteriorError(
            f"subset {sorted(wanted)} has zero probability"
        )
    return conditioned.subset_probability(wanted) * p_h / p_subset


@dataclass
class SubsetClassification:
    ids: frozenset[str]
    p: float
    p_h_given: float
    sufficiency_ratio: float
    sufficient: bool
    minimal_sufficient: bool
    decisive: bool
    important: bool | None  # None: complement not accessible, not evaluable
    complement_ratio: float | None

    def to_document(self) -> dict:
        return {
            "findings": sorted(self.ids),
            "p": self.p,
            "p_h_given": self.p_h_given,
            "sufficiency_ratio": self.sufficiency_ratio,
            "sufficient": self.sufficient,
            "minimal_sufficient": self.minimal_sufficient,
            "decisive": self.decisive,
            "important": self.important,
            "complement_ratio": self.complement_ratio,
        }


@dataclass
class SensitivityReport:
    hypothesis: Hypothesis
    p_h: float
    p_h_given_e: float
    thresholds: SensitivityThresholds
    subsets: list[SubsetClassification]
    crucial_findings: frozenset[str]

    def to_document(self) -> dict:
        return {
            "hypothesis": self.hypothesis.as_dict(),
            "p_h": self.p_h,
            "p_h_given_e": self.p_h_given_e,
            "thresholds": {
                "theta1": self.thresholds.theta1,
                "theta2": self.thresholds.theta2,
                "theta3": self.thresholds.theta3,
            },
            "subsets": [s.to_document() for s in self.subsets],
            "crucial_findings": sorted(self.crucial_findings),
        }


def classify_sensitivity(
    clean: CautiousState,
    conditioned: CautiousState,
    hypothesis: Hypothesis,
    p_h: float,
    thresholds: SensitivityThresholds | None = None,
) -> SensitivityReport:
    """Classify every accessible subset e' of the evidence.

    - sufficient:  P(h|e') / P(h|e) > 1 - theta2 (as printed; ratios above 1
      count, and the raw ratio is reported so the reading can be audited)
    - minimal sufficient: sufficient with no sufficient proper subset in the
      accessible family
    - decisive:   P(h|e') > 1 - theta3
    - important:  P(h|e \\ e') / P(h|e) < 1 - theta1, evaluated only when the
      complement is itself accessible (otherwise reported as not evaluable)
    - crucial findings: those contained in every sufficient set found

    Minimality and cruciality are judged over the accessible family only.
    """
    t = thresholds or SensitivityThresholds()
    if clean.finding_ids != conditioned.finding_ids:
        raise PartitionError("clean and conditioned states hold different findings")
    if not clean.evidence_mass or not conditioned.propagated:
        raise ImpossibleEvidenceError("both states must be propagated with P(e) > 0")
    everything = clean.finding_ids
    p_h_given_e = posterior_given_subset(clean, conditioned, p_h, everything)
    if p_h_given_e <= 0.0:
        raise ImpossibleHypothesisError("hypothesis has zero posterior under e")

    family = clean.accessible_subsets()
    posteriors = {
        s.ids: posterior_given_subset(clean, conditioned, p_h, s.ids) for s in family
    }
    rows = []
    sufficient_sets = []
    for s in family:
        post = posteriors[s.ids]
        ratio = post / p_h_given_e
        sufficient = ratio > 1.0 - t.theta2
        if sufficient:
            sufficient_sets.append(s.ids)
        complement = everything - s.ids
        complement_ratio = (
            posteriors[complement] / p_h_given_e if complement in posteriors else None
        )
        rows.append(
            SubsetClassification(
                ids=s.ids,
                p=clean.subset_probability(s.ids),
                p_h_given=post,
                sufficiency_ratio=ratio,
                sufficient=sufficient,
                minimal_sufficient=False,
                decisive=post > 1.0 - t.theta3,
                important=(
                    None
                    if complement_ratio is None
                    else complement_ratio < 1.0 - t.theta1
                ),
                complement_ratio=complement_ratio,
            )
        )
    sufficient_lookup = set(sufficient_sets)
    for row in rows:
        if row.sufficient:
            row.minimal_sufficient = not any(
                other < row.ids for other in sufficient_lookup
            )
    crucial = (
        frozenset.intersection(*sufficient_sets) if sufficient_sets else frozenset()
    )
    return SensitivityReport(hypothesis, p_h, p_h_given_e, t, rows, crucial)


def what_if_posterior(
    clean: CautiousState,
    conditioned: CautiousState,
    p_h: float,
    finding_id: str,
    replacement: Finding,
) -> float:
    """P(h | e with one finding swapped), via the two local what-if products
    and Bayes.  No propagation happens on either state."""
    p_swapped = clean.what_if(finding_id, replacement)
    if p_swapped == 0.0:
        raise UndefinedPosteriorError("swapped evidence has zero probability")
    return conditioned.what_if(finding_id, replacement) * p_h / p_swapped
