import math

import numpy as np
import pytest

from cautiousbp import (
    CautiousState,
    Finding,
    Hypothesis,
    HuginState,
    PartitionError,
    SensitivityThresholds,
    UndefinedPosteriorError,
    classify_sensitivity,
    compile_network,
    condition_on_hypothesis,
    conflict,
    network_from_document,
    partial_conflict,
    posterior_given_subset,
    what_if_posterior,
)
from conftest import hard
from netgen import random_findings, random_network


def propagated(tree, findings=()):
    state = CautiousState(tree, findings)
    state.propagate()
    return state


def conditioned_pair(tree, hypothesis, findings):
    conditioned_tree, p_h = condition_on_hypothesis(tree, hypothesis)
    return propagated(tree, findings), propagated(conditioned_tree, findings), p_h


def independent_pair_net():
    return network_from_document(
        {
            "variables": [
                {"name": "A", "states": ["t", "f"]},
                {"name": "B", "states": ["t", "f"]},
            ],
            "cpds": [
                {"variable": "A", "parents": [], "values": [0.3, 0.7]},
                {"variable": "B", "parents": [], "values": [0.6, 0.4]},
            ],
        }
    )


# -- conflict ------------------------------------------------------------------


def test_conflict_single_finding_is_zero(chain3_tree):
    state = propagated(chain3_tree, [hard("f1", "B", "t")])
    assert conflict(state).conf == pytest.approx(0.0, abs=1e-12)


def test_conflict_chain3_value(chain3_tree):
    state = propagated(chain3_tree, [hard("f1", "B", "t"), hard("f2", "C", "t")])
    report = conflict(state)
    expected = math.log(0.48 * 0.388 / 0.336)
    assert report.conf == pytest.approx(expected, abs=1e-9)
    assert report.conf == pytest.approx(-0.5901, abs=1e-4)
    assert report.finding_probabilities["f1"] == pytest.approx(0.48, abs=1e-9)
    assert report.finding_probabilities["f2"] == pytest.approx(0.388, abs=1e-9)
    # a negative conf: the two findings support each other
    assert report.conf < 0.0


def test_conflict_on_independent_findings_is_zero():
    tree = compile_network(independent_pair_net())
    state = propagated(tree, [hard("f1", "A", "t"), hard("f2", "B", "f")])
    assert conflict(state).conf == pytest.approx(0.0, abs=1e-12)


def test_conflict_traces_single_findings(chain3_tree):
    state = propagated(chain3_tree, [hard("f1", "B", "t"), hard("f2", "C", "t")])
    report = conflict(state)
    assert len(report.partition_conflicts) == 2
    for entry in report.partition_conflicts:
        assert entry["conf"] == pytest.approx(report.conf, abs=1e-9)  # two findings


def test_partial_conflict(chain3_tree):
    state = propagated(chain3_tree, [hard("f1", "A", "t"), hard("f2", "C", "t")])
    value = partial_conflict(state, ["f1"], ["f2"])
    assert value == pytest.approx(math.log(0.4 * 0.388 / 0.256), abs=1e-9)
    assert value == pytest.approx(-0.5005, abs=1e-4)


def test_partial_conflict_with_empty_part(chain3_tree):
    state = propagated(chain3_tree, [hard("f1", "A", "t"), hard("f2", "C", "t")])
    assert partial_conflict(state, [], ["f1", "f2"]) == pytest.approx(0.0, abs=1e-12)


def test_partial_conflict_dseparated_is_zero():
    tree = compile_network(independent_pair_net())
    state = propagated(tree, [hard("f1", "A", "t"), hard("f2", "B", "t")])
    assert partial_conflict(state, ["f1"], ["f2"]) == pytest.approx(0.0, abs=1e-12)


def test_partial_conflict_requires_partition(chain3_tree):
    state = propagated(chain3_tree, [hard("f1", "A", "t"), hard("f2", "C", "t")])
    with pytest.raises(PartitionError):
        partial_conflict(state, ["f1"], ["f1", "f2"])
    with pytest.raises(PartitionError):
        partial_conflict(state, ["f1"], [])


def test_conflict_is_partition_additive():
    # conf(e) = partial(e1, e2) + conf within e1 + conf within e2
    net = network_from_document(
        {
            "variables": [
                {"name": n, "states": ["t", "f"]} for n in ("A", "B", "C", "D")
            ],
            "cpds": [
                {"variable": "A", "parents": [], "values": [0.4, 0.6]},
                {"variable": "B", "parents": ["A"], "values": [0.9, 0.2, 0.1, 0.8]},
                {"variable": "C", "parents": ["B"], "values": [0.7, 0.1, 0.3, 0.9]},
                {"variable": "D", "parents": ["C"], "values": [0.6, 0.3, 0.4, 0.7]},
            ],
        }
    )
    tree = compile_network(net)
    findings = [hard("fa", "A", "t"), hard("fc", "C", "t"), hard("fd", "D", "f")]
    state = propagated(tree, findings)
    total = conflict(state).conf
    split = partial_conflict(state, ["fa"], ["fc", "fd"])
    p_c = state.subset_probability(["fc"])
    p_d = state.subset_probability(["fd"])
    p_cd = state.subset_probability(["fc", "fd"])
    within = math.log(p_c * p_d / p_cd)
    assert total == pytest.approx(split + within, abs=1e-9)


# -- posteriors ------------------------------------------------------------------


def test_posterior_of_empty_subset_is_prior(chain3_tree):
    clean, conditioned, p_h = conditioned_pair(
        chain3_tree, Hypothesis.of({"A": "t"}), [hard("f1", "C", "t")]
    )
    assert posterior_given_subset(clean, conditioned, p_h, ()) == pytest.approx(
        0.4, abs=1e-9
    )


def test_posterior_given_subset_value(chain3_tree):
    clean, conditioned, p_h = conditioned_pair(
        chain3_tree, Hypothesis.of({"A": "t"}), [hard("f1", "C", "t")]
    )
    value = posterior_given_subset(clean, conditioned, p_h, ["f1"])
    assert value == pytest.approx(0.256 / 0.388, abs=1e-9)
    assert value == pytest.approx(0.6598, abs=1e-4)


def test_posterior_full_set_matches_direct_marginal(chain3_tree):
    findings = [hard("f1", "B", "t"), hard("f2", "C", "t")]
    clean, conditioned, p_h = conditioned_pair(
        chain3_tree, Hypothesis.of({"A": "t"}), findings
    )
    via_bayes = posterior_given_subset(clean, conditioned, p_h, ["f1", "f2"])
    hugin = HuginState(chain3_tree)
    for f in findings:
        hugin.enter_finding(f)
    hugin.propagate()
    assert via_bayes == pytest.approx(hugin.marginal("A")[0], abs=1e-9)


def test_bayes_consistency(chain3_tree):
    findings = [hard("f1", "B", "t"), hard("f2", "C", "t")]
    clean, conditioned, p_h = conditioned_pair(
        chain3_tree, Hypothesis.of({"A": "t"}), findings
    )
    e = clean.finding_ids
    lhs = posterior_given_subset(clean, conditioned, p_h, e) * clean.subset_probability(e)
    rhs = conditioned.subset_probability(e) * p_h
    assert lhs == pytest.approx(rhs, abs=1e-9)


# -- sensitivity classification -------------------------------------------------------


def chain3_report(chain3_tree, thresholds=SensitivityThresholds(0.2, 0.2, 0.2)):
    hypothesis = Hypothesis.of({"A": "t"})
    findings = [hard("fb", "B", "t"), hard("fc", "C", "t")]
    clean, conditioned, p_h = conditioned_pair(chain3_tree, hypothesis, findings)
    return classify_sensitivity(clean, conditioned, hypothesis, p_h, thresholds)


def test_chain3_sensitivity_fixture(chain3_tree):
    report = chain3_report(chain3_tree)
    assert report.p_h == pytest.approx(0.4, abs=1e-9)
    assert report.p_h_given_e == pytest.approx(0.75, abs=1e-9)
    rows = {frozenset(r.ids): r for r in report.subsets}
    assert len(rows) == 4

    sufficient = {ids for ids, r in rows.items() if r.sufficient}
    assert sufficient == {
        frozenset({"fb"}),
        frozenset({"fc"}),
        frozenset({"fb", "fc"}),
    }
    minimal = {ids for ids, r in rows.items() if r.minimal_sufficient}
    assert minimal == {frozenset({"fb"}), frozenset({"fc"})}
    assert report.crucial_findings == frozenset()
    assert not any(r.decisive for r in report.subsets)
    for singleton in (frozenset({"fb"}), frozenset({"fc"})):
        assert rows[singleton].important is False
    # the full evidence set is important: dropping everything moves the
    # posterior from 0.75 back to the 0.4 prior
    assert rows[frozenset({"fb", "fc"})].important is True

    assert rows[frozenset({"fc"})].p_h_given == pytest.approx(0.6598, abs=1e-4)
    assert rows[frozenset()].p_h_given == pytest.approx(0.4, abs=1e-9)


def test_flag_logic_invariants(chain3_tree):
    report = chain3_report(chain3_tree)
    sufficient_sets = [r.ids for r in report.subsets if r.sufficient]
    for row in report.subsets:
        if row.minimal_sufficient:
            assert row.sufficient
    for fid in report.crucial_findings:
        assert all(fid in ids for ids in sufficient_sets)


def test_full_set_is_always_sufficient_and_decisiveness_threshold(chain3_tree):
    report = chain3_report(chain3_tree, SensitivityThresholds(0.2, 0.2, 0.3))
    rows = {frozenset(r.ids): r for r in report.subsets}
    full = rows[frozenset({"fb", "fc"})]
    assert full.sufficient and full.sufficiency_ratio == pytest.approx(1.0, abs=1e-12)
    # P(h|e) = 0.75 > 1 - 0.3
    assert full.decisive


def test_scale_freeness_of_classification(chain3_tree):
    hypothesis = Hypothesis.of({"A": "t"})
    base = [hard("fb", "B", "t"), hard("fc", "C", "t")]
    scaled = [Finding("fb", "B", (3.7, 0.0)), hard("fc", "C", "t")]
    reports = []
    for findings in (base, scaled):
        clean, conditioned, p_h = conditioned_pair(chain3_tree, hypothesis, findings)
        reports.append(classify_sensitivity(clean, conditioned, hypothesis, p_h))
    flags = [
        [
            (sorted(r.ids), r.sufficient, r.minimal_sufficient, r.decisive, r.important)
            for r in report.subsets
        ]
        for report in reports
    ]
    assert flags[0] == flags[1]
    for a, b in zip(reports[0].subsets, reports[1].subsets):
        assert a.p_h_given == pytest.approx(b.p_h_given, rel=1e-9)


# -- what-if posterior ---------------------------------------------------------------------


def test_what_if_posterior_identity(chain3_tree):
    findings = [hard("f1", "B", "t"), hard("f2", "C", "t")]
    clean, conditioned, p_h = conditioned_pair(
        chain3_tree, Hypothesis.of({"A": "t"}), findings
    )
    value = what_if_posterior(clean, conditioned, p_h, "f2", hard("y", "C", "t"))
    direct = posterior_given_subset(clean, conditioned, p_h, clean.finding_ids)
    assert value == pytest.approx(direct, abs=1e-12)


def test_what_if_posterior_swap(chain3_tree):
    clean, conditioned, p_h = conditioned_pair(
        chain3_tree, Hypothesis.of({"A": "t"}), [hard("f1", "C", "t")]
    )
    value = what_if_posterior(clean, conditioned, p_h, "f1", hard("y", "C", "f"))
    assert value == pytest.approx(0.144 / 0.612, abs=1e-9)
    assert value == pytest.approx(0.2353, abs=1e-4)


def test_what_if_posterior_sends_nothing(chain3_tree):
    clean, conditioned, p_h = conditioned_pair(
        chain3_tree, Hypothesis.of({"A": "t"}), [hard("f1", "C", "t")]
    )
    before = clean.counters.messages_sent + conditioned.counters.messages_sent
    what_if_posterior(clean, conditioned, p_h, "f1", hard("y", "C", "f"))
    after = clean.counters.messages_sent + conditioned.counters.messages_sent
    assert before == after


def test_what_if_posterior_undefined_on_zero_mass():
    from netgen import zero_separator_chain

    net, _, _ = zero_separator_chain()  # C=t impossible when B=f
    tree = compile_network(net)
    findings = [hard("fb", "B", "f"), hard("fc", "C", "f")]
    clean, conditioned, p_h = conditioned_pair(tree, Hypothesis.of({"A": "t"}), findings)
    with pytest.raises(UndefinedPosteriorError):
        what_if_posterior(clean, conditioned, p_h, "fc", hard("y", "C", "t"))


def test_classification_on_random_networks_is_well_formed():
    rng = np.random.default_rng(31)
    done = 0
    while done < 8:
        net = random_network(rng)
        findings = random_findings(rng, net, max_findings=3)
        if not findings:
            continue
        hyp_var = net.names[int(rng.integers(0, len(net.names)))]
        hypothesis = Hypothesis.of({hyp_var: "t"})
        tree = compile_network(net)
        try:
            clean, conditioned, p_h = conditioned_pair(tree, hypothesis, findings)
        except Exception:
            continue
        if not clean.evidence_mass:
            continue
        try:
            report = classify_sensitivity(clean, conditioned, hypothesis, p_h)
        except Exception:
            continue
        sufficient_sets = [r.ids for r in report.subsets if r.sufficient]
        for row in report.subsets:
            if row.minimal_sufficient:
                assert row.sufficient
        for fid in report.crucial_findings:
            assert all(fid in s for s in sufficient_sets)
        done += 1
