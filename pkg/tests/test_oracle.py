import numpy as np
import pytest

from cautiousbp import (
    CapacityError,
    Hypothesis,
    ImpossibleEvidenceError,
    joint,
    marginalize,
    network_from_document,
    oracle_posterior,
    oracle_prob,
)
from conftest import hard


def test_joint_chain3(chain3_net):
    table = joint(chain3_net)
    assert table.values.size == 8
    assert table.total() == pytest.approx(1.0, abs=1e-12)


def test_prob_no_findings_is_one(chain3_net):
    assert oracle_prob(chain3_net, []) == pytest.approx(1.0, abs=1e-12)


def test_prob_chain3_values(chain3_net):
    assert oracle_prob(chain3_net, [hard("f1", "B", "t")]) == pytest.approx(0.48, abs=1e-12)
    both = [hard("f1", "B", "t"), hard("f2", "C", "t")]
    assert oracle_prob(chain3_net, both) == pytest.approx(0.336, abs=1e-12)


def test_joint_of_independent_variables_is_outer_product():
    net = network_from_document(
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
    np.testing.assert_allclose(
        joint(net).values, np.outer([0.3, 0.7], [0.6, 0.4]).ravel(), rtol=1e-12
    )
    p = oracle_prob(net, [hard("a", "A", "t"), hard("b", "B", "t")])
    assert p == pytest.approx(0.3 * 0.6, abs=1e-12)


def test_capacity_cap():
    n = 21  # 2^21 cells exceeds the default cap
    doc = {
        "variables": [{"name": f"X{i}", "states": ["t", "f"]} for i in range(n)],
        "cpds": [
            {"variable": f"X{i}", "parents": [], "values": [0.5, 0.5]} for i in range(n)
        ],
    }
    with pytest.raises(CapacityError):
        joint(network_from_document(doc))


def test_posterior_values(chain3_net):
    h = Hypothesis.of({"A": "t"})
    assert oracle_posterior(chain3_net, h, []) == pytest.approx(0.4, abs=1e-12)
    assert oracle_posterior(chain3_net, h, [hard("f1", "B", "t")]) == pytest.approx(
        0.75, abs=1e-12
    )


def test_posterior_contradiction_and_zero_mass(chain3_net):
    h = Hypothesis.of({"B": "f"})
    assert oracle_posterior(chain3_net, h, [hard("f1", "B", "t")]) == 0.0
    with pytest.raises(ImpossibleEvidenceError):
        oracle_posterior(
            chain3_net, h, [hard("f1", "B", "t"), hard("f2", "B", "f")]
        )


def test_prob_factorizes_over_disconnected_components():
    # random forests: every variable has at most one parent, several roots
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        names = [f"X{i}" for i in range(n)]
        parent = {}
        for j in range(1, n):
            if rng.random() < 0.5:
                parent[names[j]] = names[int(rng.integers(0, j))]
        cpds = []
        for j, nm in enumerate(names):
            ps = [parent[nm]] if nm in parent else []
            cols = [float(rng.uniform(0.1, 0.9)) for _ in range(2 ** len(ps))]
            cpds.append(
                {"variable": nm, "parents": ps, "values": cols + [1 - c for c in cols]}
            )
        net = network_from_document(
            {
                "variables": [{"name": nm, "states": ["t", "f"]} for nm in names],
                "cpds": cpds,
            }
        )
        # connected components of the forest
        component = {nm: nm for nm in names}

        def find(x):
            while component[x] != x:
                component[x] = component[component[x]]
                x = component[x]
            return x

        for child, par in parent.items():
            component[find(child)] = find(par)
        findings = [hard(f"f{i}", nm, "t") for i, nm in enumerate(names)]
        total = oracle_prob(net, findings)
        product = 1.0
        for root in {find(nm) for nm in names}:
            members = [f for f, nm in zip(findings, names) if find(nm) == root]
            product *= oracle_prob(net, members)
        assert total == pytest.approx(product, rel=1e-9)


def test_marginal_matches_chain_rule(chain3_net):
    p_b = marginalize(joint(chain3_net), ("B",)).values
    np.testing.assert_allclose(p_b, [0.48, 0.52], atol=1e-12)
    p_c = marginalize(joint(chain3_net), ("C",)).values
    np.testing.assert_allclose(p_c, [0.48 * 0.7 + 0.52 * 0.1, 1 - 0.388], atol=1e-12)
