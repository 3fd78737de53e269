import numpy as np
import pytest

from cautiousbp import (
    build_junction_tree,
    compile_network,
    initialize_consistent,
    joint,
    marginalize,
    network_from_document,
)
from netgen import random_network


def binary_net(edges, names):
    """Uniform-ish CPTs are irrelevant for structure tests; use fixed ones."""
    cpds = []
    for name in names:
        parents = [a for a, b in edges if b == name]
        k = len(parents)
        cols = [0.3 + 0.05 * i for i in range(2**k)]
        cpds.append(
            {
                "variable": name,
                "parents": parents,
                "values": cols + [1 - c for c in cols],
            }
        )
    return network_from_document(
        {
            "variables": [{"name": n, "states": ["t", "f"]} for n in names],
            "cpds": cpds,
        }
    )


# -- structure ----------------------------------------------------------------


def test_chain3_structure(chain3_tree):
    assert [c.domain.variables for c in chain3_tree.cliques] == [("A", "B"), ("B", "C")]
    assert [s.domain.variables for s in chain3_tree.separators] == [("B",)]
    assert chain3_tree.root == 0
    assert chain3_tree.family_clique == {"A": 0, "B": 0, "C": 1}


def test_collider_marries_parents():
    net = binary_net([("A", "C"), ("B", "C")], ["A", "B", "C"])
    tree = compile_network(net)
    assert len(tree.cliques) == 1
    assert tree.cliques[0].domain.variables == ("A", "B", "C")
    assert not tree.separators


def test_diamond_two_triangles():
    net = binary_net(
        [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")], ["A", "B", "C", "D"]
    )
    tree = compile_network(net)
    assert sorted(len(c.domain) for c in tree.cliques) == [3, 3]
    assert len(tree.separators) == 1
    assert len(tree.separators[0].domain) == 2


def test_every_family_is_assigned_to_lowest_clique(chain3_net):
    tree = build_junction_tree(chain3_net)
    for name in chain3_net.names:
        clique = tree.cliques[tree.family_clique[name]]
        assert set(chain3_net.family(name)) <= set(clique.domain.variables)
        assert name in clique.family_of
        # lowest index among containing cliques
        hosts = [
            c.index
            for c in tree.cliques
            if set(chain3_net.family(name)) <= set(c.domain.variables)
        ]
        assert tree.family_clique[name] == min(hosts)


def test_running_intersection_property():
    rng = np.random.default_rng(7)
    for _ in range(25):
        net = random_network(rng)
        tree = compile_network(net)
        for name in net.names:
            holders = set(tree.cliques_containing(name))
            # the cliques holding the variable must induce a connected subtree
            seen = {min(holders)}
            frontier = [min(holders)]
            while frontier:
                v = frontier.pop()
                for _, w in tree.neighbors[v]:
                    if w in holders and w not in seen:
                        seen.add(w)
                        frontier.append(w)
            assert seen == holders


def test_tree_shape_invariants():
    rng = np.random.default_rng(8)
    for _ in range(25):
        tree = compile_network(random_network(rng))
        assert len(tree.separators) == len(tree.cliques) - 1
        assert len(tree.preorder) == len(tree.cliques)
        for s in tree.separators:
            inter = set(tree.cliques[s.clique_a].domain.variables) & set(
                tree.cliques[s.clique_b].domain.variables
            )
            assert set(s.domain.variables) == inter


def test_determinism(chain3_net):
    a = compile_network(chain3_net)
    b = compile_network(chain3_net)
    assert [c.domain for c in a.cliques] == [c.domain for c in b.cliques]
    assert a.root == b.root and a.family_clique == b.family_clique
    for ca, cb in zip(a.cliques, b.cliques):
        np.testing.assert_array_equal(ca.baseline.values, cb.baseline.values)


def test_disconnected_network_gets_scalar_separator():
    net = binary_net([], ["A", "B"])
    tree = compile_network(net)
    assert len(tree.cliques) == 2
    assert tree.separators[0].domain.variables == ()
    assert tree.separators[0].baseline.scalar() == pytest.approx(1.0, abs=1e-12)


# -- calibration ----------------------------------------------------------------


def test_chain3_calibration_against_oracle(chain3_net, chain3_tree):
    np.testing.assert_allclose(
        chain3_tree.separators[0].baseline.values, [0.48, 0.52], atol=1e-9
    )
    full = joint(chain3_net)
    for clique in chain3_tree.cliques:
        expected = marginalize(full, clique.domain).values
        np.testing.assert_allclose(clique.baseline.values, expected, atol=1e-9)
    assert chain3_tree.cliques[chain3_tree.root].baseline.total() == pytest.approx(
        1.0, abs=1e-9
    )


def test_global_consistency_on_random_networks():
    rng = np.random.default_rng(9)
    for _ in range(25):
        net = random_network(rng)
        tree = compile_network(net)
        full = joint(net)
        for s in tree.separators:
            from_a = marginalize(tree.cliques[s.clique_a].baseline, s.domain).values
            from_b = marginalize(tree.cliques[s.clique_b].baseline, s.domain).values
            np.testing.assert_allclose(from_a, from_b, atol=1e-9)
            np.testing.assert_allclose(from_a, s.baseline.values, atol=1e-9)
        for name in net.names:
            expected = marginalize(full, (name,)).values
            for c in tree.cliques_containing(name):
                got = marginalize(tree.cliques[c].baseline, (name,)).values
                np.testing.assert_allclose(got, expected, atol=1e-9)


def test_initialize_consistent_is_separate_step(chain3_net):
    raw = build_junction_tree(chain3_net)
    assert not raw.calibrated
    calibrated = initialize_consistent(raw)
    assert calibrated.calibrated
    # raw tables are the CPT products, not marginals
    assert raw.cliques[1].baseline.total() == pytest.approx(2.0, abs=1e-9)
    assert calibrated.cliques[1].baseline.total() == pytest.approx(1.0, abs=1e-9)


def test_tree_document(chain3_tree):
    doc = chain3_tree.to_document()
    assert doc["root"] == 0
    assert doc["cliques"][0]["variables"] == ["A", "B"]
    assert doc["separators"][0]["between"] == [0, 1]
