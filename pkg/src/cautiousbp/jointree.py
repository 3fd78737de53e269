"""Compile a Bayesian network into a consistent junction tree.

Pipeline: moralize, triangulate by min-fill elimination, extract maximal
cliques, assemble a maximum-weight spanning tree over the clique graph, hang
each CPT on the lowest-indexed clique containing its family, and calibrate
so each clique holds its true marginal and each separator the marginal on
the intersection.

Everything here is deterministic: elimination ties break on declaration
order, spanning-tree ties on the smallest clique-index pair, and the root is
always clique 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .errors import StructuralError
from .messages import pass_messages
from .model import BayesianNetwork
from .potentials import Domain, OpCounters, Potential, multiply, unit


@dataclass(frozen=True)
class Clique:
    index: int
    domain: Domain
    baseline: Potential
    family_of: frozenset[str]


@dataclass(frozen=True)
class Separator:
    index: int
    domain: Domain
    baseline: Potential
    clique_a: int
    clique_b: int


@dataclass(frozen=True)
class JunctionTree:
    """A rooted clique tree plus per-node tables.

    ``neighbors[v]`` lists ``(separator index, other clique)`` pairs in
    clique-index order; ``parent_of[v]`` is ``(parent clique, separator)``
    for every non-root clique.  Before calibration the clique tables hold
    the raw CPT products; after :func:`initialize_consistent` they are the
    marginals (``calibrated`` tells which).
    """

    cliques: tuple[Clique, ...]
    separators: tuple[Separator, ...]
    root: int
    family_clique: dict[str, int]
    state_labels: dict[str, tuple[str, ...]]
    calibrated: bool
    neighbors: tuple[tuple[tuple[int, int], ...], ...]
    parent_of: tuple[tuple[int, int] | None, ...]
    children_of: tuple[tuple[tuple[int, int], ...], ...]
    preorder: tuple[int, ...]
    postorder: tuple[int, ...]

    # -- lookups ---------------------------------------------------------

    def cardinality(self, variable: str) -> int:
        try:
            return len(self.state_labels[variable])
        except KeyError:
            raise StructuralError(f"variable {variable!r} not in tree") from None

    def cliques_containing(self, variable: str) -> list[int]:
        return [c.index for c in self.cliques if variable in c.domain]

    def smallest_clique_containing(self, variable: str) -> int:
        hits = self.cliques_containing(variable)
        if not hits:
            raise StructuralError(f"variable {variable!r} not in tree")
        return min(hits, key=lambda i: (self.cliques[i].domain.size, i))

    def separator_between(self, a: int, b: int) -> Separator:
        for sep_idx, neighbour in self.neighbors[a]:
            if neighbour == b:
                return self.separators[sep_idx]
        raise StructuralError(f"cliques {a} and {b} are not adjacent")

    def with_tables(
        self,
        clique_tables: Sequence[Potential],
        separator_tables: Sequence[Potential],
        calibrated: bool,
    ) -> "JunctionTree":
        return replace(
            self,
            cliques=tuple(
                replace(c, baseline=t) for c, t in zip(self.cliques, clique_tables)
            ),
            separators=tuple(
                replace(s, baseline=t) for s, t in zip(self.separators, separator_tables)
            ),
            calibrated=calibrated,
        )

    def to_document(self) -> dict:
        return {
            "root": self.root,
            "cliques": [
                {
                    "index": c.index,
                    "variables": list(c.domain.variables),
                    "family_of": sorted(c.family_of),
                }
                for c in self.cliques
            ],
            "separators": [
                {
                    "index": s.index,
                    "variables": list(s.domain.variables),
                    "between": [s.clique_a, s.clique_b],
                }
                for s in self.separators
            ],
        }


def assemble_tree(
    clique_domains: Sequence[Domain],
    edges: Sequence[tuple[int, int]],
    clique_tables: Sequence[Potential],
    separator_tables: Sequence[Potential] | None,
    family_clique: Mapping[str, int],
    state_labels: Mapping[str, Sequence[str]],
    family_of: Sequence[Iterable[str]] | None = None,
    root: int = 0,
    calibrated: bool = False,
) -> JunctionTree:
    """Wire up a JunctionTree from explicit parts (also used by tests to
    build synthetic trees directly)."""
    n = len(clique_domains)
    separators = []
    for idx, (a, b) in enumerate(edges):
        a, b = min(a, b), max(a, b)
        shared = [v for v in clique_domains[a].variables if v in clique_domains[b]]
        domain = clique_domains[a].restrict(shared)
        baseline = (
            separator_tables[idx] if separator_tables is not None else unit(domain)
        )
        if baseline.domain.variables != domain.variables:
            raise StructuralError("separator table does not match the intersection")
        separators.append(Separator(idx, domain, baseline, a, b))

    neighbor_lists: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for s in separators:
        neighbor_lists[s.clique_a].append((s.index, s.clique_b))
        neighbor_lists[s.clique_b].append((s.index, s.clique_a))
    for lst in neighbor_lists:
        lst.sort(key=lambda pair: pair[1])

    parent: list[tuple[int, int] | None] = [None] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    preorder: list[int] = []
    stack = [root]
    seen = {root}
    while stack:
        v = stack.pop()
        preorder.append(v)
        for sep_idx, w in reversed(neighbor_lists[v]):
            if w not in seen:
                seen.add(w)
                parent[w] = (v, sep_idx)
                children[v].append((sep_idx, w))
                stack.append(w)
    for lst in children:
        lst.sort(key=lambda pair: pair[1])
    if len(preorder) != n:
        raise StructuralError("clique graph is not connected")
    if len(separators) != n - 1:
        raise StructuralError("clique graph is not a tree")

    cliques = tuple(
        Clique(
            i,
            clique_domains[i],
            clique_tables[i],
            frozenset(family_of[i]) if family_of is not None else frozenset(),
        )
        for i in range(n)
    )
    return JunctionTree(
        cliques=cliques,
        separators=tuple(separators),
        root=root,
        family_clique=dict(family_clique),
        state_labels={k: tuple(v) for k, v in state_labels.items()},
        calibrated=calibrated,
        neighbors=tuple(tuple(lst) for lst in neighbor_lists),
        parent_of=tuple(parent),
        children_of=tuple(tuple(lst) for lst in children),
        preorder=tuple(preorder),
        postorder=tuple(reversed(preorder)),
    )


# -- construction from a network --------------------------------------------


def moral_graph(net: BayesianNetwork) -> dict[str, set[str]]:
    """Undirected adjacency: child-parent links plus married co-parents."""
    adj: dict[str, set[str]] = {name: set() for name in net.names}
    for name in net.names:
        fam = net.family(name)
        for i, a in enumerate(fam):
            for b in fam[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
    return adj


def min_fill_cliques(
    adj: Mapping[str, set[str]], order_index: Mapping[str, int]
) -> list[frozenset[str]]:
    """Eliminate by minimum fill-in (ties: declaration order) and return the
    maximal elimination cliques in discovery order."""
    work = {v: set(nb) for v, nb in adj.items()}
    cliques: list[frozenset[str]] = []
    while work:
        best = None
        best_key = None
        for v, nb in work.items():
            nbs = list(nb)
            fill = sum(
                1
                for i in range(len(nbs))
                for j in range(i + 1, len(nbs))
                if nbs[j] not in work[nbs[i]]
            )
            key = (fill, order_index[v])
            if best_key is None or key < best_key:
                best, best_key = v, key
        candidate = frozenset(work[best] | {best})
        if not any(candidate <= c for c in cliques):
            cliques.append(candidate)
        for a in work[best]:
            work[a].update(work[best] - {a})
            work[a].discard(best)
        del work[best]
    return cliques


def spanning_edges(clique_sets: Sequence[frozenset[str]]) -> list[tuple[int, int]]:
    """Maximum-weight spanning tree over the clique graph, weight = number of
    shared variables; ties broken by smallest clique-index pair.  Zero-weight
    edges are allowed so disconnected networks still yield one tree."""
    n = len(clique_sets)
    candidates = sorted(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda e: (-len(clique_sets[e[0]] & clique_sets[e[1]]), e[0], e[1]),
    )
    component = list(range(n))

    def find(x: int) -> int:
        while component[x] != x:
            component[x] = component[component[x]]
            x = component[x]
        return x

    edges = []
    for i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            component[ri] = rj
            edges.append((i, j))
            if len(edges) == n - 1:
                break
    return edges


def build_junction_tree(net: BayesianNetwork) -> JunctionTree:
    """Structure, CPT assignment and raw clique products (not yet calibrated)."""
    order_index = {name: i for i, name in enumerate(net.names)}
    clique_sets = min_fill_cliques(moral_graph(net), order_index)
    domains = [
        Domain.of(
            sorted(c, key=order_index.__getitem__),
            (net.cardinality(v) for v in sorted(c, key=order_index.__getitem__)),
        )
        for c in clique_sets
    ]
    edges = spanning_edges(clique_sets)

    family_clique: dict[str, int] = {}
    assigned: list[set[str]] = [set() for _ in clique_sets]
    for name in net.names:
        fam = set(net.family(name))
        hosts = [i for i, c in enumerate(clique_sets) if fam <= c]
        if not hosts:
            raise StructuralError(f"no clique contains the family of {name!r}")
        family_clique[name] = hosts[0]
        assigned[hosts[0]].add(name)

    tables = []
    for i, domain in enumerate(domains):
        t = unit(domain)
        for name in sorted(assigned[i], key=order_index.__getitem__):
            t = multiply(t, net.cpts[name])
        tables.append(t)

    return assemble_tree(
        domains,
        edges,
        tables,
        None,
        family_clique,
        net.state_labels,
        family_of=assigned,
        root=0,
        calibrated=False,
    )


def initialize_consistent(tree: JunctionTree) -> JunctionTree:
    """Calibrate: one message pass with tables of 1's in the separators, then
    read off every clique and separator marginal."""
    scratch = OpCounters()
    raw = [c.baseline for c in tree.cliques]
    mailboxes = pass_messages(tree, raw, {}, scratch)
    clique_tables = []
    for v, base in enumerate(raw):
        t = base
        for sep_idx, neighbour in tree.neighbors[v]:
            # separator baselines are 1's here, so the incoming ratio is the
            # raw message
            t = multiply(t, mailboxes[(neighbour, v)], scratch)
        clique_tables.append(t)
    separator_tables = [
        multiply(
            mailboxes[(s.clique_a, s.clique_b)],
            mailboxes[(s.clique_b, s.clique_a)],
            scratch,
        )
        for s in tree.separators
    ]
    return tree.with_tables(clique_tables, separator_tables, calibrated=True)


def compile_network(net: BayesianNetwork) -> JunctionTree:
    """Build and calibrate in one step."""
    return initialize_consistent(build_junction_tree(net))
