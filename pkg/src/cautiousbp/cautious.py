"""Non-destructive propagation with per-link messages and stored findings.

The tree's calibrated tables are never modified.  Evidence is kept as one
stored message per finding, attached to the family clique of its variable;
propagation fills one mailbox per directed link with the message
``T = P(S, evidence behind the sender)``.  Ratios ``T / P(S)`` are formed on
demand (0/0 := 0), never stored, so the extra space is exactly two tables
per separator plus the finding messages.

Everything that makes this engine worth its overhead is read straight off
that state: probabilities of accessible evidence subsets, separator splits,
marginals, a conditioned tree (reinitialization), and what-if swaps — none
of which send a single message.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateFindingError,
    ImpossibleEvidenceError,
    NotAccessibleError,
    StructuralError,
    UnknownFindingError,
    UnknownVariableError,
)
from .jointree import JunctionTree
from .messages import PropagationStats, pass_messages
from .model import Finding
from .potentials import (
    EMPTY_DOMAIN,
    OpCounters,
    Potential,
    divide,
    marginalize,
    multiply,
)


@dataclass(frozen=True)
class FindingMessage:
    finding: Finding
    clique: int
    table: Potential


@dataclass(frozen=True)
class AccessibleSubset:
    """One member of the accessible family with the recipe that evaluates it:
    the clique to stand in, the incoming separators to select and the local
    finding ids to select."""

    ids: frozenset[str]
    clique: int
    separators: tuple[int, ...]
    finding_ids: tuple[str, ...]


class CautiousState:
    """Finding messages plus mailboxes over one immutable calibrated tree."""

    def __init__(self, tree: JunctionTree, findings: Iterable[Finding] = ()):
        if not tree.calibrated:
            raise StructuralError("CautiousState needs a calibrated junction tree")
        self.tree = tree
        self.counters = OpCounters()
        self.findings: dict[str, FindingMessage] = {}
        self.mailboxes: dict[tuple[int, int], Potential] = {}
        self.evidence_mass: float | None = None
        self.propagated = False
        self.last_propagation: PropagationStats | None = None
        self._family: dict[frozenset[str], AccessibleSubset] | None = None
        for f in findings:
            self.enter_finding(f)

    # -- evidence ----------------------------------------------------------

    def enter_finding(self, finding: Finding) -> None:
        """Store the finding as a message at its variable's family clique.
        No table in the tree changes."""
        if finding.id in self.findings:
            raise DuplicateFindingError(f"finding id {finding.id!r} already entered")
        clique = self.tree.family_clique.get(finding.variable)
        if clique is None:
            raise UnknownVariableError(f"unknown variable {finding.variable!r}")
        if len(finding.likelihood) != self.tree.cardinality(finding.variable):
            raise StructuralError(
                f"finding {finding.id!r} has {len(finding.likelihood)} likelihoods, "
                f"variable {finding.variable!r} has "
                f"{self.tree.cardinality(finding.variable)} states"
            )
        self.findings[finding.id] = FindingMessage(finding, clique, finding.table())
        self._invalidate()

    def _invalidate(self) -> None:
        self.mailboxes = {}
        self.evidence_mass = None
        self.propagated = False
        self._family = None

    @property
    def finding_ids(self) -> frozenset[str]:
        return frozenset(self.findings)

    def _findings_by_clique(self) -> dict[int, list[Potential]]:
        by_clique: dict[int, list[Potential]] = {}
        for msg in self.findings.values():
            by_clique.setdefault(msg.clique, []).append(msg.table)
        return by_clique

    def _local_finding_ids(self, clique: int) -> list[str]:
        return [fid for fid, msg in self.findings.items() if msg.clique == clique]

    # -- propagation -------------------------------------------------------

    def propagate(self) -> float:
        """Collect toward the root, distribute back, return P(e).

        Empty evidence is legal: every stored ratio is then a table of 1's
        and the returned mass is 1.
        """
        self._invalidate()
        stats = PropagationStats()
        self.mailboxes = pass_messages(
            self.tree,
            [c.baseline for c in self.tree.cliques],
            self._findings_by_clique(),
            self.counters,
            stats,
        )
        self.last_propagation = stats
        self.propagated = True
        root_joint = self.clique_local_joint(self.tree.root)
        self.evidence_mass = marginalize(root_joint, EMPTY_DOMAIN, self.counters).scalar()
        return self.evidence_mass

    def _require_propagated(self) -> None:
        if not self.propagated:
            raise StructuralError("state has not been propagated")

    def message(self, sender: int, receiver: int) -> Potential:
        """The stored table for one directed link."""
        self._require_propagated()
        try:
            return self.mailboxes[(sender, receiver)]
        except KeyError:
            raise StructuralError(f"no link from clique {sender} to {receiver}") from None

    # -- local products ------------------------------------------------------

    def clique_local_joint(
        self,
        clique: int,
        separators: Sequence[int] | None = None,
        finding_ids: Sequence[str] | None = None,
    ) -> Potential:
        """The product of the clique's baseline, the selected incoming message
        ratios and the selected local finding tables: the joint of the clique
        with the union of the selected evidence.  Sends nothing.

        ``None`` selects everything adjacent/attached; pass explicit
        (possibly empty) sequences to narrow the selection.
        """
        self._require_propagated()
        if not 0 <= clique < len(self.tree.cliques):
            raise StructuralError(f"no clique {clique}")
        adjacent = {sep_idx: nb for sep_idx, nb in self.tree.neighbors[clique]}
        if separators is None:
            separators = sorted(adjacent)
        if finding_ids is None:
            finding_ids = self._local_finding_ids(clique)
        product = self.tree.cliques[clique].baseline
        for fid in finding_ids:
            msg = self.findings.get(fid)
            if msg is None:
                raise UnknownFindingError(f"unknown finding id {fid!r}")
            if msg.clique != clique:
                raise StructuralError(
                    f"finding {fid!r} is attached to clique {msg.clique}, not {clique}"
                )
            product = multiply(product, msg.table, self.counters)
        for sep_idx in separators:
            if sep_idx not in adjacent:
                raise StructuralError(
                    f"separator {sep_idx} is not adjacent to clique {clique}"
                )
            ratio = divide(
                self.mailboxes[(adjacent[sep_idx], clique)],
                self.tree.separators[sep_idx].baseline,
                self.counters,
            )
            product = multiply(product, ratio, self.counters)
        return product

    # -- evidence geometry ---------------------------------------------------

    def evidence_behind(self, sender: int, receiver: int) -> frozenset[str]:
        """Ids of the findings in the subtree on the sender's side of the
        link (what the stored message for that direction covers)."""
        below: dict[int, set[str]] = {}
        for v in self.tree.postorder:
            ids = set(self._local_finding_ids(v))
            for _, child in self.tree.children_of[v]:
                ids |= below[child]
            below[v] = ids
        if self.tree.parent_of[receiver] is not None and self.tree.parent_of[receiver][0] == sender:
            return frozenset(self.finding_ids - below[receiver])
        if self.tree.parent_of[sender] is not None and self.tree.parent_of[sender][0] == receiver:
            return frozenset(below[sender])
        raise StructuralError(f"cliques {sender} and {receiver} are not adjacent")

    def separator_split(self, sep_idx: int) -> dict:
        """The partition of the evidence induced by one separator, and the
        probability of each side read from the stored messages."""
        self._require_propagated()
        if not 0 <= sep_idx < len(self.tree.separators):
            raise StructuralError(f"no separator {sep_idx}")
        sep = self.tree.separators[sep_idx]
        # orient: left is the root side
        if self.tree.parent_of[sep.clique_b] == (sep.clique_a, sep_idx):
            left_clique, right_clique = sep.clique_a, sep.clique_b
        else:
            left_clique, right_clique = sep.clique_b, sep.clique_a
        e_right = self.evidence_behind(right_clique, left_clique)
        e_left = frozenset(self.finding_ids - e_right)
        return {
            "separator": sep_idx,
            "e_left": e_left,
            "e_right": e_right,
            "p_left": self.mailboxes[(left_clique, right_clique)].total(),
            "p_right": self.mailboxes[(right_clique, left_clique)].total(),
        }

    # -- accessible subsets ----------------------------------------------------

    def accessible_subsets(self) -> list[AccessibleSubset]:
        """Every evidence subset whose probability is a local product at some
        clique: for each clique, all unions of the evidence blocks behind its
        separators and its own finding messages.

        Each subset carries a recipe; among cliques producing the same
        subset the one with the smallest table wins.
        """
        self._require_propagated()
        return sorted(
            self._family_map().values(),
            key=lambda s: (len(s.ids), sorted(s.ids)),
        )

    def _family_map(self) -> dict[frozenset[str], AccessibleSubset]:
        if self._family is not None:
            return self._family
        family: dict[frozenset[str], AccessibleSubset] = {}
        rank: dict[frozenset[str], tuple[int, int, int]] = {}
        for clique in range(len(self.tree.cliques)):
            blocks: list[tuple[frozenset[str], int | None, str | None]] = []
            for sep_idx, neighbour in self.tree.neighbors[clique]:
                ids = self.evidence_behind(neighbour, clique)
                if ids:
                    blocks.append((ids, sep_idx, None))
            for fid in self._local_finding_ids(clique):
                blocks.append((frozenset([fid]), None, fid))
            size = self.tree.cliques[clique].domain.size
            for mask in range(1 << len(blocks)):
                ids: frozenset[str] = frozenset()
                seps: list[int] = []
                fids: list[str] = []
                for bit, (block_ids, sep_idx, fid) in enumerate(blocks):
                    if mask >> bit & 1:
                        ids |= block_ids
                        if sep_idx is not None:
                            seps.append(sep_idx)
                        else:
                            fids.append(fid)
                key = (size, clique, mask)
                if ids not in rank or key < rank[ids]:
                    rank[ids] = key
                    family[ids] = AccessibleSubset(
                        ids, clique, tuple(seps), tuple(fids)
                    )
        self._family = family
        return family

    def subset_probability(self, ids: Iterable[str]) -> float:
        """Exact P(e') for an accessible subset, via its recipe."""
        self._require_propagated()
        wanted = frozenset(ids)
        unknown = wanted - self.finding_ids
        if unknown:
            raise UnknownFindingError(f"unknown finding id(s) {sorted(unknown)}")
        recipe = self._family_map().get(wanted)
        if recipe is None:
            raise NotAccessibleError(
                f"subset {sorted(wanted)} is not in the accessible family"
            )
        product = self.clique_local_joint(
            recipe.clique, recipe.separators, recipe.finding_ids
        )
        return marginalize(product, EMPTY_DOMAIN, self.counters).scalar()

    # -- readouts ---------------------------------------------------------------

    def _require_mass(self) -> float:
        self._require_propagated()
        if not self.evidence_mass:
            raise ImpossibleEvidenceError("evidence has zero probability")
        return self.evidence_mass

    def marginal(self, variable: str) -> np.ndarray:
        """Normalized P(variable | e) from the smallest clique containing it."""
        self._require_mass()
        clique = self.tree.smallest_clique_containing(variable)
        joint = self.clique_local_joint(clique)
        vec = marginalize(joint, (variable,), self.counters).values
        return vec / vec.sum()

    def what_if(self, finding_id: str, replacement: Finding) -> float:
        """P(e with ``finding_id`` swapped for ``replacement``), computed as a
        purely local product — no messages are sent."""
        self._require_propagated()
        current = self.findings.get(finding_id)
        if current is None:
            raise UnknownFindingError(f"unknown finding id {finding_id!r}")
        if replacement.variable != current.finding.variable:
            raise StructuralError(
                f"replacement is on {replacement.variable!r}, finding "
                f"{finding_id!r} is on {current.finding.variable!r}"
            )
        if len(replacement.likelihood) != len(current.finding.likelihood):
            raise StructuralError("replacement likelihood has the wrong length")
        clique = current.clique
        others = [f for f in self._local_finding_ids(clique) if f != finding_id]
        product = self.clique_local_joint(clique, None, others)
        product = multiply(product, replacement.table(), self.counters)
        return marginalize(product, EMPTY_DOMAIN, self.counters).scalar()

    def reinitialize(self) -> JunctionTree:
        """A new calibrated tree conditioned on the entered evidence, built
        from the stored tables alone: clique tables are the full local
        products, separator tables the product of both directed messages
        over the prior, all normalized by P(e)."""
        p_e = self._require_mass()
        clique_tables = []
        for v in range(len(self.tree.cliques)):
            joint = self.clique_local_joint(v)
            clique_tables.append(Potential(joint.domain, joint.values / p_e))
        separator_tables = []
        for s in self.tree.separators:
            both = multiply(
                self.mailboxes[(s.clique_a, s.clique_b)],
                self.mailboxes[(s.clique_b, s.clique_a)],
                self.counters,
            )
            joint = divide(both, s.baseline, self.counters)
            separator_tables.append(Potential(joint.domain, joint.values / p_e))
        return self.tree.with_tables(clique_tables, separator_tables, calibrated=True)

    # -- instrumentation -----------------------------------------------------------

    def stored_tables(self) -> dict[str, int]:
        """How many extra tables this state keeps beyond the tree's own."""
        return {
            "separator_messages": len(self.mailboxes),
            "finding_messages": len(self.findings),
        }
