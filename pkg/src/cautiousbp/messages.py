"""The non-destructive message-passing kernel.

One kernel, two uses: initial calibration runs it with tables of 1's in the
separators, and the cautious engine runs it with the calibrated baselines.
The kernel never mutates the tables it is given; all state lives in the
returned mailboxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .potentials import OpCounters, Potential, divide, marginalize, multiply


@dataclass
class PropagationStats:
    """Breakdown of the multiplications of one propagation.

    ``message_product_multiplications`` counts only the incoming-message
    ratios multiplied onto a clique table while forming outgoing messages;
    ``finding_multiplications`` counts findings multiplied onto auxiliary
    scratch tables.
    """

    message_product_multiplications: int = 0
    finding_multiplications: int = 0


def send_product(
    tree,
    mailboxes: Mapping[tuple[int, int], Potential],
    source: int,
    clique_table: Potential,
    finding_tables: Sequence[Potential],
    exclude_separator: int | None,
    counters: OpCounters | None,
    stats: PropagationStats | None = None,
) -> Potential:
    """The local product at ``source``: its table, its findings, and the
    incoming ratio from every neighbour except the one behind
    ``exclude_separator`` (pass None to include all neighbours)."""
    product = clique_table
    for table in finding_tables:
        product = multiply(product, table, counters)
        if stats is not None:
            stats.finding_multiplications += 1
    for sep_idx, neighbour in tree.neighbors[source]:
        if sep_idx == exclude_separator:
            continue
        incoming = mailboxes[(neighbour, source)]
        ratio = divide(incoming, tree.separators[sep_idx].baseline, counters)
        product = multiply(product, ratio, counters)
        if stats is not None:
            stats.message_product_multiplications += 1
    return product


def pass_messages(
    tree,
    clique_tables: Sequence[Potential],
    finding_tables: Mapping[int, Sequence[Potential]],
    counters: OpCounters | None = None,
    stats: PropagationStats | None = None,
) -> dict[tuple[int, int], Potential]:
    """Full two-phase schedule: collect toward the root, then distribute.

    Returns one message per directed link, keyed ``(sender, receiver)``.
    The message over separator S from W's side equals the marginal to S of
    W's local product, i.e. the joint of S with the evidence behind W.
    """
    mailboxes: dict[tuple[int, int], Potential] = {}

    def send(source: int, target: int, sep_idx: int) -> None:
        product = send_product(
            tree,
            mailboxes,
            source,
            clique_tables[source],
            finding_tables.get(source, ()),
            sep_idx,
            counters,
            stats,
        )
        message = marginalize(product, tree.separators[sep_idx].domain, counters)
        mailboxes[(source, target)] = message
        if counters is not None:
            counters.messages_sent += 1

    for v in tree.postorder:
        if v != tree.root:
            parent, sep_idx = tree.parent_of[v]
            send(v, parent, sep_idx)
    for v in tree.preorder:
        for sep_idx, child in tree.children_of[v]:
            send(v, child, sep_idx)
    return mailboxes
