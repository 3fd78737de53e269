"""Dense probability tables over ordered sets of discrete variables.

Values are stored flat in row-major order: the first variable of the domain
varies slowest, the last varies fastest.  For a domain ``(X, Y)`` with two
states each the cells are laid out as::

    index 0: X=0, Y=0
    index 1: X=0, Y=1
    index 2: X=1, Y=0
    index 3: X=1, Y=1

Tables with different variable orders are aligned by coordinate mapping at
operation time; stored data is never reordered in place.  The three table
operations every propagation phase is built from — :func:`multiply`,
:func:`divide` and :func:`marginalize` — optionally tally into an
:class:`OpCounters`, so that the cost of a propagation is attributable to
the engine that ran it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InconsistencyError, StructuralError


@dataclass(frozen=True)
class Domain:
    """An ordered list of variable names with their state counts."""

    variables: tuple[str, ...]
    cardinalities: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.variables) != len(self.cardinalities):
            raise StructuralError("variables and cardinalities differ in length")
        if len(set(self.variables)) != len(self.variables):
            raise StructuralError(f"duplicate variable in domain {self.variables!r}")
        if any(c < 1 for c in self.cardinalities):
            raise StructuralError("every cardinality must be at least 1")

    @staticmethod
    def of(variables: Iterable[str], cardinalities: Iterable[int]) -> "Domain":
        return Domain(tuple(variables), tuple(int(c) for c in cardinalities))

    @property
    def size(self) -> int:
        n = 1
        for c in self.cardinalities:
            n *= c
        return n

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cardinalities

    def __contains__(self, variable: object) -> bool:
        return variable in self.variables

    def __len__(self) -> int:
        return len(self.variables)

    def cardinality(self, variable: str) -> int:
        try:
            return self.cardinalities[self.variables.index(variable)]
        except ValueError:
            raise StructuralError(f"variable {variable!r} not in domain") from None

    def restrict(self, variables: Iterable[str]) -> "Domain":
        """Subdomain over ``variables``, kept in the order given."""
        names = tuple(variables)
        return Domain(names, tuple(self.cardinality(v) for v in names))

    def is_subdomain_of(self, other: "Domain") -> bool:
        return all(
            v in other and other.cardinality(v) == c
            for v, c in zip(self.variables, self.cardinalities)
        )


EMPTY_DOMAIN = Domain((), ())


class Potential:
    """An immutable table of non-negative, finite reals over a :class:`Domain`.

    The empty domain is legal; such a potential is a scalar with one cell.
    """

    __slots__ = ("domain", "values")

    def __init__(self, domain: Domain, values) -> None:
        arr = np.array(values, dtype=np.float64).reshape(-1)
        if arr.size != domain.size:
            raise StructuralError(
                f"table for domain {domain.variables!r} needs {domain.size} cells, "
                f"got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise StructuralError("potential entries must be finite")
        if np.any(arr < 0.0):
            raise StructuralError("potential entries must be non-negative")
        arr.setflags(write=False)
        self.domain = domain
        self.values = arr

    @property
    def array(self) -> np.ndarray:
        """The values reshaped to the domain's shape (read-only view)."""
        return self.values.reshape(self.domain.shape)

    def total(self) -> float:
        return float(self.values.sum())

    def scalar(self) -> float:
        if self.domain.variables:
            raise StructuralError("scalar() is only defined on the empty domain")
        return float(self.values[0])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Potential({list(self.domain.variables)}, {self.values.tolist()})"


@dataclass
class OpCounters:
    """Tallies of the table operations performed by one engine instance.

    Multiplying n tables together (a chain of binary multiplies) increments
    ``multiplications`` by n - 1.
    """

    multiplications: int = 0
    divisions: int = 0
    marginalizations: int = 0
    messages_sent: int = 0

    def reset(self) -> None:
        self.multiplications = 0
        self.divisions = 0
        self.marginalizations = 0
        self.messages_sent = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "multiplications": self.multiplications,
            "divisions": self.divisions,
            "marginalizations": self.marginalizations,
            "messages_sent": self.messages_sent,
        }


def unit(domain: Domain) -> Potential:
    """The table of 1's over ``domain`` — the identity element of multiply."""
    return Potential(domain, np.ones(domain.size))


def scalar(value: float) -> Potential:
    """A one-cell potential over the empty domain."""
    return Potential(EMPTY_DOMAIN, [value])


def _view_in(p: Potential, target: Domain) -> np.ndarray:
    """``p``'s array transposed and reshaped so it broadcasts over ``target``.

    Every variable of ``p`` must appear in ``target``.
    """
    positions = [target.variables.index(v) for v in p.domain.variables]
    order = sorted(range(len(positions)), key=positions.__getitem__)
    arr = p.array.transpose(order)
    shape = tuple(
        c if v in p.domain else 1
        for v, c in zip(target.variables, target.cardinalities)
    )
    return arr.reshape(shape)


def multiply(a: Potential, b: Potential, counters: OpCounters | None = None) -> Potential:
    """Pointwise product; the result ranges over the union of both domains.

    The result's variables are a's in order followed by b's new ones in
    order, which keeps golden tests deterministic.
    """
    for v in b.domain.variables:
        if v in a.domain and a.domain.cardinality(v) != b.domain.cardinality(v):
            raise StructuralError(
                f"variable {v!r} has cardinality {a.domain.cardinality(v)} in one "
                f"factor and {b.domain.cardinality(v)} in the other"
            )
    new_vars = tuple(v for v in b.domain.variables if v not in a.domain)
    out_domain = Domain(
        a.domain.variables + new_vars,
        a.domain.cardinalities + tuple(b.domain.cardinality(v) for v in new_vars),
    )
    out = _view_in(a, out_domain) * _view_in(b, out_domain)
    if counters is not None:
        counters.multiplications += 1
    return Potential(out_domain, out.reshape(-1))


def divide(a: Potential, b: Potential, counters: OpCounters | None = None) -> Potential:
    """Cellwise quotient a / b with the convention 0/0 := 0.

    b's domain must be a subdomain of a's; cells are aligned on the shared
    coordinates.  A positive numerator over a zero denominator cannot arise
    between tables produced by a correct propagation and raises
    :class:`InconsistencyError`.
    """
    if not b.domain.is_subdomain_of(a.domain):
        raise StructuralError("denominator domain must lie inside numerator domain")
    num = a.array
    den = np.broadcast_to(_view_in(b, a.domain), a.domain.shape)
    zero = den == 0.0
    if np.any(zero & (num != 0.0)):
        raise InconsistencyError("positive mass divided by zero")
    out = np.zeros(a.domain.shape)
    np.divide(num, den, out=out, where=~zero)
    if counters is not None:
        counters.divisions += 1
    return Potential(a.domain, out.reshape(-1))


def marginalize(
    p: Potential,
    target: Domain | Sequence[str],
    counters: OpCounters | None = None,
) -> Potential:
    """Sum ``p`` over every variable not in ``target``.

    ``target`` may be a Domain or a sequence of variable names; either way
    all target variables must occur in ``p`` (with equal cardinalities).
    The result follows the target's variable order.
    """
    if isinstance(target, Domain):
        if not target.is_subdomain_of(p.domain):
            raise StructuralError("marginalization target is not a subdomain")
    else:
        target = p.domain.restrict(target)
    drop = tuple(i for i, v in enumerate(p.domain.variables) if v not in target)
    arr = p.array.sum(axis=drop) if drop else p.array
    kept = [v for v in p.domain.variables if v in target]
    arr = arr.transpose(tuple(kept.index(v) for v in target.variables))
    if counters is not None:
        counters.marginalizations += 1
    return Potential(target, arr.reshape(-1))
