"""Discrete Bayesian networks, findings and hypotheses, plus their JSON form.

The model document is a single JSON object::

    {
      "variables": [{"name": "A", "states": ["t", "f"]}, ...],
      "cpds": [{"variable": "B", "parents": ["A"], "values": [...]}, ...]
    }

``values`` is the flat row-major table over ``[variable] + parents`` with the
child variable listed first (slowest).  An evidence document is a JSON list
of findings; soft findings carry a ``likelihood`` array over the variable's
states, hard findings may be written as ``{"id": ..., "variable": ...,
"state": ...}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ModelError
from .potentials import Domain, Potential, marginalize, multiply

CPT_NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ModelError("variable name must be non-empty")
        if len(self.states) < 1:
            raise ModelError(f"variable {self.name!r} needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ModelError(f"variable {self.name!r} has duplicate state labels")

    @property
    def cardinality(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Finding:
    """Evidence on one variable: a non-negative likelihood per state.

    A hard finding is the special case of an indicator vector.  Ids are
    caller-supplied and identify the finding in subset queries; two findings
    on the same variable stay distinguishable through their ids.
    """

    id: str
    variable: str
    likelihood: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.id:
            raise ModelError("finding id must be non-empty")
        arr = np.asarray(self.likelihood, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ModelError(f"finding {self.id!r}: likelihood must be a non-empty vector")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise ModelError(f"finding {self.id!r}: likelihoods must be finite and >= 0")
        if not np.any(arr > 0.0):
            raise ModelError(f"finding {self.id!r}: at least one likelihood must be positive")
        object.__setattr__(self, "likelihood", tuple(float(x) for x in arr))

    def table(self) -> Potential:
        return Potential(
            Domain.of((self.variable,), (len(self.likelihood),)), self.likelihood
        )

    @property
    def is_hard(self) -> bool:
        return sorted(self.likelihood) == [0.0] * (len(self.likelihood) - 1) + [1.0]


def indicator(states: Sequence[str], state: str) -> tuple[float, ...]:
    if state not in states:
        raise ModelError(f"unknown state {state!r}; expected one of {list(states)}")
    return tuple(1.0 if s == state else 0.0 for s in states)


def hard_finding(fid: str, variable: str, states: Sequence[str], state: str) -> Finding:
    return Finding(fid, variable, indicator(states, state))


@dataclass(frozen=True)
class Hypothesis:
    """A configuration of states for some set of distinct variables."""

    assignments: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        names = [v for v, _ in self.assignments]
        if len(set(names)) != len(names):
            raise ModelError("hypothesis assigns a variable twice")

    @staticmethod
    def of(assignments: Mapping[str, str] | Iterable[tuple[str, str]]) -> "Hypothesis":
        items = assignments.items() if isinstance(assignments, Mapping) else assignments
        return Hypothesis(tuple((str(v), str(s)) for v, s in items))

    @staticmethod
    def parse(spec: str) -> "Hypothesis":
        """Parse ``"VAR=state[,VAR=state...]"``."""
        pairs = []
        for chunk in spec.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" not in chunk:
                raise ModelError(f"bad hypothesis term {chunk!r}; expected VAR=state")
            var, state = chunk.split("=", 1)
            pairs.append((var.strip(), state.strip()))
        if not pairs:
            raise ModelError("empty hypothesis")
        return Hypothesis(tuple(pairs))

    def findings(self, state_labels: Mapping[str, Sequence[str]]) -> list[Finding]:
        """Hard indicator findings realising this hypothesis."""
        out = []
        for var, state in self.assignments:
            if var not in state_labels:
                raise ModelError(f"hypothesis variable {var!r} is not declared")
            out.append(hard_finding(f"__h_{var}", var, state_labels[var], state))
        return out

    def as_dict(self) -> dict[str, str]:
        return dict(self.assignments)


class BayesianNetwork:
    """A validated discrete Bayesian network.

    Construction checks acyclicity, parent references and CPT normalization,
    so every instance satisfies the model invariants.
    """

    def __init__(
        self,
        variables: Sequence[Variable],
        parents: Mapping[str, Sequence[str]],
        cpt_values: Mapping[str, Sequence[float]],
    ) -> None:
        self.variables = tuple(variables)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ModelError("duplicate variable declaration")
        self._by_name = {v.name: v for v in self.variables}

        self.parents: dict[str, tuple[str, ...]] = {}
        for v in self.variables:
            ps = tuple(parents.get(v.name, ()))
            for p in ps:
                if p not in self._by_name:
                    raise ModelError(f"variable {v.name!r} lists unknown parent {p!r}")
            if len(set(ps)) != len(ps):
                raise ModelError(f"variable {v.name!r} lists a parent twice")
            if v.name in ps:
                raise ModelError(f"variable {v.name!r} cannot be its own parent")
            self.parents[v.name] = ps
        self._check_acyclic()

        self.cpts: dict[str, Potential] = {}
        for v in self.variables:
            if v.name not in cpt_values:
                raise ModelError(f"missing CPT for variable {v.name!r}")
            domain = self.family_domain(v.name)
            try:
                cpt = Potential(domain, cpt_values[v.name])
            except Exception as exc:
                raise ModelError(f"CPT for {v.name!r}: {exc}") from exc
            columns = cpt.array.reshape(v.cardinality, -1).sum(axis=0)
            if np.any(np.abs(columns - 1.0) > CPT_NORMALIZATION_TOL):
                raise ModelError(
                    f"CPT for {v.name!r}: each column over the child states must "
                    f"sum to 1 (max deviation {float(np.abs(columns - 1.0).max()):.3g})"
                )
            self.cpts[v.name] = cpt
        extra = set(cpt_values) - set(self._by_name)
        if extra:
            raise ModelError(f"CPT given for undeclared variable(s) {sorted(extra)}")

    def _check_acyclic(self) -> None:
        remaining = {v.name: set(self.parents[v.name]) for v in self.variables}
        while remaining:
            roots = [n for n, ps in remaining.items() if not ps]
            if not roots:
                raise ModelError(
                    f"cycle detected among variables {sorted(remaining)}"
                )
            for n in roots:
                del remaining[n]
            for ps in remaining.values():
                ps.difference_update(roots)

    # -- lookups ---------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def family(self, name: str) -> tuple[str, ...]:
        return (name,) + self.parents[name]

    def family_domain(self, name: str) -> Domain:
        fam = self.family(name)
        return Domain.of(fam, (self.cardinality(v) for v in fam))

    @property
    def state_labels(self) -> dict[str, tuple[str, ...]]:
        return {v.name: v.states for v in self.variables}

    def joint_is_normalized(self, tol: float = 1e-9) -> bool:
        p = None
        for v in self.variables:
            p = self.cpts[v.name] if p is None else multiply(p, self.cpts[v.name])
        total = 1.0 if p is None else marginalize(p, ()).scalar()
        return abs(total - 1.0) <= tol


# -- documents -------------------------------------------------------------


def network_from_document(doc) -> BayesianNetwork:
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    for key in ("variables", "cpds"):
        if key not in doc:
            raise ModelError(f"model document lacks the {key!r} list")
    variables = []
    for entry in doc["variables"]:
        if not isinstance(entry, dict) or "name" not in entry or "states" not in entry:
            raise ModelError(f"bad variable entry {entry!r}")
        variables.append(Variable(str(entry["name"]), tuple(map(str, entry["states"]))))
    parents: dict[str, Sequence[str]] = {}
    values: dict[str, Sequence[float]] = {}
    for entry in doc["cpds"]:
        if not isinstance(entry, dict) or "variable" not in entry or "values" not in entry:
            raise ModelError(f"bad cpd entry {entry!r}")
        name = str(entry["variable"])
        if name in values:
            raise ModelError(f"two CPTs given for variable {name!r}")
        parents[name] = tuple(map(str, entry.get("parents", ())))
        values[name] = entry["values"]
    return BayesianNetwork(variables, parents, values)


def parse_network(text: str) -> BayesianNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from exc
    return network_from_document(doc)


def network_to_document(net: BayesianNetwork) -> dict:
    return {
        "variables": [
            {"name": v.name, "states": list(v.states)} for v in net.variables
        ],
        "cpds": [
            {
                "variable": v.name,
                "parents": list(net.parents[v.name]),
                "values": net.cpts[v.name].values.tolist(),
            }
            for v in net.variables
        ],
    }


def serialize_network(net: BayesianNetwork) -> str:
    return json.dumps(network_to_document(net), indent=2)


def finding_from_document(entry, state_labels: Mapping[str, Sequence[str]]) -> Finding:
    if not isinstance(entry, dict) or "id" not in entry or "variable" not in entry:
        raise ModelError(f"bad finding entry {entry!r}")
    fid = str(entry["id"])
    var = str(entry["variable"])
    if var not in state_labels:
        raise ModelError(f"finding {fid!r} references unknown variable {var!r}")
    states = state_labels[var]
    if "state" in entry:
        return hard_finding(fid, var, states, str(entry["state"]))
    if "likelihood" in entry:
        like = entry["likelihood"]
        if len(like) != len(states):
            raise ModelError(
                f"finding {fid!r}: likelihood has {len(like)} entries, "
                f"variable {var!r} has {len(states)} states"
            )
        return Finding(fid, var, tuple(float(x) for x in like))
    raise ModelError(f"finding {fid!r} needs either a state or a likelihood")


def findings_from_document(doc, state_labels: Mapping[str, Sequence[str]]) -> list[Finding]:
    if not isinstance(doc, list):
        raise ModelError("evidence document must be a JSON list")
    out = []
    seen = set()
    for entry in doc:
        f = finding_from_document(entry, state_labels)
        if f.id in seen:
            raise ModelError(f"duplicate finding id {f.id!r} in evidence document")
        seen.add(f.id)
        out.append(f)
    return out


def parse_findings(text: str, state_labels: Mapping[str, Sequence[str]]) -> list[Finding]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from exc
    return findings_from_document(doc, state_labels)
