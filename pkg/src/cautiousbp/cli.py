"""Command-line front door.

One command per capability: ``compile``, ``query``, ``subsets``,
``conflict``, ``sensitivity``, ``whatif`` and ``serve``.  Output is JSON on
stdout (``--table`` renders aligned text); diagnostics go to stderr.  Exit
codes: 0 success, 2 usage, 3 model error, 4 impossible evidence/hypothesis
or other analysis failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis
from .cautious import CautiousState
from .errors import (
    CapacityError,
    CautiousBPError,
    ImpossibleEvidenceError,
    ImpossibleHypothesisError,
    ModelError,
    NotAccessibleError,
    PartitionError,
    UndefinedPosteriorError,
    UnknownFindingError,
    UnknownVariableError,
)
from .hugin import condition_on_hypothesis
from .jointree import compile_network
from .model import Finding, Hypothesis, hard_finding, parse_findings, parse_network

MODEL_DIR_ENV = "CAUTIOUSBP_MODEL_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_IMPOSSIBLE = 4

_MODEL_ERRORS = (ModelError, CapacityError, FileNotFoundError, IsADirectoryError)
_ANALYSIS_ERRORS = (
    ImpossibleEvidenceError,
    ImpossibleHypothesisError,
    NotAccessibleError,
    PartitionError,
    UndefinedPosteriorError,
    UnknownFindingError,
    UnknownVariableError,
)


def _resolve_model_path(spec: str) -> Path:
    path = Path(spec)
    if path.exists():
        return path
    base = os.environ.get(MODEL_DIR_ENV)
    if base:
        for candidate in (Path(base) / spec, Path(base) / f"{spec}.json"):
            if candidate.exists():
                return candidate
    raise ModelError(f"model {spec!r} not found (checked {MODEL_DIR_ENV} too)")


def _load_network(spec: str):
    return parse_network(_resolve_model_path(spec).read_text(encoding="utf-8"))


def _load_findings(path: str | None, net) -> list[Finding]:
    if path is None:
        return []
    return parse_findings(Path(path).read_text(encoding="utf-8"), net.state_labels)


def _parse_thresholds(spec: str | None) -> analysis.SensitivityThresholds:
    if spec is None:
        return analysis.SensitivityThresholds()
    parts = spec.split(",")
    if len(parts) != 3:
        raise ValueError("--thresholds needs three comma-separated values")
    return analysis.SensitivityThresholds(*(float(p) for p in parts))


def _propagated_state(tree, findings) -> CautiousState:
    state = CautiousState(tree, findings)
    state.propagate()
    return state


def _conditioned_pair(tree, hypothesis, findings):
    conditioned_tree, p_h = condition_on_hypothesis(tree, hypothesis)
    clean = _propagated_state(tree, findings)
    conditioned = _propagated_state(conditioned_tree, findings)
    return clean, conditioned, p_h


# -- commands ----------------------------------------------------------------


def _cmd_compile(args) -> dict:
    net = _load_network(args.model)
    tree = compile_network(net)
    return tree.to_document()


def _cmd_query(args) -> dict:
    net = _load_network(args.model)
    tree = compile_network(net)
    state = _propagated_state(tree, _load_findings(args.evidence, net))
    names = [args.marginal] if args.marginal else list(net.names)
    out = {"p_e": state.evidence_mass, "marginals": {}}
    for name in names:
        out["marginals"][name] = {
            "states": list(net.variable(name).states),
            "probabilities": state.marginal(name).tolist(),
        }
    return out


def _cmd_subsets(args) -> dict:
    net = _load_network(args.model)
    tree = compile_network(net)
    state = _propagated_state(tree, _load_findings(args.evidence, net))
    return {
        "p_e": state.evidence_mass,
        "subsets": [
            {
                "findings": sorted(s.ids),
                "probability": state.subset_probability(s.ids),
            }
            for s in state.accessible_subsets()
        ],
    }


def _cmd_conflict(args) -> dict:
    net = _load_network(args.model)
    tree = compile_network(net)
    state = _propagated_state(tree, _load_findings(args.evidence, net))
    return analysis.conflict(state).to_document()


def _cmd_sensitivity(args) -> dict:
    net = _load_network(args.model)
    tree = compile_network(net)
    hypothesis = Hypothesis.parse(args.hypothesis)
    clean, conditioned, p_h = _conditioned_pair(
        tree, hypothesis, _load_findings(args.evidence, net)
    )
    report = analysis.classify_sensitivity(
        clean, conditioned, hypothesis, p_h, _parse_thresholds(args.thresholds)
    )
    return report.to_document()


def _cmd_whatif(args) -> dict:
    net = _load_network(args.model)
    tree = compile_network(net)
    findings = _load_findings(args.evidence, net)
    by_id = {f.id: f for f in findings}
    if args.finding not in by_id:
        raise UnknownFindingError(f"unknown finding id {args.finding!r}")
    variable = by_id[args.finding].variable
    if args.state is not None:
        replacement = hard_finding(
            "__replacement", variable, net.variable(variable).states, args.state
        )
    elif args.likelihood is not None:
        replacement = Finding(
            "__replacement",
            variable,
            tuple(float(x) for x in args.likelihood.split(",")),
        )
    else:
        raise ValueError("whatif needs --state or --likelihood")

    out: dict = {"finding": args.finding, "variable": variable}
    if args.hypothesis:
        hypothesis = Hypothesis.parse(args.hypothesis)
        clean, conditioned, p_h = _conditioned_pair(tree, hypothesis, findings)
        sent_before = clean.counters.messages_sent + conditioned.counters.messages_sent
        out["p_e"] = clean.evidence_mass
        out["p_swapped"] = clean.what_if(args.finding, replacement)
        out["p_h_given_e"] = analysis.posterior_given_subset(
            clean, conditioned, p_h, clean.finding_ids
        )
        out["p_h_given_swapped"] = analysis.what_if_posterior(
            clean, conditioned, p_h, args.finding, replacement
        )
        sent_after = clean.counters.messages_sent + conditioned.counters.messages_sent
    else:
        clean = _propagated_state(tree, findings)
        sent_before = clean.counters.messages_sent
        out["p_e"] = clean.evidence_mass
        out["p_swapped"] = clean.what_if(args.finding, replacement)
        sent_after = clean.counters.messages_sent
    out["messages_sent_delta"] = sent_after - sent_before
    return out


def _cmd_serve(args) -> None:
    import uvicorn

    from .service import create_app

    app = create_app(model_dir=args.models, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


# -- rendering -----------------------------------------------------------------


def _flatten(doc, prefix: str = "") -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    if isinstance(doc, dict):
        for key, value in doc.items():
            rows.extend(_flatten(value, f"{prefix}{key}." if prefix else f"{key}."))
    elif isinstance(doc, list) and any(isinstance(x, (dict, list)) for x in doc):
        for i, value in enumerate(doc):
            rows.extend(_flatten(value, f"{prefix}{i}."))
    else:
        label = prefix[:-1] if prefix.endswith(".") else prefix
        rows.append((label, json.dumps(doc)))
    return rows


def render(doc, table: bool) -> str:
    if not table:
        return json.dumps(doc, indent=2)
    rows = _flatten(doc)
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cautiousbp",
        description="Junction-tree inference with evidence-subset analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, evidence: bool = True) -> None:
        p.add_argument("--model", required=True, help="model path or name in $" + MODEL_DIR_ENV)
        if evidence:
            p.add_argument("--evidence", help="path to an evidence document")
        p.add_argument("--table", action="store_true", help="aligned text instead of JSON")

    p = sub.add_parser("compile", help="build the junction tree and report it")
    common(p, evidence=False)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("query", help="P(e) and posterior marginals")
    common(p)
    p.add_argument("--marginal", help="restrict output to one variable")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("subsets", help="accessible evidence subsets and their probabilities")
    common(p)
    p.set_defaults(func=_cmd_subsets)

    p = sub.add_parser("conflict", help="conflict measure of the entered evidence")
    common(p)
    p.set_defaults(func=_cmd_conflict)

    p = sub.add_parser("sensitivity", help="classify evidence subsets against a hypothesis")
    common(p)
    p.add_argument("--hypothesis", required=True, help="VAR=state[,VAR=state...]")
    p.add_argument("--thresholds", help="theta1,theta2,theta3 (default 0.2,0.2,0.2)")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("whatif", help="swap one finding without repropagating")
    common(p)
    p.add_argument("--finding", required=True, help="id of the finding to replace")
    p.add_argument("--state", help="replacement hard finding state")
    p.add_argument("--likelihood", help="replacement likelihood, comma-separated")
    p.add_argument("--hypothesis", help="VAR=state[,...]: also report the posterior")
    p.set_defaults(func=_cmd_whatif)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--models", help="directory of model documents", default=None)
    p.add_argument("--ui", help="directory with the built web client", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        doc = args.func(args)
    except _MODEL_ERRORS as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except _ANALYSIS_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CautiousBPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    if doc is not None:
        print(render(doc, getattr(args, "table", False)))
    return EXIT_OK


def console_main() -> None:  # pragma: no cover - thin wrapper
    raise SystemExit(main())
