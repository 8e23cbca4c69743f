"""``junctionc`` command line: compile, query and verify.

Exit codes: 0 success, 1 a verified property failed, 2 the model file
could not be parsed, 3 the model is semantically invalid or cannot be
compiled, 4 the evidence is impossible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import verify
from .errors import (
    BoundExceededError,
    ContractViolation,
    CycleError,
    DisconnectedGraphError,
    ImpossibleEvidenceError,
    InconsistencyError,
    ModelParseError,
    ModelSemanticError,
    ModelTooLargeError,
    NestedCliquesError,
    NotChordalError,
    UnknownVariableError,
)
from .estimator import JunctionTreeInference
from .modelfile import dumps, load

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_SEMANTIC, EXIT_IMPOSSIBLE = 0, 1, 2, 3, 4
SEED_ENV = "JUNCTIONC_SEED"

_SEMANTIC = (
    ModelSemanticError,
    ContractViolation,
    CycleError,
    DisconnectedGraphError,
    ModelTooLargeError,
    NestedCliquesError,
    BoundExceededError,
    UnknownVariableError,
    NotChordalError,
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _compile_text(rep: dict) -> str:
    tri = rep["triangulation"]
    lines = [
        f"variables: {rep['variables']}",
        f"triangulation: {tri['method']} ({tri['objective']})",
        f"  order: {' '.join(tri['order'])}",
        f"  fill-ins ({len(tri['fill_ins'])}): " + (", ".join("-".join(e) for e in tri["fill_ins"]) or "none"),
        f"  total clique weight: {tri['total_clique_weight']}",
        f"cliques ({len(rep['cliques'])}):",
    ]
    lines += [f"  [{c['id']}] {{{', '.join(c['vars'])}}} size {c['table_size']}" for c in rep["cliques"]]
    lines.append(f"separators ({sum(s['multiplicity'] for s in rep['separators'])}):")
    lines += [f"  {{{', '.join(s['vars'])}}} x{s['multiplicity']} size {s['table_size']}" for s in rep["separators"]]
    tree = rep["tree"]
    lines.append(f"junction tree ({tree['algorithm']}): weight {tree['total_weight']}, cost {tree['total_cost']}")
    lines += [
        f"  {l['cliques'][0]} - {l['cliques'][1]} on {{{', '.join(l['separator'])}}} cost {l['cost']}"
        for l in tree["links"]
    ]
    if "almond" in rep:
        a = rep["almond"]
        lines.append(f"almond tree: cost {a['total_cost']}")
        lines += [
            f"  node {s['node']} {{{', '.join(s['vars'])}}} multiplicity {s['multiplicity']}"
            f" degree {s['degree']} stores {s['stored_tables']}"
            for s in a["separator_nodes"]
        ]
        lines += [f"  link {l['separator_node']} -> {l['superset_node']} cost {l['cost']}" for l in a["links"]]
        for label, key in (("junction tree", "junction_tree_budget"), ("almond tree", "almond_budget")):
            b = a[key]
            lines.append(
                f"  {label} budget: {b['marginalizations']} marginalizations,"
                f" {b['stored_tables']} stored tables, work {b['marginalization_work']}"
            )
    return "\n".join(lines)


def cmd_compile(args) -> int:
    est = JunctionTreeInference(objective=args.objective, optimal=args.optimal).fit(load(args.model))
    rep = est.report(almond=args.almond)
    print(json.dumps(rep, indent=2) if args.emit == "json" else _compile_text(rep))
    return EXIT_OK


def _parse_evidence(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items:
        name, sep, state = item.partition("=")
        if not sep or not name or not state:
            raise ContractViolation(f"evidence {item!r} is not of the form VAR=STATE")
        out[name] = state
    return out


def cmd_query(args) -> int:
    model = load(args.model)
    est = JunctionTreeInference(tree="almond" if args.almond else "kruskal").fit(model)
    evidence = _parse_evidence(args.evidence)
    marginals = est.predict_proba(evidence, args.marginal or None)
    idx = {n: i for i, n in enumerate(model.universe.names)}
    if args.emit == "json":
        doc = {
            "evidence": evidence,
            "marginals": {
                name: dict(zip(model.states[idx[name]], p.tolist())) for name, p in marginals.items()
            },
        }
        print(json.dumps(doc, indent=2))
    else:
        for name, p in marginals.items():
            cells = " ".join(f"{s}={_fmt(x)}" for s, x in zip(model.states[idx[name]], p))
            print(f"{name}: {cells}")
    return EXIT_OK


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ContractViolation(f"{SEED_ENV}={raw!r} is not an integer") from None


def cmd_verify(args) -> int:
    seed = _seed(args)
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    status = EXIT_OK
    for name in names:
        res = verify.run_suite(name, seed, args.cases)
        for note in res.notes:
            print(f"{name}: {note}")
        for msg in res.failures:
            print(f"{name}: {msg}")
        verdict = "PASS" if res.passed else "FAIL"
        print(f"{name}: {verdict} (seed {seed}, {res.cases} cases, {len(res.failures)} failures)")
        if not res.passed:
            status = EXIT_FAILED
            if res.replay is not None:
                text = dumps(res.replay)
                if args.dump_dir:
                    path = Path(args.dump_dir) / f"{name}-seed{seed}.json"
                    path.parent.mkdir(parents=True, exist_ok=True)
                    path.write_text(text)
                    print(f"{name}: failing instance written to {path}")
                else:
                    print(f"{name}: failing instance follows")
                    sys.stdout.write(text)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="junctionc", description="Junction tree compiler and exact inference.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="triangulate a model and build its junction and Almond trees")
    c.add_argument("model")
    c.add_argument("--objective", choices=("fill", "weight"), default="fill")
    c.add_argument("--optimal", action="store_true", help="exhaustive triangulation (small models)")
    c.add_argument("--almond", action="store_true", help="include Almond tree statistics")
    c.add_argument("--emit", choices=("json", "text"), default="text")
    c.set_defaults(func=cmd_compile)

    q = sub.add_parser("query", help="posterior marginals given evidence")
    q.add_argument("model")
    q.add_argument("--evidence", nargs="*", default=[], metavar="VAR=STATE")
    q.add_argument("--marginal", nargs="*", default=[], metavar="VAR")
    q.add_argument("--almond", action="store_true", help="propagate over the Almond tree")
    q.add_argument("--emit", choices=("json", "text"), default="text")
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("verify", help="run the randomised property suites")
    v.add_argument("--suite", choices=(*verify.SUITES, "all"), default="all")
    v.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV}, else 0")
    v.add_argument("--cases", type=int, default=200)
    v.add_argument("--dump-dir", default=None, help="write failing instances here instead of stdout")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "cases", 0) < 0:
        print("junctionc: error: --cases must be nonnegative", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except ModelParseError as exc:
        print(f"junctionc: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ImpossibleEvidenceError, InconsistencyError) as exc:
        print(f"junctionc: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except _SEMANTIC as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"junctionc: error: {msg}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
