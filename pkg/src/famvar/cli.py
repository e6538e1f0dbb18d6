"""Command-line interface: batch workflows over variant models.

Exit status: 0 on success, 1 for validation or diagnostic failures,
2 for usage and I/O errors. All output is deterministic; identical
inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import derive
from .configure import (
    DEFAULT_MAX_SPACE,
    Decision,
    Requirements,
    StateKind,
    apply_requirements,
    enumerate_products,
    new_session,
    validate_configuration,
)
from .errors import FamvarError, InvalidModelError
from .model import FamilyModel, numeric_key, validate_model
from .trace import check_traces, customize_document, trace_backward, trace_forward
from .xmlio import (
    parse_configuration,
    parse_family_model,
    parse_model_document,
    parse_requirements,
    render_diagnostics_xml,
    render_table,
    serialize_configuration,
    serialize_family_model,
    serialize_model_document,
)


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _load_model(path: str) -> FamilyModel:
    return parse_family_model(_read(path))


def _print_err(exc: FamvarError) -> None:
    if isinstance(exc, InvalidModelError) and exc.diagnostics:
        for diag in exc.diagnostics:
            print(diag.render(), file=sys.stderr)
    else:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="famvar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a variant model for structural problems")
    p.add_argument("model")
    p.add_argument("--format", choices=("text", "xml"), default="text")

    p = sub.add_parser("table", help="render the variant model as a table")
    p.add_argument("model")
    p.add_argument("--format", choices=("text", "xml"), default="text")

    p = sub.add_parser("decisions", help="derive the decision table")
    p.add_argument("model")
    p.add_argument("--format", choices=("text", "xml", "dot"), default="text")

    p = sub.add_parser("customize", help="reduce a model per a requirements document")
    p.add_argument("model")
    p.add_argument("requirements")
    p.add_argument("-o", "--out", required=True, metavar="DIR")

    p = sub.add_parser("enumerate", help="list every valid configuration for an area")
    p.add_argument("model")
    p.add_argument("--area", required=True)
    p.add_argument("--count", action="store_true", help="print only the number of configurations")
    p.add_argument("--max-space", type=int, default=None)
    p.add_argument("--format", choices=("text", "xml"), default="text")

    p = sub.add_parser("configure", help="run a scripted decision session")
    p.add_argument("model")
    p.add_argument("--area", required=True)
    p.add_argument(
        "--decide", action="append", default=[], metavar="REF[,REF...]",
        help="values to include, in order; repeatable",
    )
    p.add_argument("--exclude", action="append", default=[], metavar="ID", help="variants to exclude")
    p.add_argument("--format", choices=("text", "xml"), default="xml")
    p.add_argument("-o", "--out", metavar="DIR")

    p = sub.add_parser("trace", help="check or query variant-to-element traces")
    p.add_argument("model")
    p.add_argument("docs", nargs="+")
    p.add_argument("--id", help="print elements traced from this variant or value")
    p.add_argument("--element", help="print the tag of this element")
    p.add_argument("--format", choices=("text", "xml"), default="text")

    p = sub.add_parser("customize-doc", help="prune a model document per a configuration")
    p.add_argument("doc")
    p.add_argument("model")
    p.add_argument("configuration")
    p.add_argument("-o", "--out", metavar="FILE")

    p = sub.add_parser("export-features", help="export the feature-tree view")
    p.add_argument("model")
    p.add_argument("--format", choices=("text", "xml", "dot"), default="text")

    p = sub.add_parser("serve", help="run the HTTP configuration service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui", metavar="DIR", help="serve a static frontend from this directory")

    return parser


def _max_space(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("FAMVAR_MAX_SPACE")
    if env:
        return int(env)
    return DEFAULT_MAX_SPACE


def _cmd_validate(args) -> int:
    try:
        model = parse_family_model(_read(args.model))
    except InvalidModelError as exc:
        if args.format == "xml":
            sys.stdout.write(render_diagnostics_xml(exc.diagnostics))
        else:
            for diag in exc.diagnostics:
                print(diag.render())
        return 1
    if args.format == "xml":
        sys.stdout.write(render_diagnostics_xml(validate_model(model)))
    return 0


def _cmd_table(args) -> int:
    model = _load_model(args.model)
    if args.format == "xml":
        sys.stdout.buffer.write(serialize_family_model(model))
    else:
        sys.stdout.write(render_table(model))
    return 0


def _cmd_decisions(args) -> int:
    table = derive.derive_decision_table(_load_model(args.model))
    if args.format == "xml":
        sys.stdout.write(derive.render_decision_table_xml(table))
    elif args.format == "dot":
        sys.stdout.write(derive.render_decision_table_dot(table))
    else:
        sys.stdout.write(derive.render_decision_table_text(table))
    return 0


def _cmd_customize(args) -> int:
    model = _load_model(args.model)
    reqs = parse_requirements(_read(args.requirements), model)
    customized, _config = apply_requirements(model, reqs)
    reduced = derive.reduce_decision_table(derive.derive_decision_table(model), customized, reqs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.xml").write_bytes(serialize_family_model(customized))
    (out / "decisions.txt").write_text(derive.render_decision_table_text(reduced), encoding="utf-8")
    return 0


def _render_config_line(config) -> str:
    cells = []
    for vid in sorted(config.states, key=numeric_key):
        state = config.states[vid]
        if state.is_included():
            cells.append(f"{vid}:{','.join(sorted(state.selected, key=numeric_key))}")
        else:
            cells.append(f"{vid}:-")
    return " ".join(cells)


def _cmd_enumerate(args) -> int:
    model = _load_model(args.model)
    products = enumerate_products(model, args.area, _max_space(args.max_space))
    if args.count:
        print(sum(1 for _ in products))
        return 0
    if args.format == "xml":
        print("<configurations>")
        for config in products:
            body = serialize_configuration(config).decode("utf-8").splitlines()[1:]
            for line in body:
                print("  " + line)
        print("</configurations>")
    else:
        for config in products:
            print(_render_config_line(config))
    return 0


def _cmd_configure(args) -> int:
    model = _load_model(args.model)
    session = new_session(model, args.area)
    decisions = [
        Decision("include", ref.strip())
        for group in args.decide
        for ref in group.split(",")
        if ref.strip()
    ]
    decisions.extend(Decision("exclude", ref) for ref in args.exclude)
    report: list[str] = []
    conflicted = False
    for decision in decisions:
        consequences = session.apply_decision(decision)
        report.append(f"DECIDE {decision.action} {decision.ref}")
        report.extend(c.render() for c in consequences)
        if any(c.kind.value == "CONFLICT" for c in consequences):
            conflicted = True
            break
    if not conflicted:
        # scripted runs treat everything not asked for as not wanted
        for vid in list(session.open_variants()):
            state = session.states[vid]
            if state.kind is StateKind.UNDECIDED:
                session.apply_decision(Decision("exclude", vid))
    report_text = "\n".join(report) + ("\n" if report else "")
    if conflicted:
        sys.stdout.write(report_text)
        return 1
    config = session.configuration()
    diagnostics = validate_configuration(session.model, config)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "consequences.txt").write_text(report_text, encoding="utf-8")
        (out / "configuration.xml").write_bytes(serialize_configuration(config))
    else:
        sys.stdout.write(report_text)
        if args.format == "xml":
            sys.stdout.buffer.write(serialize_configuration(config))
        else:
            print(_render_config_line(config))
    if diagnostics:
        for diag in diagnostics:
            print(diag.render(), file=sys.stderr)
        return 1
    return 0


def _cmd_trace(args) -> int:
    model = _load_model(args.model)
    docs = [parse_model_document(_read(path)) for path in args.docs]
    if args.id:
        elements = trace_forward(model, args.id, docs)
        if args.format == "xml":
            print("<trace>")
            for el in elements:
                print(f'  <element id="{el}"/>')
            print("</trace>")
        else:
            for el in elements:
                print(el)
        return 0
    if args.element:
        tag = trace_backward(docs, args.element)
        print(tag if tag is not None else "(untagged)")
        return 0
    diagnostics = [diag for doc in docs for diag in check_traces(doc, model)]
    if args.format == "xml":
        sys.stdout.write(render_diagnostics_xml(diagnostics))
    else:
        for diag in diagnostics:
            print(diag.render())
    return 1 if diagnostics else 0


def _cmd_customize_doc(args) -> int:
    model = _load_model(args.model)
    doc = parse_model_document(_read(args.doc))
    config = parse_configuration(_read(args.configuration), model)
    result = customize_document(doc, model, config)
    payload = serialize_model_document(result)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


def _cmd_export_features(args) -> int:
    tree = derive.export_feature_tree(_load_model(args.model))
    if args.format == "xml":
        sys.stdout.write(derive.render_feature_tree_xml(tree))
    elif args.format == "dot":
        sys.stdout.write(derive.render_feature_tree_dot(tree))
    else:
        sys.stdout.write(derive.render_feature_tree_text(tree))
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, ui_dir=args.ui)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "table": _cmd_table,
    "decisions": _cmd_decisions,
    "customize": _cmd_customize,
    "enumerate": _cmd_enumerate,
    "configure": _cmd_configure,
    "trace": _cmd_trace,
    "customize-doc": _cmd_customize_doc,
    "export-features": _cmd_export_features,
    "serve": _cmd_serve,
}


def run(argv: list[str] | None = None) -> int:
    """Parse argv and dispatch; returns the process exit status."""
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except FamvarError as exc:
        _print_err(exc)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
