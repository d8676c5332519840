"""Command-line front end for analyst workflows.

Commands: validate bundles, ingest them into a stored graph snapshot, run
graph queries, export, and report statistics. Exit codes: 0 success,
1 domain failure (invalid content, unknown subject, unsupported format),
2 environment failure (I/O, syntax, usage).

The store snapshot is simply the canonical bundle of the whole graph, so
repeated ingests of the same input leave the file byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock, Timeout

from . import relgraph, wire
from .model import (
    Identifier,
    OBJECT_KINDS,
    RELATIONSHIP_KINDS,
    kind_of,
    validate_object,
    validate_relationship,
)
from .relgraph import KnowledgeGraph

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_ENV = 2

STORE_ENV_VAR = "IOO_STORE"
DEFAULT_STORE = "ioo-store.json"
SNAPSHOT_FORMAT_VERSION = 1

QUERY_NAMES = ("neighbors", "attribution", "targets", "amplification", "audience", "footprint")


@dataclass(frozen=True)
class StoreSnapshot:
    path: Path
    content: bytes
    format_version: int = SNAPSHOT_FORMAT_VERSION


def resolve_store(flag_value: str | None) -> Path:
    # precedence: command flag, then environment, then built-in default
    if flag_value:
        return Path(flag_value)
    env_value = os.environ.get(STORE_ENV_VAR)
    return Path(env_value) if env_value else Path(DEFAULT_STORE)


def load_store(path: Path) -> KnowledgeGraph:
    content = path.read_bytes()
    bundle, _ = wire.parse_bundle(content)
    graph, _ = wire.bundle_to_graph(bundle)
    return graph


def save_store(graph: KnowledgeGraph, path: Path) -> StoreSnapshot:
    content = wire.emit_bundle(wire.graph_to_bundle(graph))
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(content)
    os.replace(tmp, path)
    return StoreSnapshot(path, content)


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _fail_env(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ENV


def _fail_domain(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_DOMAIN


# ---------------------------------------------------------------------------
# validate

def _validate_bundle(bundle: wire.Bundle, diagnostics: wire.ParseDiagnostics) -> list[dict]:
    """Findings for every object and relationship in one parsed bundle."""
    findings = [
        {
            "subject": diag.path,
            "severity": diag.severity,
            "code": diag.code,
            "message": diag.message,
            "field": None,
        }
        for diag in diagnostics.warnings
    ]
    kind_by_id = {identifier: kind_of(obj) for identifier, obj in bundle.objects}
    for identifier, obj in bundle.objects:
        report = validate_object(obj, identifier)
        for finding in report.findings:
            findings.append(
                {
                    "subject": str(identifier),
                    "severity": finding.severity,
                    "code": finding.code,
                    "message": finding.message,
                    "field": finding.field,
                }
            )
    for rel in bundle.relationships:
        source_kind = kind_by_id.get(rel.source)
        target_kind = kind_by_id.get(rel.target)
        if source_kind is None or target_kind is None:
            side = "source" if source_kind is None else "target"
            findings.append(
                {
                    "subject": str(rel.id),
                    "severity": "warning",
                    "code": "unresolved-endpoint",
                    "message": f"{side} is not in this bundle; legality not checked",
                    "field": side,
                }
            )
            continue
        report = validate_relationship(rel, source_kind, target_kind)
        for finding in report.findings:
            findings.append(
                {
                    "subject": str(rel.id),
                    "severity": finding.severity,
                    "code": finding.code,
                    "message": finding.message,
                    "field": finding.field,
                }
            )
    return findings


def cmd_validate(args: argparse.Namespace) -> int:
    file_reports = []
    any_error = False
    for path_text in args.paths:
        path = Path(path_text)
        try:
            content = path.read_bytes()
        except OSError as exc:
            return _fail_env(f"cannot read {path}: {exc}")
        try:
            bundle, diagnostics = wire.parse_bundle(content)
        except (wire.BundleSyntaxError, wire.NotABundle) as exc:
            return _fail_env(f"{path}: {exc}")
        findings = _validate_bundle(bundle, diagnostics)
        failing = [
            f for f in findings if f["severity"] == "error" or (args.strict and f["severity"] == "warning")
        ]
        any_error = any_error or bool(failing)
        file_reports.append({"path": str(path), "findings": findings, "valid": not failing})
    if args.output == "machine":
        _print_json({"files": file_reports, "valid": not any_error})
    else:
        for report in file_reports:
            print(f"{report['path']}: {'valid' if report['valid'] else 'INVALID'}")
            for finding in report["findings"]:
                where = f" ({finding['field']})" if finding["field"] else ""
                print(
                    f"  [{finding['severity']}] {finding['subject']}: "
                    f"{finding['code']}: {finding['message']}{where}"
                )
    return EXIT_DOMAIN if any_error else EXIT_OK


# ---------------------------------------------------------------------------
# ingest

def cmd_ingest(args: argparse.Namespace) -> int:
    store_path = resolve_store(args.store)
    lock = FileLock(str(store_path) + ".lock")
    try:
        lock.acquire(timeout=10)
    except Timeout:
        return _fail_env(f"store {store_path} is locked by another process")
    try:
        if store_path.exists():
            try:
                graph = load_store(store_path)
            except (OSError, wire.BundleSyntaxError, wire.NotABundle) as exc:
                return _fail_env(f"cannot load store {store_path}: {exc}")
        else:
            graph = KnowledgeGraph()
        totals = {
            "objects_inserted": 0,
            "objects_updated": 0,
            "objects_unchanged": 0,
            "edges_inserted": 0,
            "edges_updated": 0,
            "edges_unchanged": 0,
            "skipped": 0,
        }
        for path_text in args.paths:
            path = Path(path_text)
            try:
                content = path.read_bytes()
            except OSError as exc:
                return _fail_env(f"cannot read {path}: {exc}")
            try:
                bundle, parse_diags = wire.parse_bundle(content)
            except (wire.BundleSyntaxError, wire.NotABundle) as exc:
                return _fail_env(f"{path}: {exc}")
            for diag in parse_diags.warnings:
                print(f"{path}: {diag.severity}: {diag.path}: {diag.message}", file=sys.stderr)
            stats, merge_diags = wire.merge_bundle(graph, bundle)
            for diag in merge_diags.warnings:
                print(f"{path}: {diag.severity}: {diag.path}: {diag.message}", file=sys.stderr)
            for key in totals:
                totals[key] += getattr(stats, key)
        try:
            save_store(graph, store_path)
        except OSError as exc:
            return _fail_env(f"cannot write store {store_path}: {exc}")
    finally:
        lock.release()
    if args.output == "machine":
        _print_json(totals)
    else:
        print(
            "objects: {objects_inserted} inserted, {objects_updated} updated, "
            "{objects_unchanged} unchanged".format(**totals)
        )
        print(
            "edges: {edges_inserted} inserted, {edges_updated} updated, "
            "{edges_unchanged} unchanged".format(**totals)
        )
        print("skipped: {skipped}".format(**totals))
    return EXIT_OK


# ---------------------------------------------------------------------------
# query

def _run_query(graph: KnowledgeGraph, args: argparse.Namespace, subject: Identifier):
    if args.query == "neighbors":
        pairs = graph.neighbors(subject, direction=args.direction, kind=args.kind)
        return [
            {"edge": str(rel.id), "kind": rel.kind, "other": str(other)} for rel, other in pairs
        ]
    if args.query == "attribution":
        return [str(i) for i in graph.attribution_of(subject)]
    if args.query == "targets":
        return [str(i) for i in graph.targets_of(subject, transitive=args.transitive)]
    if args.query == "amplification":
        return [str(i) for i in graph.amplification_closure(subject)]
    if args.query == "audience":
        audience = graph.audience_of(subject)
        return {
            "communities": [str(i) for i in audience.communities],
            "personas": [str(i) for i in audience.personas],
        }
    audience = graph.footprint_of(subject)
    return {
        "accounts": [str(i) for i in audience.accounts],
        "messages": [str(i) for i in audience.messages],
    }


def cmd_query(args: argparse.Namespace) -> int:
    store_path = resolve_store(args.store)
    try:
        graph = load_store(store_path)
    except (OSError, wire.BundleSyntaxError, wire.NotABundle) as exc:
        return _fail_env(f"cannot load store {store_path}: {exc}")
    try:
        subject = Identifier.parse(args.subject)
    except ValueError as exc:
        return _fail_domain(f"cannot parse subject id {args.subject!r}: {exc}")
    try:
        result = _run_query(graph, args, subject)
    except (relgraph.NotFound, relgraph.WrongKind) as exc:
        return _fail_domain(str(exc))
    if args.output == "machine":
        _print_json(result)
    elif isinstance(result, dict):
        for section, ids in result.items():
            print(f"{section}:")
            for value in ids:
                print(f"  {value}")
    else:
        for entry in result:
            if isinstance(entry, dict):
                print(f"{entry['kind']} {entry['other']} ({entry['edge']})")
            else:
                print(entry)
    return EXIT_OK


# ---------------------------------------------------------------------------
# export / stats

def cmd_export(args: argparse.Namespace) -> int:
    store_path = resolve_store(args.store)
    try:
        graph = load_store(store_path)
    except (OSError, wire.BundleSyntaxError, wire.NotABundle) as exc:
        return _fail_env(f"cannot load store {store_path}: {exc}")
    try:
        content = wire.export_graph(graph, args.format)
    except wire.UnsupportedFormat as exc:
        return _fail_domain(str(exc))
    if args.out == "-":
        sys.stdout.write(content.decode("utf-8"))
        return EXIT_OK
    try:
        Path(args.out).write_bytes(content)
    except OSError as exc:
        return _fail_env(f"cannot write {args.out}: {exc}")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    store_path = resolve_store(args.store)
    try:
        graph = load_store(store_path)
    except (OSError, wire.BundleSyntaxError, wire.NotABundle) as exc:
        return _fail_env(f"cannot load store {store_path}: {exc}")
    stats = graph.stats()
    if args.output == "machine":
        _print_json(
            {
                "objects": stats.objects_by_kind,
                "edges": stats.edges_by_kind,
                "object_total": stats.object_total,
                "edge_total": stats.edge_total,
            }
        )
        return EXIT_OK
    width = max(len(kind) for kind in OBJECT_KINDS + RELATIONSHIP_KINDS) + 2
    print("objects:")
    for kind in OBJECT_KINDS:
        print(f"  {kind:<{width}}{stats.objects_by_kind[kind]}")
    print(f"  {'total':<{width}}{stats.object_total}")
    print("edges:")
    for kind in RELATIONSHIP_KINDS:
        print(f"  {kind:<{width}}{stats.edges_by_kind[kind]}")
    print(f"  {'total':<{width}}{stats.edge_total}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ioo",
        description="Validate, store, query, and export influence-operation intelligence graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate bundle files")
    p_validate.add_argument("paths", nargs="+", help="bundle JSON files")
    p_validate.add_argument("--strict", action="store_true", help="treat warnings as errors")
    p_validate.add_argument("--output", choices=("text", "machine"), default="text")
    p_validate.set_defaults(func=cmd_validate)

    p_ingest = sub.add_parser("ingest", help="merge bundle files into the store")
    p_ingest.add_argument("paths", nargs="+", help="bundle JSON files")
    p_ingest.add_argument("--store", help=f"store path (default: ${STORE_ENV_VAR} or {DEFAULT_STORE})")
    p_ingest.add_argument("--output", choices=("text", "machine"), default="text")
    p_ingest.set_defaults(func=cmd_ingest)

    p_query = sub.add_parser("query", help="run a graph query against the store")
    p_query.add_argument("query", choices=QUERY_NAMES)
    p_query.add_argument("subject", help="subject identifier (type--uuid)")
    p_query.add_argument("--store", help=f"store path (default: ${STORE_ENV_VAR} or {DEFAULT_STORE})")
    p_query.add_argument("--direction", choices=("out", "in", "both"), default="both")
    p_query.add_argument("--kind", help="restrict neighbors to one relationship kind")
    p_query.add_argument("--transitive", action="store_true", help="include targets of owned structures")
    p_query.add_argument("--output", choices=("text", "machine"), default="text")
    p_query.set_defaults(func=cmd_query)

    p_export = sub.add_parser("export", help="export the store")
    p_export.add_argument("--store", help=f"store path (default: ${STORE_ENV_VAR} or {DEFAULT_STORE})")
    p_export.add_argument("--format", default="triples", help="triples or viz")
    p_export.add_argument("--out", default="-", help="output file, - for stdout")
    p_export.set_defaults(func=cmd_export)

    p_stats = sub.add_parser("stats", help="object and edge counts")
    p_stats.add_argument("--store", help=f"store path (default: ${STORE_ENV_VAR} or {DEFAULT_STORE})")
    p_stats.add_argument("--output", choices=("text", "machine"), default="text")
    p_stats.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
