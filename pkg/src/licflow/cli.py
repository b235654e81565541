"""Command-line front end.

Subcommands: analyze (full pipeline on a workflow file), validate
(parse and structural checks only), licenses (knowledge base listing),
explain (report code reference). Exit codes: 0 clean, 1 warnings only,
2 errors, 3 usage or input failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .analyzer import (
    AnalysisResult,
    ExitClass,
    NotPublished,
    analyze_publication,
    exit_class_of,
    published_targets,
)
from .interchange import InterchangeError, export_dot, parse_workflow
from .kb import KBError, KnowledgeBase, bundled_rules_dir, load_kb
from .model import GraphError, validate_graph
from .reasoner import run_all
from .reports import Report, parse_code, render, sort_reports

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_ERRORS = 2
EXIT_USAGE = 3

KB_ENV_VAR = "LICFLOW_KB"

DISCLAIMER = (
    "note: automated license analysis, not legal advice; "
    "review findings with counsel before relying on them."
)


@dataclass
class CliConfig:
    kb_paths: list[str] = field(default_factory=list)
    fuzz: bool = True
    output: str = "human"
    target: Optional[str] = None


def _default_kb_paths() -> list[str]:
    env = os.environ.get(KB_ENV_VAR)
    if env:
        return [env]
    return [str(bundled_rules_dir())]


def _load_kb(config: CliConfig) -> KnowledgeBase:
    paths = config.kb_paths or _default_kb_paths()
    return load_kb([Path(p) for p in paths])


def _read_file(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _fail(message: str) -> int:
    print(f"licflow: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _structured_line(report: Report) -> str:
    return json.dumps(
        {
            "code": report.code.name,
            "severity": report.severity.value,
            "subject": report.subject,
            "target": report.target,
            "content": report.content,
        }
    )


def _print_reports_human(reports: list[Report], heading: Optional[str]) -> None:
    if heading is not None:
        print(heading)
    if not reports:
        print("  no findings")
        return
    for report in reports:
        print(
            f"  {report.code.name} ({report.severity.value}) "
            f"subject {report.subject}: {report.content}"
        )
    errors = sum(1 for r in reports if r.severity.value == "error")
    warnings = sum(1 for r in reports if r.severity.value == "warning")
    notices = sum(1 for r in reports if r.severity.value == "notice")
    print(f"  total: {errors} errors, {warnings} warnings, {notices} notices")


def _exit_code(reports: list[Report]) -> int:
    return {
        ExitClass.CLEAN: EXIT_OK,
        ExitClass.WARNINGS: EXIT_WARNINGS,
        ExitClass.ERRORS: EXIT_ERRORS,
    }[exit_class_of(reports)]


def cmd_analyze(path: str, config: CliConfig) -> int:
    try:
        kb = _load_kb(config)
    except (KBError, OSError) as err:
        return _fail(str(err))
    try:
        graph = parse_workflow(_read_file(path))
    except (InterchangeError, GraphError, OSError) as err:
        return _fail(str(err))

    structural = validate_graph(graph)
    if structural:
        if config.output == "structured":
            for report in structural:
                print(_structured_line(report))
        else:
            if config.output == "human":
                print(DISCLAIMER)
            _print_reports_human(structural, "workflow validation failed")
        return EXIT_ERRORS

    reasoned, _stats = run_all(graph, kb, config.fuzz)
    targets = [config.target] if config.target else published_targets(reasoned)
    results: list[AnalysisResult] = []
    try:
        for target in targets:
            results.append(analyze_publication(reasoned, kb, target))
    except NotPublished as err:
        return _fail(str(err))

    all_reports = [report for result in results for report in result.reports]
    if config.output == "structured":
        for result in results:
            for report in result.reports:
                print(_structured_line(report))
    elif config.output == "dot":
        merged = AnalysisResult(
            target=",".join(targets),
            reports=sort_reports(all_reports),
            deferred_conflicts=[],
            exit_class=exit_class_of(all_reports),
        )
        print(export_dot(reasoned, merged), end="")
    else:
        print(DISCLAIMER)
        if not results:
            print("no published works to analyze")
        for result in results:
            _print_reports_human(result.reports, f"published work {result.target}")
    return _exit_code(all_reports)


def cmd_validate(path: str, config: Optional[CliConfig] = None) -> int:
    output = config.output if config is not None else "human"
    try:
        graph = parse_workflow(_read_file(path))
    except (InterchangeError, GraphError, OSError) as err:
        return _fail(str(err))
    reports = validate_graph(graph)
    if output == "structured":
        for report in reports:
            print(_structured_line(report))
    else:
        print(DISCLAIMER)
        _print_reports_human(reports, f"validation of {path}")
    return EXIT_ERRORS if reports else EXIT_OK


def cmd_licenses(config: CliConfig) -> int:
    try:
        kb = _load_kb(config)
    except (KBError, OSError) as err:
        return _fail(str(err))
    print(DISCLAIMER)
    for license_id in sorted(kb.licenses):
        profile = kb.licenses[license_id]
        stance = "copyleft" if profile.copyleft else "permissive"
        types = ",".join(sorted(t.value for t in profile.intended_types))
        print(
            f"{profile.id}  framework={profile.framework.value}  {stance}  "
            f"types={types}  rules={len(profile.rules)}"
        )
    return EXIT_OK


def cmd_explain(code_text: str) -> int:
    try:
        code = parse_code(code_text)
    except ValueError as err:
        return _fail(str(err))
    print(DISCLAIMER)
    print(f"{code.name} ({code.severity.value}): {render(code, '?work')}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="licflow",
        description="License-aware analysis of machine learning workflows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--kb",
            action="append",
            default=[],
            metavar="PATH",
            help="license knowledge base file or directory (repeatable; "
            f"default ${KB_ENV_VAR} or the bundled set)",
        )
        p.add_argument(
            "--fuzz",
            choices=["on", "off"],
            default="on",
            help="widen form matching from concrete forms to their category",
        )

    analyze = sub.add_parser("analyze", help="reason over a workflow and report")
    analyze.add_argument("workflow", help="workflow file to analyze")
    add_common(analyze)
    analyze.add_argument(
        "--output", choices=["human", "structured", "dot"], default="human"
    )
    analyze.add_argument(
        "--target", metavar="WORK", help="published work to analyze (default: all)"
    )

    validate = sub.add_parser("validate", help="parse and structurally check")
    validate.add_argument("workflow", help="workflow file to validate")
    validate.add_argument(
        "--output", choices=["human", "structured"], default="human"
    )

    licenses = sub.add_parser("licenses", help="list the loaded license profiles")
    add_common(licenses)

    explain = sub.add_parser("explain", help="describe one report code")
    explain.add_argument("code", help="report code, e.g. E2 or W1")

    return parser


def _config_from(args: argparse.Namespace) -> CliConfig:
    return CliConfig(
        kb_paths=list(getattr(args, "kb", [])),
        fuzz=getattr(args, "fuzz", "on") == "on",
        output=getattr(args, "output", "human"),
        target=getattr(args, "target", None),
    )


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    config = _config_from(args)
    if args.command == "analyze":
        return cmd_analyze(args.workflow, config)
    if args.command == "validate":
        return cmd_validate(args.workflow, config)
    if args.command == "licenses":
        return cmd_licenses(config)
    return cmd_explain(args.code)


if __name__ == "__main__":
    raise SystemExit(main())
