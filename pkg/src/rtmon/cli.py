"""Command-line front end.

Five verbs over the text formats: ``query`` evaluates an expression,
``check`` tests constraints, ``deps`` prints the monitoring frontiers,
``analyze`` runs the conservative bound analysis under a role monitor, and
``monitor`` replays a change log and streams warnings.

Every invocation produces one report; ``--format machine`` renders it as a
single JSON document with stable field names.  Exit codes: 0 all checks
hold, 1 a check or constraint is violated, 2 input error, 3 monitoring
could not be established (no admissible support).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Optional

from .analysis import (
    check_bounded_containment,
    core,
    gamma_restricted_expr,
)
from .deps import (
    NoSupport,
    gamma_expr,
    minimal_supports,
    support_for_constraint,
)
from .engine import check_constraint, eval_expr, evaluate
from .model import roles_of
from .monitor import (
    FullTrust,
    FullTrustCredential,
    MonitorMode,
    RecordStatus,
    RestrictedTrust,
    WarningOutcome,
    register,
    run_session,
)
from .parser import (
    ParseError,
    parse_changelog,
    parse_constraints,
    parse_expr,
    parse_monitor,
    parse_policy,
    serialize_expr,
    serialize_policy,
)

__all__ = ["main", "main_entry"]

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INPUT_ERROR = 2
EXIT_UNESTABLISHED = 3


class _InputError(Exception):
    def __init__(self, path: str, detail: str):
        super().__init__(f"{path}: {detail}")


def _read(path: str) -> tuple[str, str]:
    """File contents plus its digest for the report's input echo."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise _InputError(path, exc.strerror or str(exc)) from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise _InputError(path, f"not valid UTF-8 ({exc.reason})") from exc
    return text, hashlib.sha256(raw).hexdigest()


def _load(path: str, parse, inputs: dict, label: str):
    text, digest = _read(path)
    inputs[label] = {"path": path, "sha256": digest}
    try:
        return parse(text)
    except ParseError as exc:
        raise _InputError(path, str(exc)) from exc


def _names(principals) -> list[str]:
    return sorted(p.name for p in principals)


def _role_names(roles) -> list[str]:
    return sorted(str(r) for r in roles)


def _support_payload(support) -> Optional[list[str]]:
    if support is None:
        return None
    if hasattr(support, "roles"):
        return _role_names(support.roles)
    return sorted(str(s) for s in support.statements)


def _exit_code(violated: bool, unestablished: bool) -> int:
    # Unestablished monitoring outranks a plain violation: the former means
    # the tool cannot even promise to notice future violations.
    if unestablished:
        return EXIT_UNESTABLISHED
    if violated:
        return EXIT_VIOLATED
    return EXIT_OK


def cmd_query(args) -> dict:
    inputs: dict = {}
    state = _load(args.policy, parse_policy, inputs, "policy")
    try:
        expr = parse_expr(args.expr)
    except ParseError as exc:
        raise _InputError("<expr>", str(exc)) from exc
    members = eval_expr(evaluate(state), expr)
    result = {"expr": serialize_expr(expr), "members": _names(members)}
    return _report("query", inputs, result, EXIT_OK)


def cmd_check(args) -> dict:
    inputs: dict = {}
    state = _load(args.policy, parse_policy, inputs, "policy")
    constraints = _load(args.constraints, parse_constraints, inputs, "constraints")
    verdicts = []
    for q in constraints:
        got = check_constraint(state, q)
        verdicts.append(
            {"id": q.id, "satisfied": got.satisfied, "violators": _names(got.violators)}
        )
    violated = any(not v["satisfied"] for v in verdicts)
    return _report(
        "check", inputs, {"constraints": verdicts}, _exit_code(violated, False)
    )


def cmd_deps(args) -> dict:
    inputs: dict = {}
    state = _load(args.policy, parse_policy, inputs, "policy")
    constraints = _load(args.constraints, parse_constraints, inputs, "constraints")
    idx = evaluate(state)
    verdicts = []
    violated = False
    for q in constraints:
        got = check_constraint(state, q)
        entry: dict = {
            "id": q.id,
            "satisfied": got.satisfied,
            "gamma": _role_names(gamma_expr(state, q.lhs).roles),
        }
        if got.satisfied:
            members = eval_expr(idx, q.lhs)
            entry["support"] = _role_names(
                support_for_constraint(state, members, q.rhs).roles
            )
            if args.all_supports:
                per_member = {}
                for member in sorted(members, key=str):
                    role_sets = set()
                    for role in sorted(roles_of(q.rhs), key=str):
                        role_sets |= minimal_supports(state, member, role)
                    per_member[member.name] = sorted(
                        (_role_names(s.roles) for s in role_sets)
                    )
                entry["all_supports"] = per_member
        else:
            violated = True
            entry["support"] = None
            entry["violators"] = _names(got.violators)
        verdicts.append(entry)
    return _report(
        "deps", inputs, {"constraints": verdicts}, _exit_code(violated, False)
    )


def cmd_analyze(args) -> dict:
    inputs: dict = {}
    state = _load(args.policy, parse_policy, inputs, "policy")
    constraints = _load(args.constraints, parse_constraints, inputs, "constraints")
    monitor = _load(args.monitor, parse_monitor, inputs, "monitor").bind(state)
    coreset = core(state, monitor.growth_trusted)
    verdicts = []
    violated = False
    unestablished = False
    for q in constraints:
        chk = check_bounded_containment(state, monitor, q)
        entry: dict = {
            "id": q.id,
            "holds": chk.holds,
            "witnesses": _names(chk.witnesses),
            "gamma_restricted": _role_names(
                gamma_restricted_expr(state, monitor.growth_trusted, q.lhs).roles
            ),
        }
        try:
            support = support_for_constraint(
                state, chk.lhs_upper, q.rhs, admissible=monitor.shrink_trusted
            )
            entry["support"] = _role_names(support.roles)
            entry["established"] = True
        except NoSupport as exc:
            entry["support"] = None
            entry["established"] = False
            entry["unsupported_member"] = exc.member.name
            unestablished = True
        if not chk.holds:
            violated = True
        verdicts.append(entry)
    result = {"core": _role_names(coreset.roles), "constraints": verdicts}
    return _report("analyze", inputs, result, _exit_code(violated, unestablished))


def cmd_monitor(args) -> dict:
    inputs: dict = {}
    state = _load(args.policy, parse_policy, inputs, "policy")
    constraints = _load(args.constraints, parse_constraints, inputs, "constraints")
    log = _load(args.changelog, parse_changelog, inputs, "changelog")
    mode: MonitorMode
    if args.monitor:
        if args.credential_support:
            raise _InputError(
                "<flags>", "--credential-support cannot be combined with a role monitor"
            )
        mode = RestrictedTrust(_load(args.monitor, parse_monitor, inputs, "monitor"))
        mode_name = "restricted-trust"
    elif args.credential_support:
        mode = FullTrustCredential()
        mode_name = "full-trust-credential"
    else:
        mode = FullTrust()
        mode_name = "full-trust"

    session = run_session(state, [(q, mode) for q in constraints], log)

    # Echo the registration outcome so a pre-violated constraint is visible
    # even when the log never touches it.
    initial = []
    for q in constraints:
        rec = register(state, q, mode)
        initial.append(
            {
                "id": q.id,
                "status": rec.status.value,
                "violators": _names(rec.violators),
            }
        )

    warnings = []
    for w in session.warnings:
        if args.quiet_holds and w.outcome is WarningOutcome.STILL_HOLDS:
            continue
        warnings.append(
            {
                "constraint": w.constraint_id,
                "cause": w.cause.value,
                "event": str(w.event),
                "outcome": w.outcome.value,
                "violators": _names(w.violators),
                "recomputed": w.recomputed,
                "noop": w.noop,
            }
        )

    violated = any(
        w.outcome in (WarningOutcome.NOW_VIOLATED, WarningOutcome.BOUND_NOW_VIOLATED)
        for w in session.warnings
    ) or any(e["status"] in ("violated", "bound-violated") for e in initial)
    unestablished = any(
        rec.status is RecordStatus.UNESTABLISHED for rec in session.records
    ) or any(e["status"] == "unestablished" for e in initial)

    result = {
        "mode": mode_name,
        "initial": initial,
        "warnings": warnings,
        "final_state": [line for line in serialize_policy(session.final_state).splitlines()],
        "final_records": [
            {
                "id": rec.constraint.id,
                "status": rec.status.value,
                "gamma": _role_names(rec.gamma_cache.roles)
                if rec.gamma_cache is not None
                else None,
                "support": _support_payload(rec.support_cache),
            }
            for rec in session.records
        ],
    }
    report = _report("monitor", inputs, result, _exit_code(violated, unestablished))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(serialize_policy(session.final_state))
    return report


def _report(command: str, inputs: dict, result: dict, exit_code: int) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "result": result,
        "exit_code": exit_code,
    }


def _render_human(report: dict) -> str:
    command = report["command"]
    result = report["result"]
    lines: list[str] = []
    if command == "query":
        lines.extend(result["members"])
    elif command == "check":
        for v in result["constraints"]:
            if v["satisfied"]:
                lines.append(f"{v['id']}: satisfied")
            else:
                lines.append(f"{v['id']}: violated [{', '.join(v['violators'])}]")
    elif command == "deps":
        for v in result["constraints"]:
            lines.append(f"{v['id']}: {'satisfied' if v['satisfied'] else 'violated'}")
            lines.append(f"  gamma: {', '.join(v['gamma']) or '(empty)'}")
            if v["support"] is not None:
                lines.append(f"  support: {', '.join(v['support']) or '(empty)'}")
            for member, supports in v.get("all_supports", {}).items():
                rendered = ", ".join("{" + ", ".join(s) + "}" for s in supports)
                lines.append(f"  supports for {member}: {rendered}")
    elif command == "analyze":
        lines.append(f"core: {', '.join(result['core']) or '(empty)'}")
        for v in result["constraints"]:
            verdict = "bound holds" if v["holds"] else (
                f"bound violated [{', '.join(v['witnesses'])}]"
            )
            lines.append(f"{v['id']}: {verdict}")
            lines.append(
                f"  gamma-restricted: {', '.join(v['gamma_restricted']) or '(empty)'}"
            )
            if v["established"]:
                lines.append(f"  support: {', '.join(v['support']) or '(empty)'}")
            else:
                lines.append("  support: unestablished")
    elif command == "monitor":
        for e in result["initial"]:
            tail = f" [{', '.join(e['violators'])}]" if e["violators"] else ""
            lines.append(f"{e['id']}: {e['status']}{tail}")
        for w in result["warnings"]:
            tail = f": {', '.join(w['violators'])}" if w["violators"] else ""
            suffix = " (recomputed)" if w["recomputed"] else ""
            lines.append(
                f"warning {w['constraint']} {w['cause']} [{w['event']}]"
                f" -> {w['outcome']}{tail}{suffix}"
            )
        for rec in result["final_records"]:
            if rec["support"] is not None:
                lines.append(f"{rec['id']} support: {', '.join(rec['support']) or '(empty)'}")
        lines.append(f"final state: {len(result['final_state'])} statements")
    return "".join(line + "\n" for line in lines)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="rtmon",
        description="Role-based trust policies with integrity-constraint monitoring",
    )
    top.add_argument(
        "--format", choices=("human", "machine"), default="human",
        help="report format (machine = one JSON document)",
    )
    top.add_argument(
        "--out", metavar="FILE", default=None,
        help="write the report to FILE (for 'monitor': write the final policy state)",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("query", help="evaluate a role expression against a policy")
    p.add_argument("policy")
    p.add_argument("expr")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("check", help="check constraints against a policy")
    p.add_argument("policy")
    p.add_argument("constraints")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("deps", help="print growth sets and supports per constraint")
    p.add_argument("policy")
    p.add_argument("constraints")
    p.add_argument("--all-supports", action="store_true", dest="all_supports")
    p.set_defaults(func=cmd_deps)

    p = sub.add_parser("analyze", help="conservative containment under a role monitor")
    p.add_argument("policy")
    p.add_argument("constraints")
    p.add_argument("monitor")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("monitor", help="replay a change log and stream warnings")
    p.add_argument("policy")
    p.add_argument("constraints")
    p.add_argument("changelog")
    p.add_argument("monitor", nargs="?", default=None)
    p.add_argument("--credential-support", action="store_true", dest="credential_support")
    p.add_argument("--quiet-holds", action="store_true", dest="quiet_holds")
    p.set_defaults(func=cmd_monitor)
    return top


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except _InputError as exc:
        print(f"rtmon: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.format == "machine":
        text = json.dumps(report, indent=2) + "\n"
    else:
        text = _render_human(report)
    if args.out and report["command"] != "monitor":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report["exit_code"]


def main_entry() -> None:
    raise SystemExit(main())
