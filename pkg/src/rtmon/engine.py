"""Bottom-up fixpoint evaluation of policy states and constraint checking.

Membership is the least model of the clauses induced by the four statement
forms.  The evaluator iterates in rounds, refiring a rule only when one of
the roles it reads changed in the previous round, so it reaches the
fixpoint without recomputing quiescent rules.  Results are independent of
statement order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .model import (
    Constraint,
    IntersectionExpr,
    IntersectionInclusion,
    LinkingInclusion,
    PolicyState,
    PositiveRoleExpr,
    Principal,
    PrincipalSet,
    Role,
    RoleName,
    RoleRef,
    SimpleInclusion,
    SimpleMember,
    Statement,
    UnionExpr,
)

__all__ = [
    "MembershipAtom",
    "SemanticsIndex",
    "evaluate",
    "role_members",
    "eval_expr",
    "ConstraintCheck",
    "check_constraint",
]


@dataclass(frozen=True)
class MembershipAtom:
    """Ground membership fact: ``member`` belongs to ``owner.role_name``."""

    owner: Principal
    role_name: RoleName
    member: Principal


@dataclass(frozen=True)
class SemanticsIndex:
    """Role membership for one state; one entry per role of the state.

    Roles of the state with empty definitions map to the empty set.
    ``iteration_count`` is the number of rule passes the evaluator ran,
    kept for diagnostics only.
    """

    members: Mapping[Role, frozenset[Principal]]
    iteration_count: int = 0

    def atoms(self) -> Iterator[MembershipAtom]:
        for role in sorted(self.members, key=str):
            for member in sorted(self.members[role], key=str):
                yield MembershipAtom(role.owner, role.name, member)


def _rule_inputs(stmt: Statement, members: dict[Role, set[Principal]]) -> set[Role]:
    """The roles a rule currently reads; a rule refires when one changed."""
    body = stmt.body
    if isinstance(body, SimpleInclusion):
        return {body.source}
    if isinstance(body, LinkingInclusion):
        reads = {body.first}
        reads.update(Role(y, body.second) for y in members[body.first])
        return reads
    assert isinstance(body, IntersectionInclusion)
    return set(body.parts)


def _derive(stmt: Statement, members: dict[Role, set[Principal]]) -> set[Principal]:
    body = stmt.body
    if isinstance(body, SimpleInclusion):
        return set(members[body.source])
    if isinstance(body, LinkingInclusion):
        out: set[Principal] = set()
        for y in members[body.first]:
            out |= members[Role(y, body.second)]
        return out
    assert isinstance(body, IntersectionInclusion)
    parts = body.parts
    out = set(members[parts[0]])
    for part in parts[1:]:
        out &= members[part]
    return out


def evaluate(p: PolicyState) -> SemanticsIndex:
    """Compute role membership for every role of the state."""
    members: dict[Role, set[Principal]] = {role: set() for role in p.roles}
    rules: list[Statement] = []
    for stmt in sorted(p.statements, key=str):
        if isinstance(stmt.body, SimpleMember):
            members[stmt.head].add(stmt.body.member)
        else:
            rules.append(stmt)

    iterations = 0
    dirty: set[Role] = set(members) if rules else set()
    while dirty:
        iterations += 1
        next_dirty: set[Role] = set()
        for stmt in rules:
            if not (_rule_inputs(stmt, members) & dirty):
                continue
            fresh = _derive(stmt, members) - members[stmt.head]
            if fresh:
                members[stmt.head] |= fresh
                next_dirty.add(stmt.head)
        dirty = next_dirty

    return SemanticsIndex(
        {role: frozenset(found) for role, found in members.items()}, iterations
    )


def role_members(idx: SemanticsIndex, role: Role) -> frozenset[Principal]:
    """Members of ``role``; empty for roles absent from the index."""
    return idx.members.get(role, frozenset())


def eval_expr(idx: SemanticsIndex, expr: PositiveRoleExpr) -> frozenset[Principal]:
    """Evaluate a positive role expression against an index."""
    if isinstance(expr, PrincipalSet):
        return expr.members
    if isinstance(expr, RoleRef):
        return role_members(idx, expr.role)
    if isinstance(expr, UnionExpr):
        return eval_expr(idx, expr.left) | eval_expr(idx, expr.right)
    if isinstance(expr, IntersectionExpr):
        return eval_expr(idx, expr.left) & eval_expr(idx, expr.right)
    raise TypeError(f"unknown expression node: {expr!r}")


@dataclass(frozen=True)
class ConstraintCheck:
    satisfied: bool
    violators: frozenset[Principal]


def check_constraint(p: PolicyState, q: Constraint) -> ConstraintCheck:
    """Does ``p`` satisfy ``q``?  Violators are lhs members missing from rhs."""
    idx = evaluate(p)
    lhs = eval_expr(idx, q.lhs)
    rhs = eval_expr(idx, q.rhs)
    violators = lhs - rhs
    return ConstraintCheck(satisfied=not violators, violators=frozenset(violators))
