"""Dependency analysis for constraint monitoring under full cooperation.

Two dual questions drive the monitor.  Growth sets answer "which role
definitions, if extended, could enlarge this membership" -- the add-side
frontier.  Supports answer "which roles (or which exact statements)
currently prove the memberships the constraint needs" -- the remove-side
frontier.  The worklist here computes, per role and member, all minimal
supports simultaneously, pruning dominated entries as it goes; a
configurable cap keeps the entry count per (role, member) from blowing up
on pathological states at the cost of possibly keeping non-minimal (but
still valid) supports.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional, Union

from .engine import evaluate
from .model import (
    IntersectionInclusion,
    LinkingInclusion,
    PolicyState,
    PositiveRoleExpr,
    Principal,
    PrincipalSet,
    Role,
    RoleRef,
    SimpleInclusion,
    SimpleMember,
    Statement,
    UnionExpr,
    roles_of,
)

__all__ = [
    "DEFAULT_SUPPORT_CAP",
    "GrowthSet",
    "RoleSupport",
    "CredentialSupport",
    "JustifiedEntry",
    "JustifiedSemantics",
    "NoSupport",
    "restrict",
    "gamma",
    "gamma_expr",
    "justified_semantics",
    "minimal_supports",
    "support_for_constraint",
    "credential_support_for_constraint",
]

#: Per-(role, member) cap on retained support entries.
DEFAULT_SUPPORT_CAP = 8


@dataclass(frozen=True)
class GrowthSet:
    """Roles whose new statements could enlarge the target's membership."""

    target: Union[Role, PositiveRoleExpr]
    roles: frozenset[Role]

    def __contains__(self, role: object) -> bool:
        return role in self.roles

    def __iter__(self) -> Iterator[Role]:
        return iter(self.roles)


@dataclass(frozen=True)
class RoleSupport:
    """A set of roles whose statements alone prove the needed memberships."""

    roles: frozenset[Role]

    def __contains__(self, role: object) -> bool:
        return role in self.roles

    def __iter__(self) -> Iterator[Role]:
        return iter(self.roles)


@dataclass(frozen=True)
class CredentialSupport:
    """A set of statements that alone prove the needed memberships."""

    statements: frozenset[Statement]

    def __contains__(self, stmt: object) -> bool:
        return stmt in self.statements

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.statements)


@dataclass(frozen=True)
class JustifiedEntry:
    """One membership justification: ``member`` is provable from the
    statements of the roles in ``support`` alone.  ``size_index`` counts
    derivation steps and is diagnostic only."""

    member: Principal
    support: frozenset[Role]
    size_index: int


@dataclass(frozen=True)
class JustifiedSemantics:
    """Per-role minimal supports; ``truncated`` is set when the entry cap
    dropped candidates somewhere (kept entries are then still valid
    supports but minimality is no longer guaranteed)."""

    entries: Mapping[Role, frozenset[JustifiedEntry]]
    truncated: bool = False

    def for_role(self, role: Role) -> frozenset[JustifiedEntry]:
        return self.entries.get(role, frozenset())


class NoSupport(Exception):
    """No (admissible) support proves the member's required membership."""

    def __init__(self, member: Principal):
        super().__init__(f"no admissible support for member {member.name}")
        self.member = member


def restrict(p: PolicyState, sigma: Iterable[Role]) -> PolicyState:
    """Keep exactly the statements whose head lies in ``sigma``."""
    wanted = frozenset(sigma)
    return PolicyState(frozenset(s for s in p.statements if s.head in wanted))


def _by_head(p: PolicyState) -> dict[Role, list[Statement]]:
    grouped: dict[Role, list[Statement]] = defaultdict(list)
    for stmt in sorted(p.statements, key=str):
        grouped[stmt.head].append(stmt)
    return grouped


def gamma(p: PolicyState, target: Role) -> GrowthSet:
    """Close ``{target}`` under the definitions reachable from it.

    Simple and intersection inclusions pull in the roles they read; a
    linked role pulls in its first component plus ``X.r2`` for every
    current member X of that component.
    """
    idx = evaluate(p)
    grouped = _by_head(p)
    found: set[Role] = {target}
    work = [target]
    while work:
        role = work.pop()
        for stmt in grouped.get(role, ()):
            body = stmt.body
            if isinstance(body, SimpleInclusion):
                fresh = [body.source]
            elif isinstance(body, LinkingInclusion):
                fresh = [body.first]
                fresh.extend(
                    Role(x, body.second)
                    for x in idx.members.get(body.first, frozenset())
                )
            elif isinstance(body, IntersectionInclusion):
                fresh = list(body.parts)
            else:
                continue
            for r in fresh:
                if r not in found:
                    found.add(r)
                    work.append(r)
    return GrowthSet(target, frozenset(found))


def gamma_expr(p: PolicyState, expr: PositiveRoleExpr) -> GrowthSet:
    """Union of the growth sets of the expression's roles; empty when static."""
    found: set[Role] = set()
    for role in roles_of(expr):
        found |= gamma(p, role).roles
    return GrowthSet(expr, frozenset(found))


# A worklist triple: (member, support tokens, derivation size).
_Triple = tuple[Principal, frozenset, int]


def _triple_sort_key(t: _Triple):
    return (len(t[1]), sorted(str(x) for x in t[1]), t[2])


def _worklist(
    p: PolicyState,
    token: Callable[[Statement], Hashable],
    cap: Optional[int],
) -> tuple[dict[Role, set[_Triple]], bool]:
    """Saturate per-role justification triples, with subsumption pruning.

    A candidate is dropped when an existing entry for the same member has a
    subset support; inserting a candidate evicts the entries it dominates.
    ``token(stmt)`` is what a fired statement contributes to a support (its
    head role, or the statement itself).  When ``cap`` is hit for one
    (role, member), the smallest supports are kept and the run is flagged.
    """
    stmts = sorted(p.statements, key=str)
    cur: dict[Role, set[_Triple]] = defaultdict(set)
    truncated = False

    def subsumed(role: Role, member: Principal, support: frozenset) -> bool:
        return any(m == member and s <= support for m, s, _ in cur[role])

    def insert(role: Role, cand: _Triple) -> None:
        nonlocal truncated
        member, support, _ = cand
        bucket = cur[role]
        dominated = [t for t in bucket if t[0] == member and support <= t[1]]
        bucket.difference_update(dominated)
        bucket.add(cand)
        if cap is not None:
            mine = sorted((t for t in bucket if t[0] == member), key=_triple_sort_key)
            if len(mine) > cap:
                bucket.difference_update(mine[cap:])
                truncated = True

    while True:
        old = {role: frozenset(bucket) for role, bucket in cur.items()}
        for stmt in stmts:
            head, body, tok = stmt.head, stmt.body, token(stmt)
            if isinstance(body, SimpleMember):
                insert(head, (body.member, frozenset((tok,)), 1))
            elif isinstance(body, SimpleInclusion):
                for member, sup, i in list(cur[body.source]):
                    cand = (member, sup | {tok}, i + 1)
                    if not subsumed(head, cand[0], cand[1]):
                        insert(head, cand)
            elif isinstance(body, LinkingInclusion):
                for via, sup1, i1 in list(cur[body.first]):
                    for member, sup2, i2 in list(cur[Role(via, body.second)]):
                        cand = (member, sup1 | sup2 | {tok}, i1 + i2)
                        if not subsumed(head, cand[0], cand[1]):
                            insert(head, cand)
            else:
                parts = sorted(body.part_set, key=str)
                buckets = [list(cur[part]) for part in parts]
                shared = set.intersection(*(set(t[0] for t in b) for b in buckets))
                for member in shared:
                    pools = [[t for t in b if t[0] == member] for b in buckets]
                    for combo in product(*pools):
                        support = frozenset((tok,)).union(*(t[1] for t in combo))
                        cand = (member, support, sum(t[2] for t in combo))
                        if not subsumed(head, cand[0], cand[1]):
                            insert(head, cand)
        if all(frozenset(cur[role]) == old.get(role, frozenset()) for role in cur):
            break
    return dict(cur), truncated


def justified_semantics(
    p: PolicyState, *, max_entries_per_member: Optional[int] = DEFAULT_SUPPORT_CAP
) -> JustifiedSemantics:
    """All minimal role-supports, per role and member, in one pass."""
    raw, truncated = _worklist(p, token=lambda s: s.head, cap=max_entries_per_member)
    entries = {
        role: frozenset(JustifiedEntry(m, sup, i) for m, sup, i in bucket)
        for role, bucket in raw.items()
        if bucket
    }
    return JustifiedSemantics(entries, truncated)


def minimal_supports(
    p: PolicyState,
    member: Principal,
    target: Role,
    *,
    max_entries_per_member: Optional[int] = DEFAULT_SUPPORT_CAP,
) -> frozenset[RoleSupport]:
    """Minimal supports of ``member`` in ``target``; empty iff not a member."""
    js = justified_semantics(p, max_entries_per_member=max_entries_per_member)
    return frozenset(
        RoleSupport(e.support) for e in js.for_role(target) if e.member == member
    )


def _best(candidates: list[frozenset]) -> frozenset:
    """Deterministic pick: smallest support, ties lexicographic."""
    return min(candidates, key=lambda s: (len(s), sorted(str(x) for x in s)))


def _member_expr_support(
    member: Principal,
    expr: PositiveRoleExpr,
    supports_of: Callable[[Role, Principal], list[frozenset]],
) -> Optional[frozenset]:
    """One support witnessing ``member``'s membership in ``expr``.

    Principal sets need no support; a union takes whichever branch admits
    the member (preferring the smaller support); an intersection unions
    the supports of both branches.  ``None`` means not witnessable.
    """
    if isinstance(expr, PrincipalSet):
        return frozenset() if member in expr.members else None
    if isinstance(expr, RoleRef):
        candidates = supports_of(expr.role, member)
        return _best(candidates) if candidates else None
    if isinstance(expr, UnionExpr):
        branches = [
            got
            for got in (
                _member_expr_support(member, expr.left, supports_of),
                _member_expr_support(member, expr.right, supports_of),
            )
            if got is not None
        ]
        return _best(branches) if branches else None
    left = _member_expr_support(member, expr.left, supports_of)
    right = _member_expr_support(member, expr.right, supports_of)
    if left is None or right is None:
        return None
    return left | right


def support_for_constraint(
    p: PolicyState,
    members: Iterable[Principal],
    rhs: PositiveRoleExpr,
    admissible: Optional[Iterable[Role]] = None,
    *,
    max_entries_per_member: Optional[int] = DEFAULT_SUPPORT_CAP,
) -> RoleSupport:
    """One role support proving every member's membership in ``rhs``.

    With ``admissible`` given, only supports inside it qualify (achieved by
    running the worklist on the state restricted to admissible heads, which
    yields exactly the supports contained in ``admissible``).  Raises
    :class:`NoSupport` when some member has no qualifying support.
    """
    base = restrict(p, admissible) if admissible is not None else p
    js = justified_semantics(base, max_entries_per_member=max_entries_per_member)

    def supports_of(role: Role, member: Principal) -> list[frozenset]:
        return [e.support for e in js.for_role(role) if e.member == member]

    total: set[Role] = set()
    for member in sorted(set(members), key=str):
        got = _member_expr_support(member, rhs, supports_of)
        if got is None:
            raise NoSupport(member)
        total |= got
    return RoleSupport(frozenset(total))


def credential_support_for_constraint(
    p: PolicyState,
    members: Iterable[Principal],
    rhs: PositiveRoleExpr,
    *,
    max_entries_per_member: Optional[int] = DEFAULT_SUPPORT_CAP,
) -> CredentialSupport:
    """Statement-level support: the statements one derivation actually uses.

    Per member, the role support is chosen exactly as in
    :func:`support_for_constraint`; the statements are then collected by
    re-running the worklist over the state restricted to that role support,
    so every collected statement's head lies inside the role support.
    """
    js = justified_semantics(p, max_entries_per_member=max_entries_per_member)

    def role_supports_of(role: Role, member: Principal) -> list[frozenset]:
        return [e.support for e in js.for_role(role) if e.member == member]

    total: set[Statement] = set()
    for member in sorted(set(members), key=str):
        role_support = _member_expr_support(member, rhs, role_supports_of)
        if role_support is None:
            raise NoSupport(member)
        replay, _ = _worklist(
            restrict(p, role_support), token=lambda s: s, cap=max_entries_per_member
        )

        def cred_supports_of(role: Role, who: Principal) -> list[frozenset]:
            return [sup for m, sup, _ in replay.get(role, ()) if m == who]

        got = _member_expr_support(member, rhs, cred_supports_of)
        if got is None:  # role support witnesses membership, so replay must too
            raise NoSupport(member)
        total |= got
    return CredentialSupport(frozenset(total))
