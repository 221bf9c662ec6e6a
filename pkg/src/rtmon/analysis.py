"""Conservative analysis when only some roles report their changes.

A role monitor splits the world into roles whose growth is observable and
roles whose shrinkage is observable.  Everything else may drift silently,
so exact membership is replaced by a pair of bounds: the lower bound is
what survives any unobserved shrinkage (only shrink-trusted definitions
count), the upper bound is what any unobserved growth could produce (roles
outside the growth-trusted set are assumed to contain everyone, including
the reserved ``TOP`` principal standing for principals not seen yet).

The trusted core strips from the growth-trusted set those roles whose
upper bound is forced to the full universe by an untrusted dependency;
restricted growth sets then stay inside the core, giving the monitor an
add-side frontier it can actually observe.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

from .deps import restrict
from .engine import evaluate
from .model import (
    Constraint,
    IntersectionInclusion,
    LinkingInclusion,
    PolicyState,
    PositiveRoleExpr,
    Principal,
    PrincipalSet,
    Role,
    RoleMonitor,
    RoleRef,
    SimpleInclusion,
    SimpleMember,
    TOP,
    UnionExpr,
    roles_of,
)

__all__ = [
    "BoundIndex",
    "CoreSet",
    "RestrictedGrowthSet",
    "BoundedCheck",
    "lower_bound",
    "upper_bound",
    "bounds",
    "eval_lower",
    "eval_upper",
    "core",
    "gamma_restricted",
    "gamma_restricted_expr",
    "check_bounded_containment",
]


@dataclass(frozen=True)
class BoundIndex:
    """Lower/upper membership bounds for every role of one state.

    Roles absent from the maps fall back to the bounds their trust status
    dictates: empty below, and above either empty (growth-trusted, so no
    unobserved statements can appear) or the full universe.
    """

    lower: Mapping[Role, frozenset[Principal]]
    upper: Mapping[Role, frozenset[Principal]]
    universe: frozenset[Principal]
    monitor: RoleMonitor

    def lower_of(self, role: Role) -> frozenset[Principal]:
        return self.lower.get(role, frozenset())

    def upper_of(self, role: Role) -> frozenset[Principal]:
        if role.owner == TOP:
            return self.universe
        got = self.upper.get(role)
        if got is not None:
            return got
        return frozenset() if role in self.monitor.growth_trusted else self.universe


@dataclass(frozen=True)
class CoreSet:
    """Growth-trusted roles not undermined by untrusted dependencies."""

    roles: frozenset[Role]

    def __contains__(self, role: object) -> bool:
        return role in self.roles

    def __iter__(self) -> Iterator[Role]:
        return iter(self.roles)


@dataclass(frozen=True)
class RestrictedGrowthSet:
    """Growth frontier limited to roles inside the trusted core."""

    target: Union[Role, PositiveRoleExpr]
    roles: frozenset[Role]

    def __contains__(self, role: object) -> bool:
        return role in self.roles

    def __iter__(self) -> Iterator[Role]:
        return iter(self.roles)


def lower_bound(p: PolicyState, r: RoleMonitor) -> dict[Role, frozenset[Principal]]:
    """Membership provable from shrink-trusted definitions alone.

    Statements heading an untrusted role may vanish unobserved, so only the
    restriction of the state to shrink-trusted heads counts; roles outside
    the shrink-trusted set therefore bound to the empty set.
    """
    m = r.bind(p)
    idx = evaluate(restrict(p, m.shrink_trusted))
    return {role: idx.members.get(role, frozenset()) for role in p.roles}


def upper_bound(p: PolicyState, r: RoleMonitor) -> dict[Role, frozenset[Principal]]:
    """Largest membership reachable through unobserved additions.

    Roles outside the growth-trusted set seed with the full universe
    (current principals plus ``TOP``); every role of the form ``TOP.x``
    implicitly holds the universe as well, which matters when a linked
    role walks through an untrusted first component.
    """
    m = r.bind(p)
    universe = frozenset(p.principals) | {TOP}
    members: dict[Role, set[Principal]] = {
        role: set(universe) if role not in m.growth_trusted else set()
        for role in p.roles
    }
    rules = []
    for stmt in sorted(p.statements, key=str):
        if isinstance(stmt.body, SimpleMember):
            members[stmt.head].add(stmt.body.member)
        else:
            rules.append(stmt)

    def derive(stmt) -> set[Principal]:
        body = stmt.body
        if isinstance(body, SimpleInclusion):
            return set(members[body.source])
        if isinstance(body, LinkingInclusion):
            out: set[Principal] = set()
            for y in members[body.first]:
                if y == TOP:
                    out |= universe
                else:
                    out |= members[Role(y, body.second)]
            return out
        parts = body.parts
        out = set(members[parts[0]])
        for part in parts[1:]:
            out &= members[part]
        return out

    changed = True
    while changed:
        changed = False
        for stmt in rules:
            fresh = derive(stmt) - members[stmt.head]
            if fresh:
                members[stmt.head] |= fresh
                changed = True
    return {role: frozenset(found) for role, found in members.items()}


def bounds(p: PolicyState, r: RoleMonitor) -> BoundIndex:
    """Both bounds for one state under one monitor."""
    m = r.bind(p)
    return BoundIndex(
        lower=lower_bound(p, m),
        upper=upper_bound(p, m),
        universe=frozenset(p.principals) | {TOP},
        monitor=m,
    )


def eval_lower(idx: BoundIndex, expr: PositiveRoleExpr) -> frozenset[Principal]:
    if isinstance(expr, PrincipalSet):
        return expr.members
    if isinstance(expr, RoleRef):
        return idx.lower_of(expr.role)
    if isinstance(expr, UnionExpr):
        return eval_lower(idx, expr.left) | eval_lower(idx, expr.right)
    return eval_lower(idx, expr.left) & eval_lower(idx, expr.right)


def eval_upper(idx: BoundIndex, expr: PositiveRoleExpr) -> frozenset[Principal]:
    if isinstance(expr, PrincipalSet):
        return expr.members
    if isinstance(expr, RoleRef):
        return idx.upper_of(expr.role)
    if isinstance(expr, UnionExpr):
        return eval_upper(idx, expr.left) | eval_upper(idx, expr.right)
    return eval_upper(idx, expr.left) & eval_upper(idx, expr.right)


def core(p: PolicyState, g: Iterable[Role]) -> CoreSet:
    """The growth-trusted roles whose upper bounds stay informative.

    Computed by closing the complement: a trusted role is expelled when it
    simply includes an expelled/untrusted role, when its linked role walks
    from one, when the walk can land on one (judged against the upper bound
    of the first component, where ``TOP`` always lands outside), or when
    every part of an intersection it reads is out.
    """
    g = frozenset(g)
    ub = upper_bound(p, RoleMonitor(growth_trusted=g))
    expelled: set[Role] = set(p.roles) - g

    def outside(role: Role) -> bool:
        return role.owner == TOP or role not in g or role in expelled

    changed = True
    while changed:
        changed = False
        for stmt in p:
            if outside(stmt.head):
                continue
            body = stmt.body
            if isinstance(body, SimpleInclusion):
                out = outside(body.source)
            elif isinstance(body, LinkingInclusion):
                out = outside(body.first) or any(
                    outside(Role(x, body.second)) for x in ub.get(body.first, ())
                )
            elif isinstance(body, IntersectionInclusion):
                out = all(outside(part) for part in body.parts)
            else:
                continue
            if out:
                expelled.add(stmt.head)
                changed = True
    return CoreSet(frozenset(role for role in g if role not in expelled))


def _gamma_restricted_roles(
    p: PolicyState,
    coreset: CoreSet,
    ub: Mapping[Role, frozenset[Principal]],
    target: Role,
) -> frozenset[Role]:
    if target not in coreset:
        return frozenset()
    grouped: dict[Role, list] = defaultdict(list)
    for stmt in sorted(p.statements, key=str):
        grouped[stmt.head].append(stmt)
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
                # TOP cannot occur here: it would have expelled the head
                # from the core, and growth sets never leave the core.
                fresh.extend(
                    Role(x, body.second)
                    for x in ub.get(body.first, frozenset())
                    if x != TOP
                )
            elif isinstance(body, IntersectionInclusion):
                fresh = [part for part in body.parts if part in coreset]
            else:
                continue
            for r in fresh:
                if r not in found:
                    found.add(r)
                    work.append(r)
    return frozenset(found)


def gamma_restricted(p: PolicyState, g: Iterable[Role], target: Role) -> RestrictedGrowthSet:
    """Growth frontier of ``target`` kept inside the trusted core.

    A target outside the core gets the empty set: its upper bound is the
    full universe already, so no observable addition frontier exists.
    """
    g = frozenset(g)
    coreset = core(p, g)
    ub = upper_bound(p, RoleMonitor(growth_trusted=g))
    return RestrictedGrowthSet(target, _gamma_restricted_roles(p, coreset, ub, target))


def gamma_restricted_expr(
    p: PolicyState, g: Iterable[Role], expr: PositiveRoleExpr
) -> RestrictedGrowthSet:
    """Union of restricted growth sets over the expression's roles."""
    g = frozenset(g)
    coreset = core(p, g)
    ub = upper_bound(p, RoleMonitor(growth_trusted=g))
    found: set[Role] = set()
    for role in roles_of(expr):
        found |= _gamma_restricted_roles(p, coreset, ub, role)
    return RestrictedGrowthSet(expr, frozenset(found))


@dataclass(frozen=True)
class BoundedCheck:
    """Outcome of the conservative containment test.

    When it holds, no unobserved drift of the untrusted roles can break
    the constraint; witnesses are the upper-bound members of the left side
    that the lower bound of the right side cannot cover (possibly ``TOP``).
    """

    holds: bool
    witnesses: frozenset[Principal]
    lhs_upper: frozenset[Principal]
    rhs_lower: frozenset[Principal]


def check_bounded_containment(p: PolicyState, r: RoleMonitor, q: Constraint) -> BoundedCheck:
    idx = bounds(p, r)
    lhs_upper = eval_upper(idx, q.lhs)
    rhs_lower = eval_lower(idx, q.rhs)
    witnesses = lhs_upper - rhs_lower
    return BoundedCheck(
        holds=not witnesses,
        witnesses=frozenset(witnesses),
        lhs_upper=lhs_upper,
        rhs_lower=rhs_lower,
    )
