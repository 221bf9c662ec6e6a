"""Immutable value types for role-based trust policies.

A policy state is a finite set of statements, each populating a
principal-owned role either directly (simple membership) or by delegation
(role inclusion, linked roles, intersections).  Containment constraints,
role monitors, and change events round out the vocabulary shared by every
other module.  All types here compare structurally, carry no behaviour
beyond their own invariants, and are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator, Union

__all__ = [
    "RESERVED_PRINCIPAL",
    "TOP",
    "Principal",
    "RoleName",
    "Role",
    "SimpleMember",
    "SimpleInclusion",
    "LinkingInclusion",
    "IntersectionInclusion",
    "StatementBody",
    "Statement",
    "statement_principals",
    "statement_role_names",
    "PolicyState",
    "roles_of_state",
    "PrincipalSet",
    "RoleRef",
    "UnionExpr",
    "IntersectionExpr",
    "PositiveRoleExpr",
    "roles_of",
    "is_static",
    "principals_of_expr",
    "Constraint",
    "RoleMonitor",
    "ChangeKind",
    "ChangeEvent",
]

#: Name reserved for the "any principal" placeholder used by bound analysis.
RESERVED_PRINCIPAL = "TOP"


@dataclass(frozen=True, order=True)
class Principal:
    """A participant, identified by name (exact string equality).

    ``TOP`` is reserved: it stands for "any principal, including ones not
    seen yet" in analysis output and may never occur inside a policy,
    constraint, or monitor.
    """

    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("principal name must be non-empty")

    @property
    def is_reserved(self) -> bool:
        return self.name == RESERVED_PRINCIPAL

    def __str__(self) -> str:
        return self.name


#: The reserved "any principal" marker.  Appears only in analysis results.
TOP = Principal(RESERVED_PRINCIPAL)


@dataclass(frozen=True, order=True)
class RoleName:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("role name must be non-empty")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Role:
    """A named set of principals administered by its owner, written ``A.r``."""

    owner: Principal
    name: RoleName

    def __str__(self) -> str:
        return f"{self.owner.name}.{self.name.name}"


@dataclass(frozen=True)
class SimpleMember:
    """Body of ``A.r <- D``: the principal D is a member outright."""

    member: Principal

    def __str__(self) -> str:
        return self.member.name


@dataclass(frozen=True)
class SimpleInclusion:
    """Body of ``A.r <- B.r1``: every member of B.r1 is a member of A.r."""

    source: Role

    def __str__(self) -> str:
        return str(self.source)


@dataclass(frozen=True)
class LinkingInclusion:
    """Body of ``A.r <- A.r1.r2``: members of Y.r2 for every Y in A.r1.

    The first component must be a role owned by the statement head's
    owner; ``Statement`` enforces that when the body is attached.
    """

    first: Role
    second: RoleName

    def __str__(self) -> str:
        return f"{self.first}.{self.second.name}"


@dataclass(frozen=True, eq=False)
class IntersectionInclusion:
    """Body of ``A.r <- B1.r1 & ... & Bn.rn``: members common to every part.

    Parts keep their written order for display, but two intersections
    compare equal when they name the same set of roles (duplicates are
    ignored by comparison).
    """

    parts: tuple[Role, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise ValueError("intersection inclusion needs at least two roles")

    @property
    def part_set(self) -> frozenset[Role]:
        return frozenset(self.parts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntersectionInclusion):
            return NotImplemented
        return self.part_set == other.part_set

    def __hash__(self) -> int:
        return hash(self.part_set)

    def __str__(self) -> str:
        return " & ".join(str(p) for p in self.parts)


StatementBody = Union[SimpleMember, SimpleInclusion, LinkingInclusion, IntersectionInclusion]


@dataclass(frozen=True)
class Statement:
    """One policy statement ``head <- body``; a value object."""

    head: Role
    body: StatementBody

    def __post_init__(self) -> None:
        if isinstance(self.body, LinkingInclusion) and self.body.first.owner != self.head.owner:
            raise ValueError(
                f"linked role {self.body} must start from a role owned by {self.head.owner.name}"
            )

    def __str__(self) -> str:
        return f"{self.head} <- {self.body}"


def statement_principals(stmt: Statement) -> frozenset[Principal]:
    """Every principal occurring in the statement (head owner included)."""
    found = {stmt.head.owner}
    body = stmt.body
    if isinstance(body, SimpleMember):
        found.add(body.member)
    elif isinstance(body, SimpleInclusion):
        found.add(body.source.owner)
    elif isinstance(body, LinkingInclusion):
        found.add(body.first.owner)
    else:
        found.update(part.owner for part in body.parts)
    return frozenset(found)


def statement_role_names(stmt: Statement) -> frozenset[RoleName]:
    """Every role name occurring in the statement (head name included)."""
    found = {stmt.head.name}
    body = stmt.body
    if isinstance(body, SimpleInclusion):
        found.add(body.source.name)
    elif isinstance(body, LinkingInclusion):
        found.add(body.first.name)
        found.add(body.second)
    elif isinstance(body, IntersectionInclusion):
        found.update(part.name for part in body.parts)
    return frozenset(found)


@dataclass(frozen=True)
class PolicyState:
    """A finite set of statements; all role semantics derive from it.

    Adding a present statement or removing an absent one yields the state
    unchanged (callers that care can compare identities).
    """

    statements: frozenset[Statement] = frozenset()

    def __post_init__(self) -> None:
        stmts = frozenset(self.statements)
        object.__setattr__(self, "statements", stmts)
        for stmt in stmts:
            if any(p.is_reserved for p in statement_principals(stmt)):
                raise ValueError(
                    f"reserved principal {RESERVED_PRINCIPAL} cannot occur in a policy: {stmt}"
                )

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.statements)

    def __len__(self) -> int:
        return len(self.statements)

    def __contains__(self, stmt: object) -> bool:
        return stmt in self.statements

    def add(self, stmt: Statement) -> "PolicyState":
        if stmt in self.statements:
            return self
        return PolicyState(self.statements | {stmt})

    def remove(self, stmt: Statement) -> "PolicyState":
        if stmt not in self.statements:
            return self
        return PolicyState(self.statements - {stmt})

    def definition(self, role: Role) -> frozenset[Statement]:
        """The statements whose head is ``role``."""
        return frozenset(s for s in self.statements if s.head == role)

    @cached_property
    def principals(self) -> frozenset[Principal]:
        out: set[Principal] = set()
        for stmt in self.statements:
            out |= statement_principals(stmt)
        return frozenset(out)

    @cached_property
    def role_names(self) -> frozenset[RoleName]:
        out: set[RoleName] = set()
        for stmt in self.statements:
            out |= statement_role_names(stmt)
        return frozenset(out)

    @cached_property
    def roles(self) -> frozenset[Role]:
        """Cross product of the state's principals and role names.

        Roles in here may have empty definitions; consumers must treat an
        undefined role as having no statements (never as an error).
        """
        return frozenset(
            Role(owner, name) for owner in self.principals for name in self.role_names
        )


def roles_of_state(p: PolicyState) -> frozenset[Role]:
    """All roles formable from the state's principals and role names."""
    return p.roles


@dataclass(frozen=True)
class PrincipalSet:
    """A literal set of principals; evaluates to itself in any state."""

    members: frozenset[Principal]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))

    def __str__(self) -> str:
        inner = ", ".join(sorted(p.name for p in self.members))
        return "{" + inner + "}"


@dataclass(frozen=True)
class RoleRef:
    role: Role

    def __str__(self) -> str:
        return str(self.role)


@dataclass(frozen=True)
class UnionExpr:
    left: "PositiveRoleExpr"
    right: "PositiveRoleExpr"


@dataclass(frozen=True)
class IntersectionExpr:
    left: "PositiveRoleExpr"
    right: "PositiveRoleExpr"


PositiveRoleExpr = Union[PrincipalSet, RoleRef, UnionExpr, IntersectionExpr]


def roles_of(expr: PositiveRoleExpr) -> frozenset[Role]:
    """The finite set of roles occurring in the expression."""
    if isinstance(expr, PrincipalSet):
        return frozenset()
    if isinstance(expr, RoleRef):
        return frozenset((expr.role,))
    return roles_of(expr.left) | roles_of(expr.right)


def is_static(expr: PositiveRoleExpr) -> bool:
    """True when the expression mentions no roles (principal sets only)."""
    return not roles_of(expr)


def principals_of_expr(expr: PositiveRoleExpr) -> frozenset[Principal]:
    """Every principal occurring in the expression, role owners included."""
    if isinstance(expr, PrincipalSet):
        return expr.members
    if isinstance(expr, RoleRef):
        return frozenset((expr.role.owner,))
    return principals_of_expr(expr.left) | principals_of_expr(expr.right)


@dataclass(frozen=True)
class Constraint:
    """Containment requirement ``lhs <= rhs`` registered by ``owner``."""

    owner: Principal
    lhs: PositiveRoleExpr
    rhs: PositiveRoleExpr
    id: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("constraint id must be non-empty")
        mentioned = (
            {self.owner} | principals_of_expr(self.lhs) | principals_of_expr(self.rhs)
        )
        if any(p.is_reserved for p in mentioned):
            raise ValueError(
                f"reserved principal {RESERVED_PRINCIPAL} cannot occur in a constraint"
            )


@dataclass(frozen=True)
class RoleMonitor:
    """Trust declaration: which roles report growth, which report shrinkage.

    ``growth_all`` / ``shrink_all`` record a symbolic "every role" wildcard;
    ``bind`` expands the wildcard against a concrete policy state.  The two
    sets may overlap and either may be empty.
    """

    growth_trusted: frozenset[Role] = frozenset()
    shrink_trusted: frozenset[Role] = frozenset()
    growth_all: bool = False
    shrink_all: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "growth_trusted", frozenset(self.growth_trusted))
        object.__setattr__(self, "shrink_trusted", frozenset(self.shrink_trusted))
        for role in self.growth_trusted | self.shrink_trusted:
            if role.owner.is_reserved:
                raise ValueError(
                    f"reserved principal {RESERVED_PRINCIPAL} cannot own a monitored role"
                )

    @property
    def is_bound(self) -> bool:
        return not (self.growth_all or self.shrink_all)

    def bind(self, state: PolicyState) -> "RoleMonitor":
        """Expand wildcards against the state's roles; identity when bound."""
        if self.is_bound:
            return self
        return RoleMonitor(
            growth_trusted=state.roles if self.growth_all else self.growth_trusted,
            shrink_trusted=state.roles if self.shrink_all else self.shrink_trusted,
        )


class ChangeKind(Enum):
    ADD = "add"
    REMOVE = "remove"


@dataclass(frozen=True)
class ChangeEvent:
    """One discrete policy change: a statement added or removed."""

    kind: ChangeKind
    statement: Statement

    def __str__(self) -> str:
        sign = "+" if self.kind is ChangeKind.ADD else "-"
        return f"{sign} {self.statement}"
