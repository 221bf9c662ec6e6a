"""Shared builders and canonical scenario states used across the suite."""

from rtmon.model import Principal, Role, RoleName
from rtmon.parser import parse_constraint, parse_policy, parse_statement

# Emergency-response scenario: a tightly-held database role, a personnel
# role built from an intersection, and a linked role walking over the
# departments.  The two extra statements turn the containment constraint
# from satisfied to violated.
HAZMAT_POLICY_TEXT = """\
ATF.hazmatDB <- Rollins
Emergency.hazmatPersonnel <- Emergency.responsePersonnel & ATF.hazmatTraining
Emergency.responsePersonnel <- Emergency.dept.responsePersonnel
Emergency.dept <- Fire
Emergency.dept <- Police
ATF.hazmatTraining <- Rollins
ATF.hazmatTraining <- Burke
ATF.hazmatTraining <- OConnel
"""
HAZMAT_ADD_9 = "Police.responsePersonnel <- Rollins"
HAZMAT_ADD_10 = "Police.responsePersonnel <- Burke"
HAZMAT_CONSTRAINT_TEXT = (
    "constraint c1 owner Emergency: "
    "Emergency.hazmatPersonnel <= ATF.hazmatDB"
)

# A self-referencing linked role: growth of A.r cascades through the chain
# B.r, C.r, D.r but never touches E.r.
SELF_LINK_POLICY_TEXT = """\
A.r <- A.r.r
A.r <- B
B.r <- C
C.r <- D.r
E.r <- F
"""

# F is provable through two independent inclusion chains, so its minimal
# support is not unique.
REDUNDANT_SUPPORT_POLICY_TEXT = """\
A.r <- B.r
A.r <- C.r
B.r <- F
C.r <- F
"""

# Adding A.r <- F keeps A.r <= B.r satisfied but forces the support to
# pick up D.r, the only chain proving F's membership in B.r.
SUPPORT_SHIFT_POLICY_TEXT = """\
A.r <- E
B.r <- C.r
B.r <- D.r
C.r <- E
D.r <- F
"""
SUPPORT_SHIFT_CONSTRAINT_TEXT = "constraint cs owner A: A.r <= B.r"


def role(text: str) -> Role:
    owner, name = text.split(".")
    return Role(Principal(owner), RoleName(name))


def prin(name: str) -> Principal:
    return Principal(name)


def stmt(text: str):
    return parse_statement(text)


def hazmat_policy():
    return parse_policy(HAZMAT_POLICY_TEXT)


def hazmat_policy_extended():
    return parse_policy(HAZMAT_POLICY_TEXT + HAZMAT_ADD_9 + "\n" + HAZMAT_ADD_10 + "\n")


def hazmat_constraint():
    return parse_constraint(HAZMAT_CONSTRAINT_TEXT)


def self_link_policy():
    return parse_policy(SELF_LINK_POLICY_TEXT)


def redundant_support_policy():
    return parse_policy(REDUNDANT_SUPPORT_POLICY_TEXT)


def support_shift_policy():
    return parse_policy(SUPPORT_SHIFT_POLICY_TEXT)


def support_shift_constraint():
    return parse_constraint(SUPPORT_SHIFT_CONSTRAINT_TEXT)


def names(principals) -> set[str]:
    return {p.name for p in principals}


def role_strs(roles) -> set[str]:
    return {str(r) for r in roles}
