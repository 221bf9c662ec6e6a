import random

from rtmon.analysis import (
    bounds,
    check_bounded_containment,
    core,
    eval_lower,
    eval_upper,
    gamma_restricted,
    gamma_restricted_expr,
    lower_bound,
    upper_bound,
)
from rtmon.deps import gamma, justified_semantics, restrict
from rtmon.engine import check_constraint, evaluate
from rtmon.model import (
    Constraint,
    PrincipalSet,
    RoleMonitor,
    RoleRef,
    TOP,
)
from rtmon.parser import parse_constraint, parse_policy

from helpers import (
    hazmat_constraint,
    hazmat_policy,
    prin,
    role,
    role_strs,
    self_link_policy,
)
from randgen import (
    random_monitor,
    random_state,
    random_statement_for_state,
)


def dept_excluded_monitor(p):
    return RoleMonitor(
        growth_trusted=p.roles - {role("Emergency.dept")},
        shrink_trusted=frozenset({role("ATF.hazmatDB")}),
    )


def universe_of(p):
    return frozenset(p.principals) | {TOP}


class TestLowerBound:
    def test_only_shrink_trusted_definitions_count(self):
        p = hazmat_policy()
        lb = lower_bound(p, RoleMonitor(shrink_trusted=frozenset({role("ATF.hazmatDB")})))
        assert lb[role("ATF.hazmatDB")] == frozenset({prin("Rollins")})
        for r, got in lb.items():
            if r != role("ATF.hazmatDB"):
                assert got == frozenset()

    def test_empty_shrink_set_gives_empty_bounds(self):
        p = self_link_policy()
        lb = lower_bound(p, RoleMonitor())
        assert all(v == frozenset() for v in lb.values())

    def test_full_shrink_set_gives_exact_semantics(self):
        p = self_link_policy()
        lb = lower_bound(p, RoleMonitor(shrink_all=True))
        assert lb == dict(evaluate(p).members)


class TestUpperBound:
    def test_full_growth_set_gives_exact_semantics(self):
        p = self_link_policy()
        ub = upper_bound(p, RoleMonitor(growth_all=True))
        assert ub == dict(evaluate(p).members)

    def test_untrusted_link_target_floods_to_the_universe(self):
        p = hazmat_policy()
        ub = upper_bound(p, dept_excluded_monitor(p))
        assert ub[role("Emergency.responsePersonnel")] == universe_of(p)

    def test_untrusted_role_is_the_universe(self):
        p = hazmat_policy()
        ub = upper_bound(p, dept_excluded_monitor(p))
        assert ub[role("Emergency.dept")] == universe_of(p)


class TestCore:
    def test_everything_trusted_keeps_everything(self):
        p = self_link_policy()
        got = core(p, p.roles)
        assert got.roles == p.roles

    def test_untrusted_dept_expels_the_linked_role(self):
        p = hazmat_policy()
        got = core(p, p.roles - {role("Emergency.dept")})
        assert role("Emergency.responsePersonnel") not in got
        assert role("Emergency.hazmatPersonnel") in got
        assert role("ATF.hazmatTraining") in got
        assert len(got.roles) == 33

    def test_untrusted_inclusion_source_expels_the_head(self):
        p = parse_policy("A.r <- B.r1\n")
        got = core(p, p.roles - {role("B.r1")})
        assert role("A.r") not in got


class TestGammaRestricted:
    def test_hazmat_restricted_frontier(self):
        p = hazmat_policy()
        got = gamma_restricted(
            p, p.roles - {role("Emergency.dept")}, role("Emergency.hazmatPersonnel")
        )
        assert role_strs(got.roles) == {
            "Emergency.hazmatPersonnel",
            "ATF.hazmatTraining",
        }

    def test_full_trust_collapses_to_gamma(self):
        p = self_link_policy()
        got = gamma_restricted(p, p.roles, role("A.r"))
        assert got.roles == gamma(p, role("A.r")).roles

    def test_target_outside_core_has_empty_frontier(self):
        p = parse_policy("A.r <- B.r1\n")
        got = gamma_restricted(p, p.roles - {role("B.r1")}, role("A.r"))
        assert got.roles == frozenset()


class TestBoundedContainment:
    def test_holds_with_wildcard_growth_and_database_shrink(self):
        p = hazmat_policy()
        monitor = RoleMonitor(
            growth_all=True, shrink_trusted=frozenset({role("ATF.hazmatDB")})
        ).bind(p)
        got = check_bounded_containment(p, monitor, hazmat_constraint())
        assert got.holds and got.witnesses == frozenset()

    def test_untrusted_lhs_against_empty_static_rhs(self):
        p = parse_policy("A.r <- B\n")
        q = Constraint(prin("O"), RoleRef(role("A.r")), PrincipalSet(frozenset()), "q")
        got = check_bounded_containment(p, RoleMonitor(), q)
        assert not got.holds
        assert got.witnesses == universe_of(p)

    def test_full_trust_collapses_to_exact_check(self):
        rng = random.Random(601)
        from randgen import random_constraint

        for i in range(80):
            p = random_state(rng)
            q = random_constraint(rng, p, f"q{i}")
            monitor = RoleMonitor(growth_trusted=p.roles, shrink_trusted=p.roles)
            bounded = check_bounded_containment(p, monitor, q)
            exact = check_constraint(p, q)
            assert bounded.holds == exact.satisfied

    def test_dept_excluded_monitor_cannot_promise_the_hazmat_bound(self):
        # The training role's stated members flood the left side's upper
        # bound through the untrusted dept walk, while the right side's
        # lower bound can never exceed the database's actual members.
        p = hazmat_policy()
        got = check_bounded_containment(p, dept_excluded_monitor(p), hazmat_constraint())
        assert not got.holds
        assert got.witnesses == frozenset({prin("Burke"), prin("OConnel")})


class TestBoundDefaults:
    def test_untrusted_roles_bound_to_the_extremes(self):
        rng = random.Random(602)
        for _ in range(100):
            p = random_state(rng)
            monitor = random_monitor(rng, p)
            lb = lower_bound(p, monitor)
            ub = upper_bound(p, monitor)
            for r in p.roles:
                if r not in monitor.shrink_trusted:
                    assert lb[r] == frozenset()
                if r not in monitor.growth_trusted:
                    assert ub[r] == universe_of(p)


class TestBoundSandwich:
    def test_lower_exact_upper(self):
        rng = random.Random(603)
        for _ in range(100):
            p = random_state(rng)
            monitor = random_monitor(rng, p)
            exact = evaluate(p).members
            lb = lower_bound(p, monitor)
            ub = upper_bound(p, monitor)
            for r in p.roles:
                got = exact.get(r, frozenset())
                assert lb[r] <= got
                assert got <= ub[r] - {TOP}


class TestNonCoreUpperBounds:
    def test_outside_the_core_means_maximal_upper_bound(self):
        rng = random.Random(604)
        for _ in range(100):
            p = random_state(rng)
            g = random_monitor(rng, p).growth_trusted
            ub = upper_bound(p, RoleMonitor(growth_trusted=g))
            coreset = core(p, g)
            for r in p.roles:
                if r not in coreset.roles:
                    assert ub[r] == universe_of(p)

    def test_core_is_sandwiched(self):
        rng = random.Random(605)
        for _ in range(60):
            p = random_state(rng)
            g = random_monitor(rng, p).growth_trusted
            coreset = core(p, g)
            assert coreset.roles <= g
            target = rng.choice(sorted(p.roles, key=str))
            gg = gamma_restricted(p, g, target)
            assert gg.roles <= coreset.roles


class TestRestrictedGrowthStability:
    def test_addition_outside_the_restricted_frontier(self):
        rng = random.Random(606)
        done = 0
        while done < 120:
            p = random_state(rng)
            g = random_monitor(rng, p, g_density=0.85).growth_trusted
            ub = upper_bound(p, RoleMonitor(growth_trusted=g))
            targets = [r for r in sorted(p.roles, key=str) if TOP not in ub[r]]
            if not targets:
                continue
            target = rng.choice(targets)
            gg = gamma_restricted(p, g, target)
            extra = None
            for _ in range(10):
                cand = random_statement_for_state(rng, p, fresh_principal="E")
                if cand.head not in gg.roles and cand not in p:
                    extra = cand
                    break
            if extra is None:
                continue
            p2 = p.add(extra)
            ub2 = upper_bound(p2, RoleMonitor(growth_trusted=g))
            assert ub2[target] == ub[target]
            assert gamma_restricted(p2, g, target).roles == gg.roles
            done += 1


class TestLowerBoundSupportStability:
    def test_shrink_trusted_support_pins_the_lower_bound(self):
        rng = random.Random(607)
        done = 0
        while done < 120:
            p = random_state(rng)
            monitor = random_monitor(rng, p, s_density=0.85)
            js = justified_semantics(restrict(p, monitor.shrink_trusted))
            pairs = [
                (r, e)
                for r, entries in sorted(js.entries.items(), key=lambda kv: str(kv[0]))
                for e in sorted(
                    entries, key=lambda e: (str(e.member), sorted(map(str, e.support)))
                )
            ]
            if not pairs:
                continue
            target, entry = rng.choice(pairs)
            assert entry.support <= monitor.shrink_trusted
            assert entry.member in lower_bound(p, monitor)[target]
            p2 = p
            for victim in sorted(p.statements, key=str):
                if victim.head not in entry.support and rng.random() < 0.5:
                    p2 = p2.remove(victim)
            for _ in range(rng.randint(0, 3)):
                p2 = p2.add(random_statement_for_state(rng, p, fresh_principal="E"))
            lb2 = lower_bound(p2, monitor)
            assert entry.member in lb2.get(target, frozenset())
            done += 1


def test_bounds_hold_across_enumerated_reachable_states():
    """The real claim behind the bounds: for every state reachable without
    touching trusted definitions, the lower bound survives and nothing
    escapes the upper bound (TOP covering principals the base state never
    saw)."""
    from oracles import reachable_states

    rng = random.Random(608)
    instances = 0
    while instances < 30:
        p = random_state(rng, max_principals=3, max_names=2, max_statements=5)
        monitor = random_monitor(rng, p, 0.7, 0.7)
        lb = lower_bound(p, monitor)
        ub = upper_bound(p, monitor)
        for p2 in reachable_states(p, monitor, max_removals=3, max_adds=2, pool_cap=8):
            got = evaluate(p2).members
            for r in p.roles:
                actual = got.get(r, frozenset())
                assert lb[r] <= actual
                for m in actual:
                    assert m in ub[r] or (m not in p.principals and TOP in ub[r])
        instances += 1


def test_expression_bounds_follow_the_structure():
    p = hazmat_policy()
    monitor = dept_excluded_monitor(p)
    idx = bounds(p, monitor)
    q = hazmat_constraint()
    assert eval_upper(idx, q.lhs) == frozenset(
        {prin("Rollins"), prin("Burke"), prin("OConnel")}
    )
    assert eval_lower(idx, q.rhs) == frozenset({prin("Rollins")})
    static = PrincipalSet(frozenset({prin("Zoe")}))
    assert eval_upper(idx, static) == eval_lower(idx, static) == static.members


def test_gamma_restricted_expr_unions_roles():
    p = self_link_policy()
    q = parse_constraint("constraint q owner A: A.r | E.r <= {}")
    got = gamma_restricted_expr(p, p.roles, q.lhs)
    assert got.roles == gamma_restricted(p, p.roles, role("A.r")).roles | gamma_restricted(
        p, p.roles, role("E.r")
    ).roles
