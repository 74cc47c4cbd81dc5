"""Generators and membership certifiers for the inequality families."""

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixcut import families as fam
from mixcut import hull
from mixcut.bench import benchmark_instance
from mixcut.core import build_instance, cut_is_valid, make_cut, parse_mixing_form

SEQ_L = [20, 18, 14, 11, 6, 5, 4, 3, 2, 1]
SEQ_K = [40, 38, 34, 31, 26, 16, 8, 4, 2, 1]

EQ12 = make_cut(1, [6, 0, 0, 2, -3, -3, 0, 0, 0, 0], 14)


@pytest.fixture(scope="module")
def ex21():
    return build_instance(10, SEQ_L, None, Fraction(4, 10))


@pytest.fixture(scope="module")
def ex42():
    pi = [Fraction(1, 8)] * 4 + [Fraction(1, 12)] * 6
    return build_instance(10, SEQ_K, pi, Fraction(1, 2))


class TestStar:
    def test_telescoping(self):
        inst = build_instance(3, [20, 18, 14], None, 1)
        cut = fam.gen_star(inst, fam.StarParams((1, 2, 3)))
        assert cut == make_cut(1, [2, 4, 14], 20)

    def test_single_element(self, ex21):
        cut = fam.gen_star(ex21, fam.StarParams((1,)))
        assert cut == make_cut(1, [20] + [0] * 9, 20)

    @given(data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_coefficients_sum_to_rhs(self, data, ex21):
        t = tuple(sorted(data.draw(
            st.lists(st.integers(1, 10), unique=True, min_size=1, max_size=5))))
        cut = fam.gen_star(ex21, fam.StarParams(t))
        assert sum(cut.x_coefs, Fraction(0)) == cut.rhs

    def test_star_cuts_valid_even_with_knapsack(self, ex21):
        for t in [(1,), (1, 2), (2, 5, 9), (1, 4, 7, 10)]:
            assert cut_is_valid(ex21, fam.gen_star(ex21, fam.StarParams(t)))


class TestStrengthenedStar:
    def test_worked_example(self):
        inst = benchmark_instance("L", 5, 3)
        cut = fam.gen_strengthened_star(inst, fam.StarParams((1, 2, 3)))
        assert cut == make_cut(1, [2, 4, 3, 0, 0], 20)

    def test_last_index(self):
        inst = benchmark_instance("L", 5, 3)
        cut = fam.gen_strengthened_star(inst, fam.StarParams((3,)))
        assert cut == make_cut(1, [0, 0, 3, 0, 0], 14)

    def test_index_beyond_p_rejected(self):
        inst = benchmark_instance("L", 5, 3)
        with pytest.raises(fam.FamilyParamError):
            fam.gen_strengthened_star(inst, fam.StarParams((1, 4)))

    def test_all_generated_cuts_valid(self):
        inst = benchmark_instance("K", 6, 4)
        for size in (1, 2, 3):
            for t in combinations(range(1, inst.p + 1), size):
                assert cut_is_valid(inst, fam.gen_strengthened_star(inst, fam.StarParams(t)))


class TestLifted:
    def test_worked_example(self):
        inst = benchmark_instance("L", 5, 3)
        cut = fam.gen_luedtke_lifted(inst, fam.LiftedParams(2, (1, 2), (4,)))
        assert cut == make_cut(1, [2, 4, 0, -3, 0], 17)

    def test_empty_lifting_reduces_to_strengthened_star(self):
        inst = benchmark_instance("L", 5, 3)
        lifted = fam.gen_luedtke_lifted(inst, fam.LiftedParams(3, (1, 3), ()))
        assert lifted == fam.gen_strengthened_star(inst, fam.StarParams((1, 3)))

    def test_requires_uniform(self, ex42):
        with pytest.raises(fam.FamilyParamError):
            fam.gen_luedtke_lifted(ex42, fam.LiftedParams(2, (1,), (5, 6)))

    def test_outputs_valid(self):
        inst = benchmark_instance("L", 6, 4)
        for r in (2, 3):
            for q in combinations(range(inst.p + 1, 7), inst.p - r):
                cut = fam.gen_luedtke_lifted(inst, fam.LiftedParams(r, (1, r), q))
                assert cut_is_valid(inst, cut)


class TestKucukyavuz:
    def test_admissible_arrangement(self):
        inst = benchmark_instance("L", 6, 4)
        cut = fam.gen_kucukyavuz(inst, fam.LiftedParams(2, (1, 2), (4, 5)))
        assert cut == make_cut(1, [2, 4, 0, -3, -8, 0], 9)
        assert cut_is_valid(inst, cut)

    def test_position_bound_enforced(self):
        inst = benchmark_instance("L", 6, 4)
        with pytest.raises(fam.FamilyParamError):
            fam.gen_kucukyavuz(inst, fam.LiftedParams(2, (1, 2), (5, 4)))

    def test_agrees_with_lifted_on_shared_domain(self):
        inst = benchmark_instance("L", 7, 5)
        for r in (3, 4):
            for q in combinations(range(inst.p + 1, 8), inst.p - r):
                a = fam.gen_luedtke_lifted(inst, fam.LiftedParams(r, (1,), q))
                b = fam.gen_kucukyavuz(inst, fam.LiftedParams(r, (1,), q))
                assert a == b

    def test_permuted_outputs_valid(self):
        inst = benchmark_instance("K", 7, 5)
        for q in [(4, 6, 5), (4, 5, 7), (5, 4, 6), (3, 5, 6)]:
            params = fam.LiftedParams(2, (1, 2), q)
            if any(qi < 2 + i + 2 for i, qi in enumerate(q)):
                with pytest.raises(fam.FamilyParamError):
                    fam.gen_kucukyavuz(inst, params)
            else:
                assert cut_is_valid(inst, fam.gen_kucukyavuz(inst, params))


class TestZhao:
    def test_worked_general_probability_cut(self, ex42):
        cut = fam.gen_zhao(ex42, fam.LiftedParams(1, (1,), (4, 7, 8)))
        assert cut == make_cut(1, [2, 0, 0, -4, 0, 0, -4, -8, 0, 0], 24)
        assert cut_is_valid(ex42, cut)

    def test_explicit_s_sequence_accepted(self, ex42):
        cut = fam.gen_zhao(ex42, fam.LiftedParams(1, (1,), (4, 7, 8), s_list=(1, 2, 3)))
        assert cut == make_cut(1, [2, 0, 0, -4, 0, 0, -4, -8, 0, 0], 24)

    def test_crossing_violation_reports_position(self, ex42):
        with pytest.raises(fam.FamilyParamError, match="iota=1"):
            fam.gen_zhao(ex42, fam.LiftedParams(1, (1,), (4, 7, 8), s_list=(3, 3, 3)))

    def test_uniform_matches_kucukyavuz(self):
        inst = benchmark_instance("L", 7, 4)
        for r in (1, 2):
            for q in combinations(range(r + 2, 8), inst.p - r):
                want = fam.gen_kucukyavuz(inst, fam.LiftedParams(r, (1,), q))
                got = fam.gen_zhao(inst, fam.LiftedParams(r, (1,), q))
                assert got == want

    def test_outputs_valid_general_probability(self, ex42):
        for r in (1, 2):
            for q in [(4, 7), (5, 6), (4, 5, 6), (6, 7, 8)]:
                try:
                    cut = fam.gen_zhao(ex42, fam.LiftedParams(r, (r,), q))
                except fam.FamilyParamError:
                    continue
                assert cut_is_valid(ex42, cut)


class TestBlpUniform:
    def test_worked_example(self, ex21):
        params = fam.BlpUniformParams(1, (1,), (6, 8, 7), (Fraction(1),))
        cut = fam.gen_blp_uniform(ex21, params)
        assert cut == make_cut(1, [3, 0, 0, 0, 0, -3, -5, -3, 0, 0], 9)

    def test_zero_shift_reduces_to_zhao(self):
        inst = benchmark_instance("L", 6, 4)
        params = fam.BlpUniformParams(2, (1, 2), (4, 5), (Fraction(0), Fraction(0)))
        assert fam.gen_blp_uniform(inst, params) == fam.gen_zhao(
            inst, fam.LiftedParams(2, (1, 2), (4, 5))
        )

    def test_shift_constraints_enforced(self, ex21):
        with pytest.raises(fam.FamilyParamError):
            fam.gen_blp_uniform(ex21, fam.BlpUniformParams(1, (1,), (6,), (Fraction(50),)))
        with pytest.raises(fam.FamilyParamError):
            fam.gen_blp_uniform(
                ex21, fam.BlpUniformParams(2, (1, 2), (6,), (Fraction(-1), Fraction(1)))
            )

    def test_outputs_valid_and_facet_checkable(self, ex21):
        params = fam.BlpUniformParams(1, (1,), (6, 8, 7), (Fraction(1),))
        cut = fam.gen_blp_uniform(ex21, params)
        assert cut_is_valid(ex21, cut)
        assert hull.is_facet(ex21, cut)


class TestBlpGeneric:
    def test_worked_certificate_beta(self, ex21):
        params = fam.BlpGenericParams(
            r=4,
            t_set=(1, 4),
            delta=(Fraction(-3), Fraction(-3)),
            q_list=(5, 6),
            phi=(Fraction(3), Fraction(3)),
            a_sets=(frozenset(), frozenset(), frozenset(), frozenset(),
                    frozenset({5}), frozenset({5, 6}), frozenset(), frozenset(),
                    frozenset(), frozenset()),
        )
        result = fam.gen_blp_generic(ex21, params)
        assert result.accepted
        assert result.cut == EQ12
        assert result.certificate.beta == (
            Fraction(0), Fraction(0), Fraction(0), Fraction(3), Fraction(3),
            Fraction(4), Fraction(4), Fraction(3), Fraction(5, 2), Fraction(11, 5),
        )

    def test_searched_certificate(self, ex21):
        params = fam.BlpGenericParams(
            r=4, t_set=(1, 4), delta=(Fraction(-3), Fraction(-3)),
            q_list=(5, 6), phi=(Fraction(3), Fraction(3)),
        )
        result = fam.gen_blp_generic(ex21, params)
        assert result.accepted and result.cut == EQ12

    def test_rejection_names_first_infeasible_scenario(self, ex42):
        params = fam.BlpGenericParams(
            r=1, t_set=(1,), delta=(Fraction(0),),
            q_list=(4, 7, 8), phi=(Fraction(4), Fraction(4), Fraction(8)),
        )
        result = fam.gen_blp_generic(ex42, params)
        assert not result.accepted
        assert result.infeasible_j == 3

    def test_empty_lifting_certifies_strengthened_star(self):
        inst = benchmark_instance("L", 6, 4)
        params = fam.BlpGenericParams(
            r=inst.p, t_set=(1, 3), delta=(Fraction(0), Fraction(0))
        )
        result = fam.gen_blp_generic(inst, params)
        assert result.accepted
        assert result.cut == fam.gen_strengthened_star(inst, fam.StarParams((1, 3)))
        # scenarios up to p+1 certify with zero multipliers
        assert all(b == 0 for b in result.certificate.beta[: inst.p + 1])


class TestNecessityCount:
    def test_worked_certificate_reaches_threshold(self, ex21):
        params = fam.BlpGenericParams(
            r=4, t_set=(1, 4), delta=(Fraction(-3), Fraction(-3)),
            q_list=(5, 6), phi=(Fraction(3), Fraction(3)),
            a_sets=(frozenset(), frozenset(), frozenset(), frozenset(),
                    frozenset({5}), frozenset({5, 6}), frozenset(), frozenset(),
                    frozenset(), frozenset()),
            beta=(Fraction(0), Fraction(0), Fraction(0), Fraction(3), Fraction(3),
                  Fraction(4), Fraction(4), Fraction(3), Fraction(5, 2), Fraction(11, 5)),
        )
        assert fam.facet_necessity_count(ex21, params) >= 2 * ex21.m + 1

    def test_slack_certificate_below_threshold(self, ex21):
        params = fam.BlpGenericParams(
            r=4, t_set=(1, 4), delta=(Fraction(-3), Fraction(-3)),
            q_list=(5, 6), phi=(Fraction(3), Fraction(3)),
            a_sets=(frozenset(),) * 10,
            beta=(Fraction(0), Fraction(1), Fraction(1), Fraction(3), Fraction(3),
                  Fraction(5), Fraction(5), Fraction(4), Fraction(3), Fraction(3)),
        )
        # interior perturbation: the certificate still verifies but loses ties
        count = fam.facet_necessity_count(ex21, params)
        assert count < 2 * ex21.m + 1

    def test_count_invariant_under_q_reordering(self, ex21):
        base = dict(
            r=1, t_set=(1,), delta=(Fraction(1),),
            phi=(Fraction(3), Fraction(3), Fraction(5)),
        )
        counts = set()
        for order, phis in [((6, 8, 7), (3, 3, 5)), ((6, 7, 8), (3, 5, 3)), ((8, 7, 6), (3, 5, 3))]:
            params = fam.BlpGenericParams(
                r=1, t_set=(1,), delta=(Fraction(1),),
                q_list=tuple(sorted(order)),
                phi=tuple(Fraction(v) for q, v in sorted(zip(order, phis))),
            )
            result = fam.gen_blp_generic(ex21, params)
            assert result.accepted
            counts.add(fam.facet_necessity_count(ex21, result.certificate))
        assert len(counts) == 1

    def test_uncertified_params_rejected(self, ex21):
        params = fam.BlpGenericParams(r=4, t_set=(1, 4), delta=(Fraction(-3), Fraction(-3)))
        with pytest.raises(fam.FamilyParamError):
            fam.facet_necessity_count(ex21, params)


class TestMembership:
    def test_worked_example_memberships(self, ex21):
        assert not fam.member_of(ex21, EQ12, "zhao")
        assert not fam.member_of(ex21, EQ12, "blp_uniform")
        cert = fam.member_of(ex21, EQ12, "blp_generic")
        assert cert
        regenerated = fam.gen_blp_generic(ex21, cert.certificate)
        assert regenerated.accepted and regenerated.cut == EQ12

    def test_shifted_example_memberships(self, ex21):
        cut = make_cut(1, [3, 0, 0, 0, 0, -3, -5, -3, 0, 0], 9)
        assert fam.member_of(ex21, cut, "blp_uniform")
        assert not fam.member_of(ex21, cut, "zhao")

    def test_general_probability_non_nesting(self, ex21, ex42):
        cut42 = fam.gen_zhao(ex42, fam.LiftedParams(1, (1,), (4, 7, 8)))
        assert fam.member_of(ex42, cut42, "zhao")
        assert not fam.member_of(ex42, cut42, "blp_generic")
        assert fam.member_of(ex21, EQ12, "blp_generic")
        assert not fam.member_of(ex21, EQ12, "zhao")

    def test_degenerate_facet_in_every_family(self):
        inst = benchmark_instance("L", 5, 3)
        degenerate = make_cut(1, [0] * 5, inst.h_at(inst.p + 1))
        for family in fam.FAMILIES:
            assert fam.member_of(inst, degenerate, family)

    def test_vertical_cut_rejected(self):
        inst = benchmark_instance("L", 5, 3)
        with pytest.raises(fam.FamilyParamError.__mro__[1]):  # ValidationError
            fam.member_of(inst, make_cut(0, [1, 0, 0, 0, 0], 0), "star")

    def test_certificate_soundness_on_hull(self):
        inst = benchmark_instance("L", 6, 3)
        fs = hull.cached_facets(inst)
        regen = {
            "star": fam.gen_star,
            "strengthened_star": fam.gen_strengthened_star,
            "lifted": fam.gen_luedtke_lifted,
            "kucukyavuz": fam.gen_kucukyavuz,
            "zhao": fam.gen_zhao,
            "blp_uniform": fam.gen_blp_uniform,
        }
        for facet in fs.nonvertical:
            for family in fam.FAMILIES:
                result = fam.member_of(inst, facet, family)
                if not result or result.via == "degenerate":
                    continue
                if result.via == "blp_generic":
                    assert fam.gen_blp_generic(inst, result.certificate).cut == facet
                else:
                    assert regen[result.via](inst, result.certificate) == facet

    def test_nesting_chain_on_facets(self):
        order = list(fam.FAMILIES)
        for example, m, p in [("L", 5, 3), ("L", 6, 4), ("K", 6, 3)]:
            inst = benchmark_instance(example, m, p)
            for facet in hull.cached_facets(inst).nonvertical:
                flags = [bool(fam.member_of(inst, facet, f)) for f in order]
                assert flags == sorted(flags), (example, m, p, facet)


class TestValiditySweep:
    @pytest.mark.parametrize("example,m,p", [("L", 5, 3), ("K", 6, 4)])
    def test_generator_sweep_is_valid(self, example, m, p):
        inst = benchmark_instance(example, m, p)
        for size in (1, 2):
            for t in combinations(range(1, inst.p + 1), size):
                assert cut_is_valid(inst, fam.gen_star(inst, fam.StarParams(t)))
                assert cut_is_valid(
                    inst, fam.gen_strengthened_star(inst, fam.StarParams(t))
                )
        for r in range(1, inst.p + 1):
            for q in combinations(range(inst.p + 1, inst.m + 1), inst.p - r):
                cut = fam.gen_luedtke_lifted(inst, fam.LiftedParams(r, (r,), q))
                assert cut_is_valid(inst, cut)
