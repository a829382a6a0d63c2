"""Tests for the polycyclic p-group engine."""

import numpy as np
import pytest

from cohomoforge.pcgroup import (
    ConsistencyError,
    FiniteGroup,
    PcPresentation,
    PresentationError,
    Subgroup,
    WeightingError,
    commutator_subgroup,
    format_presentation,
    has_complement,
    is_extraspecial,
    make_group,
    parse_presentation,
)

P = 5


# -- presentation helpers ----------------------------------------------------


def cyclic_pcp(p):
    return PcPresentation(p, 1, {}, {})


def elem_abelian_pcp(p, n):
    return PcPresentation(p, n, {}, {})


def cyclic_p2_pcp(p):
    # g1^p = g2: the cyclic group of order p^2
    return PcPresentation(p, 2, {1: ((2, 1),)}, {})


def heisenberg_pcp(p):
    # [g2, g1] = g3, exponent p: the nonabelian group of order p^3, exponent p
    return PcPresentation(p, 3, {}, {(2, 1): ((3, 1),)})


def chain_pcp(p, r):
    """g1 acts on g2..g_{r+1} by [g_{j+1}, g1] = g_{j+2}: order p^(r+1)."""
    ctails = {(j + 1, 1): ((j + 2, 1),) for j in range(1, r)}
    return PcPresentation(p, r + 1, {}, ctails)


@pytest.fixture(scope="module")
def g2():
    return make_group(chain_pcp(P, 2))


@pytest.fixture(scope="module")
def g3():
    return make_group(chain_pcp(P, 3))


@pytest.fixture(scope="module")
def heis():
    return make_group(heisenberg_pcp(P))


# -- presentation validation -------------------------------------------------


class TestPresentation:
    def test_cyclic_order(self):
        g = make_group(cyclic_pcp(P))
        assert g.order == 5

    def test_chain_order(self, g2):
        assert g2.order == 125

    def test_weighting_violation_rejected(self):
        with pytest.raises(WeightingError):
            PcPresentation(P, 2, {}, {(2, 1): ((1, 1),)})
        with pytest.raises(WeightingError):
            PcPresentation(P, 2, {1: ((1, 1),)}, {})

    def test_bad_words_rejected(self):
        with pytest.raises(PresentationError):
            PcPresentation(P, 3, {}, {(2, 1): ((3, 1), (3, 1))})  # not ascending
        with pytest.raises(PresentationError):
            PcPresentation(P, 3, {}, {(1, 2): ((3, 1),)})  # needs i > j
        with pytest.raises(PresentationError):
            PcPresentation(4, 1, {}, {})  # modulus not prime

    def test_inconsistent_presentation_rejected(self):
        # With [g2,g1] = g3 and trivial g2^p, expanding (g2^p)^g1 forces
        # g3^p = 1; setting g3^p = g4 therefore breaks an overlap.
        bad = PcPresentation(
            P, 4, {3: ((4, 1),)}, {(2, 1): ((3, 1),)}
        )
        with pytest.raises(ConsistencyError) as err:
            make_group(bad)
        assert err.value.defects

    def test_consistency_defects_empty_for_good_groups(self, g3, heis):
        assert g3.consistency_defects() == []
        assert heis.consistency_defects() == []


class TestPresentationText:
    def test_round_trip(self, g3):
        text = format_presentation(g3.pcp)
        assert parse_presentation(text) == g3.pcp

    def test_conjugate_form_and_shorthand(self):
        full = parse_presentation(
            "prime = 5\ngens = 3\ng2^g1 = g2*g3\n"
        )
        short = parse_presentation(
            "prime = 5\ngens = 3\ng2^g1 = g3\n"
        )
        bracket = parse_presentation(
            "prime = 5\ngens = 3\n[g2,g1] = g3\n"
        )
        assert full == short == bracket == heisenberg_pcp(5)

    def test_power_lines_and_comments(self):
        pcp = parse_presentation(
            """
            # cyclic of order 25
            prime = 5
            gens = 2
            g1^p = g2
            g2^5 = 1
            """
        )
        assert pcp == cyclic_p2_pcp(5)

    def test_parse_errors(self):
        with pytest.raises(PresentationError):
            parse_presentation("gens = 2\n")  # missing prime
        with pytest.raises(PresentationError):
            parse_presentation("prime = 5\ngens = 2\ng1 + g2\n")


# -- element arithmetic ------------------------------------------------------


class TestArithmetic:
    def test_identity_and_generators(self, g2):
        e = g2.identity
        s = g2.generator(1)
        assert g2.mul(s, e) == s
        assert g2.mul(e, s) == s

    def test_defining_conjugation(self, g2):
        # a1 conjugated by the acting generator is a1 * a2
        a1 = g2.generator(2)
        sigma = g2.generator(1)
        assert g2.conjugate(a1, sigma) == (0, 1, 1)

    def test_abelian_part_commutes(self, g2):
        a1, a2 = g2.generator(2), g2.generator(3)
        assert g2.mul(a1, a2) == g2.mul(a2, a1) == (0, 1, 1)

    def test_inverses(self, g3, rng):
        for _ in range(50):
            x = tuple(rng.integers(0, P, size=g3.n))
            assert g3.mul(x, g3.inv(x)) == g3.identity
            assert g3.mul(g3.inv(x), x) == g3.identity

    def test_associativity_random_triples(self, heis, rng):
        for _ in range(10_000):
            x, y, z = (tuple(rng.integers(0, P, size=3)) for _ in range(3))
            assert heis.mul(heis.mul(x, y), z) == heis.mul(x, heis.mul(y, z))

    def test_associativity_vectorised(self, g3, rng):
        T = g3.cayley_table().astype(np.int64)
        x, y, z = rng.integers(0, g3.order, size=(3, 10_000))
        assert np.array_equal(T[T[x, y], z], T[x, T[y, z]])

    def test_power_and_order(self, g3):
        sigma = g3.generator(1)
        assert g3.power(sigma, 5) == g3.identity
        assert g3.power(sigma, -1) == g3.inv(sigma)
        assert g3.order_of(sigma) == 5
        assert g3.order_of(g3.identity) == 1

    def test_index_round_trip(self, g3, rng):
        for _ in range(30):
            x = tuple(rng.integers(0, P, size=g3.n))
            assert g3.element_of_index(g3.index_of_element(x)) == x
        # index order = lexicographic order on exponent tuples
        assert g3.index_of_element((0, 0, 0, 1)) == 1
        assert g3.index_of_element((1, 0, 0, 0)) == 125


# -- tables ------------------------------------------------------------------


class TestTables:
    def test_r_table_matches_collection(self, g2, rng):
        for k in range(1, g2.n + 1):
            table = g2.r_table(k)
            for _ in range(40):
                z = int(rng.integers(0, g2.order))
                expect = g2.index_of_element(
                    g2.mul(g2.element_of_index(z), g2.generator(k))
                )
                assert table[z] == expect

    def test_left_translation_table(self, g2, rng):
        y = (2, 3, 1)
        L = g2.left_translation_table(y)
        for _ in range(40):
            z = int(rng.integers(0, g2.order))
            assert L[z] == g2.index_of_element(g2.mul(y, g2.element_of_index(z)))

    def test_cayley_agrees_with_collection(self, g2, rng):
        T = g2.cayley_table()
        for _ in range(300):
            x, y = (tuple(rng.integers(0, P, size=3)) for _ in range(2))
            assert (
                int(T[g2.index_of_element(x), g2.index_of_element(y)])
                == g2.index_of_element(g2.mul(x, y))
            )

    def test_inverse_all(self, g3, rng):
        inv = g3.inverse_all()
        for _ in range(40):
            z = int(rng.integers(0, g3.order))
            assert inv[z] == g3.index_of_element(g3.inv(g3.element_of_index(z)))

    def test_orders_all(self, heis):
        orders = heis.orders_all()
        assert orders[0] == 1
        assert (orders[1:] == 5).all()

    def test_orders_cyclic_p2(self):
        g = make_group(cyclic_p2_pcp(P))
        orders = sorted(g.orders_all().tolist())
        assert orders.count(1) == 1
        assert orders.count(5) == 4
        assert orders.count(25) == 20
        assert g.exponent_of() == 25

    def test_conjugation_table(self, g2):
        y = (1, 0, 0)
        C = g2.conjugation_table(y)
        a1 = g2.index_of_element((0, 1, 0))
        assert C[a1] == g2.index_of_element((0, 1, 1))


# -- structural queries ------------------------------------------------------


class TestStructure:
    def test_center_elementary_abelian(self):
        g = make_group(elem_abelian_pcp(P, 2))
        assert g.center().order == g.order

    def test_center_chain_group(self, g2):
        z = g2.center()
        assert z.order == 5
        assert g2.index_of_element((0, 0, 1)) in z

    def test_exponent(self, g3):
        assert g3.exponent_of() == 5

    def test_subgroup_generated(self, g2):
        assert g2.subgroup_generated([]).order == 1
        s = g2.subgroup_generated([g2.generator(1), g2.generator(3)])
        assert s.order == 25
        a_part = g2.subgroup_generated([g2.generator(2), g2.generator(3)])
        assert a_part.order == 25

    def test_centralizer_trivial_subgroup(self, g2):
        assert g2.centralizer(g2.trivial_subgroup()).order == g2.order

    def test_centralizer_abelian_part(self, g2):
        a_part = g2.subgroup_generated([g2.generator(2), g2.generator(3)])
        c = g2.centralizer(a_part)
        assert c.key == a_part.key

    def test_centralizer_self_centralizing(self, g2):
        e = g2.subgroup_generated([g2.generator(1), g2.generator(3)])
        c = g2.centralizer(e)
        assert c.key == e.key

    def test_center_contained_in_centralizers(self, g3):
        z = set(g3.center().elements)
        for gens in ([g3.generator(2)], [g3.generator(1)], [g3.generator(4)]):
            sub = g3.subgroup_generated(gens)
            assert z <= set(g3.centralizer(sub).elements)

    def test_commutator_with_trivial(self, g2):
        c = commutator_subgroup(g2.full_subgroup(), g2.trivial_subgroup())
        assert c.order == 1

    def test_derived_subgroup_chain2(self, g2):
        c = commutator_subgroup(g2.full_subgroup(), g2.full_subgroup())
        assert c.order == 5
        assert g2.index_of_element((0, 0, 1)) in c

    def test_commutator_mixed_subgroups(self, g3):
        # X generated by the first abelian generator, Y by the acting one:
        # the commutator subgroup picks up both chained generators.
        x = g3.subgroup_generated([g3.generator(2)])
        y = g3.subgroup_generated([g3.generator(1)])
        c = commutator_subgroup(x, y)
        expected = g3.subgroup_generated([g3.generator(3), g3.generator(4)])
        assert c.key == expected.key

    def test_commutator_parent_mismatch(self, g2, g3):
        with pytest.raises(ValueError):
            commutator_subgroup(g2.full_subgroup(), g3.full_subgroup())

    def test_lower_central_series_abelian(self):
        g = make_group(elem_abelian_pcp(P, 3))
        series = g.lower_central_series()
        assert [s.order for s in series] == [125, 1]

    def test_lower_central_series_chain2(self, g2):
        series = g2.lower_central_series()
        assert [s.order for s in series] == [125, 5, 1]
        assert g2.index_of_element((0, 0, 1)) in series[1]

    def test_lower_central_series_chain3(self, g3):
        series = g3.lower_central_series()
        assert [s.order for s in series] == [625, 25, 5, 1]
        # all successive indices from the second term on equal p
        for a, b in zip(series[1:], series[2:]):
            assert a.order // b.order == P


# -- elementary abelian enumeration ------------------------------------------


class TestElementaryAbelian:
    def test_rank1_cyclic(self):
        g = make_group(cyclic_pcp(P))
        subs = g.enumerate_elementary_abelian(1)
        assert len(subs) == 1
        assert subs[0].order == 5

    def test_rank_too_large(self, g2):
        assert g2.enumerate_elementary_abelian(5) == []

    def test_rank2_chain2(self, g2):
        subs = g2.enumerate_elementary_abelian(2)
        assert len(subs) == 6
        center_gen = g2.index_of_element((0, 0, 1))
        for s in subs:
            assert s.order == 25
            assert center_gen in s
            assert s.is_elementary_abelian()

    def test_deterministic_order(self, g2):
        subs1 = g2.enumerate_elementary_abelian(2)
        subs2 = g2.enumerate_elementary_abelian(2)
        assert [s.key for s in subs1] == [s.key for s in subs2]
        assert [s.key for s in subs1] == sorted(s.key for s in subs1)

    def test_rank3_in_chain3(self, g3):
        subs = g3.enumerate_elementary_abelian(3)
        a_part = g3.subgroup_generated([g3.generator(k) for k in (2, 3, 4)])
        assert [s.key for s in subs] == [a_part.key]


# -- complements -------------------------------------------------------------


class TestComplements:
    def test_split_product(self):
        g = make_group(elem_abelian_pcp(P, 2))
        kernel = g.subgroup_generated([g.generator(1)])
        comp = has_complement(g, kernel)
        assert comp is not None
        assert comp.order == 5
        assert set(comp.elements) & set(kernel.elements) == {0}

    def test_nonsplit_extraspecial(self, heis):
        comp = has_complement(heis, heis.center())
        assert comp is None

    def test_nonsplit_cyclic_p2(self):
        g = make_group(cyclic_p2_pcp(P))
        kernel = g.subgroup_generated([g.generator(2)])
        assert has_complement(g, kernel) is None

    def test_non_normal_kernel_rejected(self, heis):
        sub = heis.subgroup_generated([heis.generator(1)])
        with pytest.raises(ValueError):
            has_complement(heis, sub)


# -- predicates --------------------------------------------------------------


class TestPredicates:
    def test_heisenberg_extraspecial(self, heis):
        assert is_extraspecial(heis)

    def test_chain2_extraspecial(self, g2):
        assert is_extraspecial(g2)

    def test_abelian_not_extraspecial(self):
        assert not is_extraspecial(make_group(elem_abelian_pcp(P, 3)))
        assert not is_extraspecial(make_group(cyclic_p2_pcp(P)))

    def test_chain3_not_extraspecial(self, g3):
        assert not is_extraspecial(g3)

    def test_subgroup_predicates(self, g2):
        a_part = g2.subgroup_generated([g2.generator(2), g2.generator(3)])
        assert a_part.is_abelian()
        assert a_part.is_elementary_abelian()
        assert a_part.is_normal()
        assert a_part.exponent() == 5
        sigma = g2.subgroup_generated([g2.generator(1)])
        assert not sigma.is_normal()
        assert g2.center().is_central()
