"""Tests for the extension calculus: modules, exact sequences, splices."""

import numpy as np
import pytest

from cohomoforge.cochains import (
    IS_COBOUNDARY,
    NOT_COBOUNDARY,
    cocycle_to_extension,
    cup,
    differential_is_zero,
    generator_dual,
    is_coboundary,
)
from cohomoforge.extensions import (
    CrossedExtension,
    ExtensionError,
    GModule,
    GroupHom,
    ModuleMap,
    XDiagramWitness,
    YonedaExtension,
    baer_sum,
    compose_homs,
    compose_maps,
    crossed1_cocycle,
    crossed_from_central,
    crossed_module_check,
    direct_product,
    dual_generator_extension,
    extension_summary,
    fiber_product,
    module_group,
    negation_hom,
    pullback,
    pushout,
    quotient_module,
    self_equivalence_witness,
    semidirect_product,
    splice,
    submodule,
    verify_x_diagram,
    yoneda1_class_cochain,
    yoneda2_class_cochain,
    zero_crossed,
    zero_yoneda,
)
from cohomoforge.family import (
    FamilyParams,
    classify_rank2,
    construct_eta,
    pullback_extension,
)
from cohomoforge.pcgroup import (
    PcPresentation,
    has_complement,
    is_extraspecial,
    make_group,
    subgroup_presentation,
)


# ---------------------------------------------------------------------------
# Shared groups, modules, and certified extensions
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def c5():
    return make_group(PcPresentation(5, 1, {}, {}))


@pytest.fixture(scope="module")
def c25():
    return make_group(PcPresentation(5, 2, {1: ((2, 1),)}, {}))


@pytest.fixture(scope="module")
def c55():
    return make_group(PcPresentation(5, 2, {}, {}))


@pytest.fixture(scope="module")
def triv55(c55):
    return GModule.trivial(c55, 1)


@pytest.fixture(scope="module")
def jordan(c5):
    """Indecomposable two-dimensional module: the generator acts by a
    unipotent upper-triangular matrix."""
    return GModule(c5, 2, {1: [[1, 1], [0, 1]]})


@pytest.fixture(scope="module")
def cert52():
    return construct_eta(FamilyParams(5, 2))


@pytest.fixture(scope="module")
def eta2(cert52):
    proj = GroupHom(cert52.ghat, cert52.base, cert52.quotient_map)
    return crossed_from_central(
        cert52.ghat, cert52.base, proj, cert52.ghat.generator(4)
    )


@pytest.fixture(scope="module")
def duals55(c55):
    """The two generator-dual degree-one extensions over C5 x C5."""
    return dual_generator_extension(c55, 1), dual_generator_extension(c55, 2)


def assert_cohomologous(a, b):
    cert = is_coboundary(a - b)
    assert cert.status == IS_COBOUNDARY, (
        f"classes differ: {cert.status} after {cert.rows_processed} rows"
    )


# ---------------------------------------------------------------------------
# Modules over a group
# ---------------------------------------------------------------------------


class TestGModule:
    def test_trivial_module(self, c5):
        mod = GModule.trivial(c5, 3)
        assert mod.dim == 3 and mod.is_trivial_action()
        assert np.array_equal(mod.act_element(c5.generator(1)), np.eye(3))

    def test_jordan_block_accepted(self, jordan, c5):
        sq = jordan.act_element((2,))
        assert np.array_equal(sq, [[1, 2], [0, 1]])
        assert not jordan.is_trivial_action()

    def test_rejects_singular_matrix(self, c5):
        with pytest.raises(ExtensionError):
            GModule(c5, 1, {1: [[0]]})

    def test_rejects_power_relation_violation(self, c25):
        # the power relation forces R(g1)^5 == R(g2); scalars over F_5
        # satisfy x^5 == x, so the pair (2, anything != 2) must fail
        with pytest.raises(ExtensionError):
            GModule(c25, 1, {1: [[2]], 2: [[1]]})
        # and (2, 2) then fails R(g2)^5 == identity
        with pytest.raises(ExtensionError):
            GModule(c25, 1, {1: [[2]], 2: [[2]]})

    def test_rejects_commutator_relation_violation(self):
        g = make_group(PcPresentation(5, 3, {}, {(2, 1): ((3, 1),)}))
        with pytest.raises(ExtensionError):
            GModule(g, 1, {1: [[1]], 2: [[2]], 3: [[3]]})


class TestModuleMap:
    def test_classmethods(self, jordan, c5):
        ident = ModuleMap.identity(jordan)
        assert ident.rank == 2
        zero = ModuleMap.zero(jordan, jordan)
        assert zero.rank == 0 and zero.is_zero()
        tw = ModuleMap.scalar(jordan, 2)
        assert np.array_equal(tw.matrix, [[2, 0], [0, 2]])

    def test_equivariance_enforced(self, jordan, c5):
        line = GModule.trivial(c5, 1)
        # projecting onto the first coordinate commutes with the action
        ModuleMap(jordan, line, [[1], [0]])
        # the second coordinate moves, so that projection is not a map
        with pytest.raises(ExtensionError):
            ModuleMap(jordan, line, [[0], [1]])

    def test_compose_order(self, triv55):
        two = ModuleMap.scalar(triv55, 2)
        three = ModuleMap.scalar(triv55, 3)
        assert np.array_equal(compose_maps(two, three).matrix, [[1]])


class TestSubmoduleQuotient:
    def test_invariant_line(self, jordan):
        sub, incl = submodule(jordan, [[0, 1]])
        assert sub.dim == 1 and sub.is_trivial_action()
        assert np.array_equal(incl.matrix, [[0, 1]])

    def test_non_invariant_rows_rejected(self, jordan):
        with pytest.raises(ExtensionError, match="escapes the span"):
            submodule(jordan, [[1, 0]])

    def test_quotient_with_section(self, jordan):
        quot, proj, sect = quotient_module(jordan, [[0, 1]])
        assert quot.dim == 1
        assert np.array_equal((sect @ proj.matrix) % 5, [[1]])
        _, incl = submodule(jordan, [[0, 1]])
        assert not compose_maps(incl, proj).matrix.any()


# ---------------------------------------------------------------------------
# Group homomorphisms and products
# ---------------------------------------------------------------------------


class TestGroupHom:
    def test_from_generator_images(self, c25, c5):
        drop = GroupHom.from_generator_images(
            c25, c5, [c5.generator(1), c5.identity]
        )
        assert np.array_equal(drop.table, np.arange(25) // 5)
        assert drop.is_surjective() and not drop.is_injective()

    def test_multiplication_by_p_embedding(self, c5, c25):
        into = GroupHom.from_generator_images(c5, c25, [c25.generator(2)])
        assert np.array_equal(into.table, np.arange(5))
        drop = GroupHom(c25, c5, np.arange(25) // 5)
        assert not compose_homs(into, drop).table.any()

    def test_rejects_non_multiplicative_table(self, c5):
        with pytest.raises(ExtensionError, match="multiplicative"):
            GroupHom(c5, c5, [0, 2, 1, 3, 4])

    def test_rejects_identity_violation(self, c5):
        with pytest.raises(ExtensionError, match="identity"):
            GroupHom(c5, c5, [1, 2, 3, 4, 0])

    def test_negation(self, c55, cert52):
        neg = negation_hom(c55)
        assert np.array_equal(neg.table, c55.inverse_all())
        with pytest.raises(ExtensionError, match="abelian"):
            negation_hom(cert52.base)


class TestProducts:
    def test_direct_product_round_trip(self, c5, c25):
        prod, emb_a, emb_b, proj_a, proj_b = direct_product(c5, c25)
        assert prod.order == 125
        assert np.array_equal(compose_homs(emb_a, proj_a).table, np.arange(5))
        assert np.array_equal(compose_homs(emb_b, proj_b).table, np.arange(25))
        assert not compose_homs(emb_a, proj_b).table.any()
        x = prod.element_of_index(int(emb_a.table[1]))
        y = prod.element_of_index(int(emb_b.table[1]))
        assert prod.mul(x, y) == prod.mul(y, x)

    def test_semidirect_jordan_action_is_extraspecial(self, c5, c55):
        idx = np.arange(25)
        act = np.stack(
            [5 * (idx // 5) + (idx % 5 + a * (idx // 5)) % 5 for a in range(5)]
        )
        prod, emb_actor, emb_normal = semidirect_product(c5, c55, act)
        assert prod.order == 125 and is_extraspecial(prod)
        # conjugation by the actor realizes the prescribed action
        s = prod.element_of_index(int(emb_actor.table[1]))
        n = prod.element_of_index(int(emb_normal.table[5]))
        conj = prod.index_of_element(prod.conjugate(n, s))
        assert conj == int(emb_normal.table[act[1, 5]])

    def test_semidirect_rejects_ascending_action(self, c5, c55):
        idx = np.arange(25)
        bad = np.stack(
            [5 * ((idx // 5 + a * (idx % 5)) % 5) + idx % 5 for a in range(5)]
        )
        with pytest.raises(ExtensionError, match="descend"):
            semidirect_product(c5, c55, bad)

    def test_fiber_product(self, c25, c5):
        drop = GroupHom(c25, c5, np.arange(25) // 5)
        fiber, proj_f, proj_h, embedding = fiber_product(
            drop, GroupHom.identity(c5)
        )
        assert fiber.order == 25
        assert proj_f.is_surjective() and proj_h.is_surjective()
        assert np.array_equal(
            compose_homs(proj_f, drop).table, proj_h.table
        )


# ---------------------------------------------------------------------------
# Module-theoretic (Yoneda) extensions
# ---------------------------------------------------------------------------


class TestYonedaDegreeOne:
    def test_zero_class_splits(self, triv55):
        cls = yoneda1_class_cochain(zero_yoneda(triv55, triv55, 1))
        assert is_coboundary(cls).status == IS_COBOUNDARY

    def test_dual_generator_class(self, c5):
        ext = dual_generator_extension(c5, 1)
        cls = yoneda1_class_cochain(ext)
        assert [int(cls.value((a,))) for a in range(5)] == [0, 1, 2, 3, 4]
        assert cls == generator_dual(c5, 1)

    def test_pushout_scales_class(self, c55, duals55):
        e1, _ = duals55
        line = e1.left
        scaled = pushout(e1, ModuleMap.scalar(line, 3))
        assert_cohomologous(
            yoneda1_class_cochain(scaled), yoneda1_class_cochain(e1) * 3
        )
        same = pushout(e1, ModuleMap.identity(line))
        assert_cohomologous(
            yoneda1_class_cochain(same), yoneda1_class_cochain(e1)
        )

    def test_pullback_along_zero_splits(self, duals55):
        e1, _ = duals55
        pulled = pullback(e1, ModuleMap.zero(e1.right, e1.right))
        assert is_coboundary(yoneda1_class_cochain(pulled)).status == (
            IS_COBOUNDARY
        )

    def test_baer_sum_with_zero(self, duals55, triv55):
        e1, _ = duals55
        z = zero_yoneda(triv55, triv55, 1)
        assert_cohomologous(
            yoneda1_class_cochain(baer_sum(e1, z)), yoneda1_class_cochain(e1)
        )

    def test_baer_sum_with_negative_splits(self, duals55):
        e1, _ = duals55
        neg = pushout(e1, ModuleMap.scalar(e1.left, 4))
        total = baer_sum(e1, neg)
        assert is_coboundary(yoneda1_class_cochain(total)).status == (
            IS_COBOUNDARY
        )

    def test_class_of_nonsplit_extension_is_nonzero(self, duals55):
        e1, _ = duals55
        assert is_coboundary(yoneda1_class_cochain(e1)).status == (
            NOT_COBOUNDARY
        )


class TestSpliceAndCup:
    def test_degree_two_shape(self, duals55):
        e1, e2 = duals55
        sp = splice(e1, e2)
        assert sp.degree == 2
        assert [m.dim for m in sp.middles] == [2, 2]
        z = yoneda2_class_cochain(sp)
        assert z.degree == 2 and differential_is_zero(z)

    def test_splice_class_is_reversed_cup(self, c55, duals55):
        e1, e2 = duals55
        z = yoneda2_class_cochain(splice(e1, e2))
        c1 = yoneda1_class_cochain(e1)
        c2 = yoneda1_class_cochain(e2)
        assert_cohomologous(z, cup(c2, c1))
        # equivalently, the graded sign for two odd-degree classes
        cert = is_coboundary(z + cup(c1, c2))
        assert cert.status == IS_COBOUNDARY

    def test_zero_splices_give_zero_class(self, duals55, triv55):
        e1, _ = duals55
        z = zero_yoneda(triv55, triv55, 1)
        for sp in (splice(e1, z), splice(z, e1)):
            assert is_coboundary(yoneda2_class_cochain(sp)).status == (
                IS_COBOUNDARY
            )

    def test_pullback_pushout_exchange(self, duals55):
        # moving a coefficient map across the splice junction preserves
        # the composite class
        e1, e2 = duals55
        alpha = ModuleMap.scalar(e1.right, 3)
        lhs = splice(pullback(e1, alpha), e2)
        rhs = splice(e1, pushout(e2, alpha))
        assert_cohomologous(
            yoneda2_class_cochain(lhs), yoneda2_class_cochain(rhs)
        )

    def test_pushout_commutes_with_splice(self, duals55):
        e1, e2 = duals55
        beta = ModuleMap.scalar(e1.left, 2)
        lhs = splice(pushout(e1, beta), e2)
        rhs = pushout(splice(e1, e2), beta)
        assert_cohomologous(
            yoneda2_class_cochain(lhs), yoneda2_class_cochain(rhs)
        )

    def test_restriction_commutes_with_splice(self, c5, c55, duals55):
        e1, e2 = duals55
        tau = GroupHom.from_generator_images(c5, c55, [c55.generator(1)])
        lhs = splice(pullback(e1, tau), pullback(e2, tau))
        rhs = pullback(splice(e1, e2), tau)
        assert lhs.left.group.order == 5
        assert_cohomologous(
            yoneda2_class_cochain(lhs), yoneda2_class_cochain(rhs)
        )

    def test_splice_additive_in_left_argument(self, duals55):
        e1, e2 = duals55
        lhs = splice(baer_sum(e1, e2), e2)
        rhs = baer_sum(splice(e1, e2), splice(e2, e2))
        assert_cohomologous(
            yoneda2_class_cochain(lhs), yoneda2_class_cochain(rhs)
        )


class TestYonedaValidation:
    def test_rejects_non_injective_kernel_map(self, triv55):
        zero = ModuleMap.zero(triv55, triv55)
        with pytest.raises(ExtensionError, match="not injective"):
            YonedaExtension(triv55, (triv55,), triv55, (zero, zero))

    def test_rejects_nonzero_composite(self, triv55):
        ident = ModuleMap.identity(triv55)
        with pytest.raises(ExtensionError, match="nonzero"):
            YonedaExtension(
                triv55, (triv55, triv55), triv55, (ident, ident, ident)
            )

    def test_rejects_inexact_middle(self, c55, triv55):
        wide = GModule.trivial(c55, 3)
        with pytest.raises(ExtensionError, match="not exact"):
            YonedaExtension(
                triv55,
                (wide,),
                triv55,
                (
                    ModuleMap(triv55, wide, [[1, 0, 0]]),
                    ModuleMap(wide, triv55, [[0], [0], [1]]),
                ),
            )


# ---------------------------------------------------------------------------
# Group-theoretic (crossed) extensions
# ---------------------------------------------------------------------------


class TestCrossedDegreeOne:
    def test_certified_cover_round_trip(self, cert52, eta2):
        assert eta2.degree == 1
        assert eta2.m1.order == 625
        assert_cohomologous(crossed1_cocycle(eta2), cert52.cocycle)

    def test_cover_is_nonsplit(self, cert52, eta2):
        assert is_coboundary(crossed1_cocycle(eta2)).status == NOT_COBOUNDARY
        fiber = cert52.ghat.subgroup_generated([cert52.ghat.generator(4)])
        assert has_complement(cert52.ghat, fiber) is None

    def test_zero_crossed_splits(self, cert52):
        line = GModule.trivial(cert52.base, 1)
        z = zero_crossed(line, 1)
        assert is_coboundary(crossed1_cocycle(z)).status == IS_COBOUNDARY

    def test_baer_sum_with_zero(self, cert52, eta2):
        z = zero_crossed(GModule.trivial(cert52.base, 1), 1)
        assert_cohomologous(
            crossed1_cocycle(baer_sum(eta2, z)), crossed1_cocycle(eta2)
        )

    def test_baer_sum_with_negative_splits(self, eta2):
        neg = pushout(eta2, ModuleMap.scalar(eta2.kernel, 4))
        total = baer_sum(eta2, neg)
        assert is_coboundary(crossed1_cocycle(total)).status == IS_COBOUNDARY
        grp = total.m1
        fiber = grp.subgroup_generated(
            [grp.element_of_index(int(total.kernel_embed.table[1]))]
        )
        assert has_complement(grp, fiber) is not None

    def test_baer_sum_matches_cocycle_addition(self, c55):
        d1, d2 = generator_dual(c55, 1), generator_dual(c55, 2)
        z1 = cup(d1, d2)
        z2 = z1 * 2
        exts = []
        for z in (z1, z2):
            total, _ = cocycle_to_extension(c55, z)
            proj = GroupHom(total, c55, np.arange(total.order) // 5)
            exts.append(
                crossed_from_central(total, c55, proj, total.generator(3))
            )
        summed = crossed1_cocycle(baer_sum(*exts))
        assert_cohomologous(summed, z1 + z2)
        assert is_coboundary(summed).status == NOT_COBOUNDARY

    def test_pushout_by_zero_splits(self, eta2):
        line = eta2.kernel
        z = pushout(eta2, ModuleMap.zero(line, line))
        assert is_coboundary(crossed1_cocycle(z)).status == IS_COBOUNDARY

    def test_pushout_scope(self, cert52, eta2):
        plane = GModule.trivial(cert52.base, 2)
        with pytest.raises(ExtensionError, match="covered instances"):
            pushout(eta2, ModuleMap(eta2.kernel, plane, [[1, 0]]))


class TestCrossedPullback:
    def test_rank_two_restrictions_match_direct_preimages(self, cert52, eta2):
        cls = classify_rank2(cert52.params, cert52.base)
        assert len(cls.type_b) == 5
        abelian = 0
        for plane in cls.type_b:
            pcp, _, embed = subgroup_presentation(plane)
            grp = make_group(pcp)
            incl = GroupHom(grp, cert52.base, embed)
            pulled = pullback(eta2, incl)
            direct, _ = pullback_extension(cert52, plane)
            assert pulled.m1.order == 125 == direct.order
            assert is_extraspecial(pulled.m1) == is_extraspecial(direct)
            if not is_extraspecial(pulled.m1):
                abelian += 1
        assert abelian == 1


class TestMixedSplice:
    def test_composite_shape(self, cert52, eta2):
        sig = dual_generator_extension(cert52.base, 1)
        theta = splice(sig, eta2)
        assert isinstance(theta, CrossedExtension)
        summary = extension_summary(theta)
        assert summary["degree"] == 2
        assert summary["middle_orders"] == [25, 625]
        assert summary["base_order"] == 125

    def test_crossed_left_factor_rejected(self, cert52, eta2):
        sig = dual_generator_extension(cert52.base, 1)
        with pytest.raises(ExtensionError):
            splice(eta2, sig)

    def test_degree_three_crossed_unsupported(self, cert52):
        line = GModule.trivial(cert52.base, 1)
        with pytest.raises(NotImplementedError):
            zero_crossed(line, 3)


# ---------------------------------------------------------------------------
# Crossed-module axioms
# ---------------------------------------------------------------------------


class TestCrossedModuleCheck:
    def test_normal_subgroup_with_conjugation(self, cert52):
        g = cert52.base
        normal = g.subgroup_generated([g.generator(2), g.generator(3)])
        pcp, _, embed = subgroup_presentation(normal)
        sub = make_group(pcp)
        rho = GroupHom(sub, g, embed)
        back = {int(parent): j for j, parent in enumerate(embed)}
        act = np.empty((g.order, sub.order), dtype=np.int64)
        for y in range(g.order):
            conj = g.conjugation_table(g.element_of_index(y))
            act[y] = [back[int(conj[parent])] for parent in embed]
        ok, witness = crossed_module_check(rho, act)
        assert ok and witness is None

    def test_central_line_with_trivial_action(self, cert52, c5):
        ghat = cert52.ghat
        cur = ghat.identity
        table = [0]
        for _ in range(4):
            cur = ghat.mul(cur, ghat.generator(4))
            table.append(ghat.index_of_element(cur))
        rho = GroupHom(c5, ghat, table)
        act = np.tile(np.arange(5), (ghat.order, 1))
        ok, witness = crossed_module_check(rho, act)
        assert ok and witness is None

    def test_detects_equivariance_violation(self, cert52, c5):
        # a -> sigma^a with the trivial action: conjugation inside the
        # target moves the image, so the equivariance axiom must fail
        rho = GroupHom(c5, cert52.base, np.arange(5) * 25)
        ok, witness = crossed_module_check(
            rho, np.tile(np.arange(5), (125, 1))
        )
        assert not ok
        assert witness["axiom"] == "ii"


# ---------------------------------------------------------------------------
# Equivalence witnesses (X-shaped diagrams)
# ---------------------------------------------------------------------------


class TestXDiagram:
    def test_split_self_equivalence(self, c5):
        psi = zero_crossed(GModule.trivial(c5, 1), 2)
        w = self_equivalence_witness(psi)
        ok, failed = verify_x_diagram(psi, psi, w)
        assert ok and failed == []

    def test_cyclic_tower_instance(self, c5, c25):
        # 0 -> C5 -> C25 --(mult by 5 on indices)--> C25 -> C5 -> 0
        other = make_group(PcPresentation(5, 2, {1: ((2, 1),)}, {}))
        line = GModule.trivial(c5, 1)
        a5 = module_group(line)[0]
        idx = np.arange(25)
        ext = CrossedExtension(
            line,
            c5,
            (c25, other),
            GroupHom(a5, c25, np.arange(5)),
            GroupHom(other, c5, idx // 5),
            rho1=GroupHom(c25, other, idx // 5),
            action=np.tile(idx, (25, 1)),
        )
        w = self_equivalence_witness(ext)
        ok, failed = verify_x_diagram(ext, ext, w)
        assert ok and failed == []

    def test_elementary_instance_and_broken_corner(self, c5, c55):
        line = GModule.trivial(c5, 1)
        a5 = module_group(line)[0]
        other = make_group(PcPresentation(5, 2, {}, {}))
        idx = np.arange(25)
        ext = CrossedExtension(
            line,
            c5,
            (c55, other),
            GroupHom(a5, c55, np.arange(5) * 5),
            GroupHom(other, c5, idx // 5),
            rho1=GroupHom(c55, other, idx % 5),
            action=np.tile(idx, (25, 1)),
        )
        w = self_equivalence_witness(ext)
        ok, failed = verify_x_diagram(ext, ext, w)
        assert ok and failed == []
        # negate one coordinate of the second diagonal: the corner
        # square breaks while the conjugation condition stays intact
        broken = GroupHom(
            c55, w.x_group, ((-(idx // 5)) % 5) * 5 + idx % 5
        )
        bad = XDiagramWitness(w.x_group, w.mu1, broken, w.nu1, w.nu2)
        ok, failed = verify_x_diagram(ext, ext, bad)
        assert not ok
        assert "c" in failed
        assert "d" not in failed

    @pytest.mark.slow
    def test_composite_self_equivalence(self, cert52, eta2):
        sig = dual_generator_extension(cert52.base, 1)
        theta = splice(sig, eta2)
        w = self_equivalence_witness(theta)
        assert w.x_group.order == 15625
        ok, failed = verify_x_diagram(theta, theta, w)
        assert ok and failed == []


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


class TestSummary:
    def test_module_extension_summary(self, duals55):
        e1, _ = duals55
        summary = extension_summary(e1)
        assert summary["kind"] == "yoneda"
        assert summary["degree"] == 1
        assert summary["middle_dims"] == [2]
        assert summary["map_ranks"] == [1, 1]

    def test_group_extension_summary(self, eta2):
        summary = extension_summary(eta2)
        assert summary["kind"] == "crossed"
        assert summary["degree"] == 1
        assert summary["middle_orders"] == [625]
        assert summary["kernel_dim"] == 1
