"""Tests for the family builder and its certified central covers."""

import json

import numpy as np
import pytest

from cohomoforge.cochains import (
    IS_COBOUNDARY,
    NOT_COBOUNDARY,
    Cochain,
    differential_is_zero,
    is_coboundary,
)
from cohomoforge.family import (
    CertificationError,
    ClassificationError,
    FamilyParams,
    LambdaForm,
    ParameterError,
    SigmaAction,
    build_gr,
    build_lambda_literal,
    classify_rank2,
    construct_eta,
    eta_to_json,
    pullback_extension,
    sigma_matrix,
    sigma_star,
)
from cohomoforge.pcgroup import PcPresentation, format_presentation, make_group


def chain_pcp(p, r):
    ctails = {(j + 1, 1): ((j + 2, 1),) for j in range(1, r)}
    return PcPresentation(p, r + 1, {}, ctails)


@pytest.fixture(scope="module")
def p52():
    return FamilyParams(5, 2)


@pytest.fixture(scope="module")
def cert52(p52):
    return construct_eta(p52)


@pytest.fixture(scope="module")
def cert53():
    return construct_eta(FamilyParams(5, 3))


# -- parameters --------------------------------------------------------------


def test_params_reject_composite_prime():
    with pytest.raises(ParameterError):
        FamilyParams(6, 2)
    with pytest.raises(ParameterError):
        FamilyParams(1, 2)


def test_params_reject_small_r():
    for bad_r in (1, 0, -3):
        with pytest.raises(ParameterError):
            FamilyParams(5, bad_r)
    # too small even for the experimental range
    with pytest.raises(ParameterError):
        FamilyParams(5, 1, experimental_range=True)


def test_params_verified_window():
    with pytest.raises(ParameterError):
        FamilyParams(5, 4)  # r = p - 1 is out of the verified window
    loose = FamilyParams(5, 4, experimental_range=True)
    assert not loose.in_verified_range
    with pytest.raises(ParameterError):
        FamilyParams(3, 2)
    assert not FamilyParams(3, 2, experimental_range=True).in_verified_range
    assert FamilyParams(5, 2).in_verified_range
    assert FamilyParams(7, 5).in_verified_range


# -- the linear data ---------------------------------------------------------


def test_sigma_matrix_shape_and_orders(p52):
    for dim in (2, 3):
        act = sigma_matrix(p52, dim)
        m = act.matrix
        assert m.shape == (dim, dim)
        assert np.array_equal(np.diagonal(m), np.ones(dim, dtype=np.int64))
        idx = np.arange(dim - 1)
        assert np.array_equal(m[idx, idx + 1], np.ones(dim - 1, dtype=np.int64))
        # unipotent of order exactly p
        n = (m - np.eye(dim, dtype=np.int64)) % 5
        power = np.eye(dim, dtype=np.int64)
        for _ in range(dim):
            power = power @ n % 5
        assert not power.any()
    assert sigma_matrix(p52).matrix.shape == (2, 2)


def test_sigma_matrix_rejects_other_dims(p52):
    with pytest.raises(ParameterError):
        sigma_matrix(p52, 4)


def test_sigma_action_validation():
    with pytest.raises(ParameterError):
        SigmaAction(2 * np.eye(2, dtype=np.int64), 5)  # not unipotent
    jordan3 = np.eye(3, dtype=np.int64)
    jordan3[[0, 1], [1, 2]] = 1
    with pytest.raises(ParameterError):
        SigmaAction(jordan3, 2)  # unipotent but of order 4, not p = 2


def test_lambda_literal_and_validation(p52):
    form = build_lambda_literal(p52)
    b = form.pairing
    assert b[0, 1] == 1 and b[1, 0] == 4
    assert not ((b + b.T) % 5).any()
    with pytest.raises(ParameterError):
        LambdaForm(np.eye(3, dtype=np.int64), 5)  # diagonal values
    skew = np.zeros((3, 3), dtype=np.int64)
    skew[0, 1] = 2
    skew[1, 0] = 2
    with pytest.raises(ParameterError):
        LambdaForm(skew, 5)  # symmetric, not alternating
    wrong = np.zeros((3, 3), dtype=np.int64)
    wrong[0, 1] = 2
    wrong[1, 0] = 3
    with pytest.raises(ParameterError):
        LambdaForm(wrong, 5)  # alternating but wrongly normalized


def test_lambda_equivariance_only_at_r2():
    """The bidiagonal action preserves the minimal form exactly at r = 2."""
    for r, expected in ((2, True), (3, False)):
        params = FamilyParams(5, r)
        m = sigma_matrix(params, r + 1).matrix
        b = build_lambda_literal(params).pairing
        preserved = np.array_equal(m @ b @ m.T % 5, b % 5)
        assert preserved is expected or preserved == expected


# -- the family members ------------------------------------------------------


@pytest.mark.parametrize("p,r", [(5, 2), (5, 3), (7, 2)])
def test_build_gr_structure(p, r):
    g = build_gr(FamilyParams(p, r))
    assert g.order == p ** (r + 1)
    assert g.exponent_of() == p
    center = g.center()
    assert center.order == p
    assert g.generator(r + 1) in center
    assert not g.full_subgroup().is_abelian()


def test_sigma_star_is_dual_homomorphism(p52):
    g = build_gr(p52)
    c = sigma_star(g)
    assert c.degree == 1
    assert int(c.value(g.generator(1))) == 1
    assert int(c.value(g.generator(2))) == 0
    assert int(c.value(g.generator(3))) == 0
    assert differential_is_zero(c)


# -- rank-2 classification ---------------------------------------------------


def test_classify_52(p52):
    cls = classify_rank2(p52)
    assert len(cls.type_a) == 1 and len(cls.type_b) == 5
    assert cls.ambient.order == 25
    assert cls.type_a[0].elements == cls.ambient.elements
    g = cls.ambient.parent
    center = g.center()
    for sub in cls.type_b:
        assert sub.order == 25
        assert all(i in sub for i in center.elements)


def test_classify_53():
    cls = classify_rank2(FamilyParams(5, 3))
    assert len(cls.type_a) == 31  # the planes of the elementary abelian part
    assert len(cls.type_b) == 25
    assert cls.ambient.order == 125


# -- the certified cover at (5, 2) -------------------------------------------


def test_eta52_certificate(cert52):
    assert cert52.mode == "literal"
    assert cert52.certified
    assert cert52.lambda_attained
    assert not cert52.fully_extraspecial
    preds = cert52.predicates
    for name in (
        "order",
        "exponent_p",
        "kernel_central",
        "quotient_matches",
        "lambda_pairing",
        "lambda_pairing_satisfiable",
        "pullbacks_dichotomy",
        "non_split",
    ):
        assert preds[name] is True, name
    assert preds["pullbacks_extraspecial"] is False
    assert cert52.ghat.order == 625
    assert cert52.kernel.order == 5
    assert cert52.kernel.is_central()


def test_eta52_pairing_relation(cert52):
    ghat = cert52.ghat
    assert ghat.commutator(ghat.generator(2), ghat.generator(3)) == (
        ghat.generator(4)
    )


def test_eta52_plane_survey(cert52):
    report = cert52.pullback_report
    assert len(report) == 5
    kinds = sorted(e["kind"] for e in report)
    assert kinds == ["extraspecial"] * 4 + ["split_elementary"]
    for e in report:
        assert e["order"] == 125 and e["exponent"] == 5
    degenerate = next(e for e in report if e["kind"] == "split_elementary")
    # the one abelian-preimage plane is <sigma a_1, a_2>
    assert degenerate["plane"] == (1, 1, 0)


def test_eta52_quotient_map_is_homomorphism(cert52):
    ghat, base = cert52.ghat, cert52.base
    qm = cert52.quotient_map
    t_hat = ghat.cayley_table().astype(np.int64)
    t_base = base.cayley_table().astype(np.int64)
    assert np.array_equal(qm[t_hat], t_base[qm[:, None], qm[None, :]])


def test_eta52_cocycle_closed_nonzero_nontrivial(cert52):
    z = cert52.cocycle
    assert z.degree == 2
    assert z.group.order == 125
    assert z.table.any()
    assert differential_is_zero(z)
    # non-splitness is mirrored by a nonzero cohomology class
    cert = is_coboundary(z)
    assert cert.status == NOT_COBOUNDARY


def test_eta52_cocycle_class_survives_section_change(cert52, rng):
    """Re-lifting through a random normalized section only shifts the
    cocycle by a coboundary."""
    z = cert52.cocycle
    ghat = cert52.ghat
    p, q = 5, 125
    offsets = rng.integers(0, p, size=q)
    offsets[0] = 0
    lifts = np.arange(q, dtype=np.int64) * p + offsets
    t_hat = ghat.cayley_table().astype(np.int64)
    prod = t_hat[np.ix_(lifts[1:], lifts[1:])]
    twisted_table = (prod % p - offsets[prod // p]) % p
    twisted = Cochain(z.domain, 2, twisted_table)
    diff = twisted - z
    cert = is_coboundary(diff)
    assert cert.status == IS_COBOUNDARY


def test_construct_eta_is_deterministic(p52, cert52):
    again = construct_eta(p52)
    assert again.tails == cert52.tails
    assert again.mode == cert52.mode
    assert format_presentation(again.ghat.pcp) == format_presentation(
        cert52.ghat.pcp
    )


# -- pullbacks ---------------------------------------------------------------


def test_pullback_over_trivial_subgroup(cert52):
    sub = cert52.base.subgroup_generated([])
    total, kernel = pullback_extension(cert52, sub)
    assert total.order == 5
    assert kernel.order == 5


def test_pullback_over_full_base(cert52):
    total, kernel = pullback_extension(cert52, cert52.base.full_subgroup())
    assert total.order == 625
    assert kernel.order == 5
    assert kernel.is_central()


def test_pullback_over_plane(cert52):
    plane = classify_rank2(cert52.params).type_b[0]
    total, kernel = pullback_extension(cert52, plane)
    assert total.order == 125
    assert kernel.order == 5


def test_pullback_rejects_foreign_subgroup(cert52):
    cyclic125 = make_group(
        PcPresentation(5, 3, {1: ((2, 1),), 2: ((3, 1),)}, {})
    )
    with pytest.raises(ClassificationError):
        pullback_extension(cert52, cyclic125.full_subgroup())


# -- the certified cover at (5, 3) -------------------------------------------


def test_eta53_certificate_without_pairing(cert53):
    assert cert53.mode == "search"
    assert cert53.certified
    assert not cert53.lambda_attained
    preds = cert53.predicates
    assert preds["lambda_pairing"] is False
    assert preds["lambda_pairing_satisfiable"] is False
    assert preds["non_split"] is True
    assert preds["pullbacks_dichotomy"] is True
    # with the pairing unattainable no plane degenerates: strict survey holds
    assert cert53.fully_extraspecial
    assert len(cert53.pullback_report) == 25
    assert all(e["kind"] == "extraspecial" for e in cert53.pullback_report)


def test_eta53_cover_is_the_tower(cert53):
    """The lex-least certified cover of the r = 3 member is the r = 4 member."""
    assert cert53.tails == {("c", 4, 1): 1}
    assert format_presentation(cert53.ghat.pcp) == format_presentation(
        chain_pcp(5, 4)
    )


def test_eta53_cocycle_nontrivial(cert53):
    cert = is_coboundary(cert53.cocycle)
    assert cert.status == NOT_COBOUNDARY


# -- failure reporting -------------------------------------------------------


def test_construct_eta_failure_carries_trace(p52, monkeypatch):
    import cohomoforge.family as fam

    monkeypatch.setattr(fam, "_gate_passed", lambda preds: False)
    with pytest.raises(CertificationError) as exc_info:
        fam.construct_eta(p52)
    trace = exc_info.value.trace
    assert trace
    for entry in trace:
        assert set(entry) == {"tails", "predicates", "mode"}


# -- serialization -----------------------------------------------------------


def test_eta_to_json_round(cert52, cert53):
    doc = eta_to_json(cert52)
    assert doc["schema"] == "eta.v1"
    assert doc["prime"] == 5 and doc["r"] == 2
    assert doc["certified"] is True
    assert doc["fully_extraspecial"] is False
    assert doc["lambda_attained"] is True
    assert len(doc["cocycle_digest"]) == 64
    dumped = json.dumps(doc, sort_keys=True)
    assert dumped == json.dumps(eta_to_json(cert52), sort_keys=True)
    doc3 = eta_to_json(cert53)
    assert doc3["lambda_attained"] is False
    assert doc3["certified"] is True
    assert doc3["tails"] == [["c", 4, 1, 1]]
