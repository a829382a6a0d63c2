"""A one-parameter family of p-groups and their certified central covers.

For a prime ``p`` and ``1 < r < p-1`` the family member ``G_r`` is the
semidirect product of a cyclic group of order ``p`` acting on an elementary
abelian group ``<a_1, .., a_r>`` through a single unipotent Jordan block:
``[a_j, sigma] = a_{j+1}`` for ``j < r``.  These groups have order
``p^(r+1)``, exponent ``p``, and center ``<a_r>`` of rank 1.

The *cover* ``Ghat_r`` is a central extension of ``G_r`` by one more
generator ``a_{r+1}``, certified by machine-checked predicates:

- C1: order ``p^(r+2)`` and exponent ``p``;
- C2: ``<a_{r+1}>`` central with quotient exactly ``G_r`` (index-aligned);
- C3: the extension does not split (no complement);
- C4: the lifted commutator ``[a_{r-1}, a_r]`` equals ``a_{r+1}``;
- C5: the pullback over every rank-2 subgroup not inside ``<a_1..a_r>``
  is either extraspecial of order ``p^3`` and exponent ``p`` or (on
  exactly one plane, forced by C4 -- see ``_verify_predicates``) split
  elementary abelian; both possibilities trivialize the restrictions the
  depth argument needs.  The strict all-extraspecial reading is recorded
  in the certificate but provably incompatible with C4.

C4 itself is only attainable at ``r = 2``: a cover has order ``p^(r+2)``
and so nilpotency class at most ``r + 1``, which forces lifted commutators
from the ``(r-1)``-th and ``r``-th lower-central layers into
``gamma_{2r-1} = 1`` once ``r >= 3``.  The constraint solve proves this
per-instance (the pinned system is infeasible); certification then drops
C4 from the gate, records ``lambda_pairing_satisfiable: False``, and the
search continues on C1-C3 + C5.  At ``r = 3`` the certified cover is the
next family member ``G_4`` itself (the tower extension), with every
pullback extraspecial.

Construction tries a literal twisted product first: the alternating form
``lambda`` with ``lambda(a_{r-1}, a_r) = a_{r+1}`` twists the abelian part,
and the bidiagonal action extends when it preserves the form (this holds
exactly at ``r = 2``).  Otherwise every consistent assignment of central
tails to the relations of ``G_r`` is enumerated, filtered as above, and
the lexicographically least satisfying tail vector wins, making the
result deterministic.  Failure to certify raises with the full predicate
trace rather than returning a partial object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cochains import Cochain, cochain_to_json, extension_to_cocycle
from .gfp import FpMatrix, inverse_mod, is_prime, kernel_basis, solve_linear
from .pcgroup import (
    FiniteGroup,
    PcPresentation,
    Subgroup,
    Word,
    format_presentation,
    is_extraspecial,
    make_group,
    subgroup_presentation,
)

__all__ = [
    "CertificationError",
    "ClassificationError",
    "EtaCertificate",
    "FamilyParams",
    "LambdaForm",
    "ParameterError",
    "Rank2Classification",
    "SigmaAction",
    "build_gr",
    "build_lambda_literal",
    "classify_rank2",
    "construct_eta",
    "eta_to_json",
    "pullback_extension",
    "sigma_matrix",
    "sigma_star",
]


class ParameterError(ValueError):
    """Family parameters outside the supported range."""


class CertificationError(RuntimeError):
    """No cover candidate satisfied every certificate predicate.

    Carries the per-candidate predicate outcomes in :attr:`trace`.
    """

    def __init__(self, message: str, trace: List[dict]):
        super().__init__(message)
        self.trace = trace


class ClassificationError(RuntimeError):
    """A rank-2 subgroup fit neither classification case."""


# ---------------------------------------------------------------------------
# Parameters and linear data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyParams:
    """Family coordinates: the prime and the chain length.

    The verified range is ``p > 3`` prime and ``1 < r < p - 1``.  With
    ``experimental_range`` set, ``p = 3`` and ``r >= p - 1`` are allowed;
    downstream certification then reports rather than asserts.
    """

    prime: int
    r: int
    experimental_range: bool = False

    def __post_init__(self) -> None:
        p, r = self.prime, self.r
        if not is_prime(p):
            raise ParameterError(f"prime must be prime, got {p}")
        if r < 2:
            raise ParameterError(f"r must be at least 2, got {r}")
        if self.experimental_range:
            return
        if p <= 3:
            raise ParameterError(
                f"p = {p} needs experimental_range (verified range is p > 3)"
            )
        if r >= p - 1:
            raise ParameterError(
                f"r = {r} needs experimental_range (verified range is "
                f"1 < r < p - 1 = {p - 1})"
            )

    @property
    def in_verified_range(self) -> bool:
        return self.prime > 3 and 1 < self.r < self.prime - 1


@dataclass(frozen=True)
class SigmaAction:
    """The unipotent single-block action on row vectors: ``a_i -> a_i a_{i+1}``."""

    matrix: np.ndarray
    modulus: int

    def __post_init__(self) -> None:
        m = self.matrix
        p = self.modulus
        dim = m.shape[0]
        nilpotent = (m - np.eye(dim, dtype=np.int64)) % p
        power = np.eye(dim, dtype=np.int64)
        for _ in range(dim):
            power = power @ nilpotent % p
        if power.any():
            raise ParameterError("(matrix - I)^dim must vanish")
        mp = np.eye(dim, dtype=np.int64)
        for _ in range(p):
            mp = mp @ m % p
        if not np.array_equal(mp, np.eye(dim, dtype=np.int64)):
            raise ParameterError("matrix^p must be the identity")


@dataclass(frozen=True)
class LambdaForm:
    """Alternating pairing on ``a_1..a_{r+1}`` with values in ``<a_{r+1}>``."""

    pairing: np.ndarray
    modulus: int

    def __post_init__(self) -> None:
        b = self.pairing
        p = self.modulus
        if np.diagonal(b).any():
            raise ParameterError("pairing must vanish on the diagonal")
        if ((b + b.T) % p).any():
            raise ParameterError("pairing must be alternating")
        r = b.shape[0] - 1
        if int(b[r - 2, r - 1]) % p != 1:
            raise ParameterError(
                "pairing must send (a_{r-1}, a_r) to a_{r+1} exactly once"
            )


def sigma_matrix(params: FamilyParams, dim: Optional[int] = None) -> SigmaAction:
    """Action matrix on ``dim`` basis vectors (defaults to ``r``).

    Row-vector convention: row ``i`` of the matrix is the image of ``a_i``,
    so the matrix is upper bidiagonal with unit diagonal and superdiagonal.
    """
    p, r = params.prime, params.r
    if dim is None:
        dim = r
    if dim not in (r, r + 1):
        raise ParameterError(f"dim must be r or r+1, got {dim}")
    m = np.eye(dim, dtype=np.int64)
    idx = np.arange(dim - 1)
    m[idx, idx + 1] = 1
    return SigmaAction(m, p)


def build_gr(params: FamilyParams) -> FiniteGroup:
    """The family member: generators ``sigma, a_1, .., a_r``; order p^(r+1).

    Presentation generator ``1`` is ``sigma`` and generator ``j+1`` is
    ``a_j``; all p-th powers are trivial and ``[a_j, sigma] = a_{j+1}``
    for ``j < r``.
    """
    p, r = params.prime, params.r
    ctails = {(j + 1, 1): ((j + 2, 1),) for j in range(1, r)}
    return make_group(PcPresentation(p, r + 1, {}, ctails))


def build_lambda_literal(params: FamilyParams) -> LambdaForm:
    """The minimal alternating form: ``(a_{r-1}, a_r) -> 1``, rest zero."""
    p, r = params.prime, params.r
    b = np.zeros((r + 1, r + 1), dtype=np.int64)
    b[r - 2, r - 1] = 1
    b[r - 1, r - 2] = p - 1
    return LambdaForm(b, p)


def sigma_star(g: FiniteGroup) -> Cochain:
    """Dual of the leading generator: the homomorphism reading the sigma digit."""
    from .cochains import generator_dual

    return generator_dual(g, 1)


# ---------------------------------------------------------------------------
# Tail vectors: central-extension candidates as exponent assignments
# ---------------------------------------------------------------------------

TailKey = Tuple[str, int, int]  # ("p", t, 0) or ("c", t, s)


def _tail_keys(r: int) -> List[TailKey]:
    keys: List[TailKey] = [("p", t, 0) for t in range(1, r + 2)]
    for t in range(2, r + 2):
        for s in range(1, t):
            keys.append(("c", t, s))
    return keys


def _base_words(g: FiniteGroup) -> Dict[TailKey, Word]:
    words: Dict[TailKey, Word] = {}
    for t, w in g.pcp.power_tails.items():
        words[("p", t, 0)] = w
    for (t, s), w in g.pcp.commutator_tails.items():
        words[("c", t, s)] = w
    return words


def _cover_pcp(
    params: FamilyParams, g: FiniteGroup, tails: Dict[TailKey, int]
) -> PcPresentation:
    """Presentation of a candidate cover: base relations with central tails.

    The new generator ``r+2`` is the central fiber; each base relation's
    word gains a ``(r+2, exponent)`` letter when its tail is nonzero.
    """
    p, r = params.prime, params.r
    z = r + 2
    words = _base_words(g)
    ptails = {}
    for t in range(1, r + 2):
        w = list(words.get(("p", t, 0), ()))
        e = tails.get(("p", t, 0), 0) % p
        if e:
            w.append((z, e))
        if w:
            ptails[t] = tuple(w)
    ctails = {}
    for t in range(2, r + 2):
        for s in range(1, t):
            w = list(words.get(("c", t, s), ()))
            e = tails.get(("c", t, s), 0) % p
            if e:
                w.append((z, e))
            if w:
                ctails[(t, s)] = tuple(w)
    return PcPresentation(p, r + 2, ptails, ctails)


def _literal_tails(params: FamilyParams) -> Optional[Dict[TailKey, int]]:
    """Tail vector of the literal twisted product, when it is a group with
    the bidiagonal action as an automorphism; None when validation fails.

    The twisted product on vectors is ``x * y = x + y + (1/2) l(x, y)`` with
    the value placed on the last coordinate; it is a group for any
    alternating ``l``, and a linear map ``M`` is an automorphism exactly
    when it preserves the form (``M l M^T = l``).  The action must also
    have order dividing ``p``; both are checked exactly.
    """
    p, r = params.prime, params.r
    lam = build_lambda_literal(params).pairing
    action = sigma_matrix(params, r + 1)
    m = action.matrix
    preserved = np.array_equal((m @ lam @ m.T) % p, lam % p)
    if not preserved:
        return None
    inv2 = inverse_mod(2, p)
    tails: Dict[TailKey, int] = {}
    # conjugation by sigma: a_i -> row_i(M), written in normal form; the
    # only central correction comes from the (1/2) l cross-term
    for i in range(1, r):  # [a_i, sigma] = a_{i+1} * z^(-l(e_i, e_{i+1})/2)
        e = (-inv2 * int(lam[i - 1, i])) % p
        if e:
            tails[("c", i + 1, 1)] = e
    tails[("c", r + 1, 1)] = 1  # [a_r, sigma] = a_{r+1} in the literal cover
    for t in range(2, r + 2):  # [a_t, a_s] = z^(l(e_t, e_s))
        for s in range(1, t):
            e = int(lam[t - 1, s - 1]) % p
            if e:
                tails[("c", t + 1, s + 1)] = e
    return tails


# ---------------------------------------------------------------------------
# Consistency-driven tails search
# ---------------------------------------------------------------------------


def _defect_vector(
    params: FamilyParams,
    g: FiniteGroup,
    tails: Dict[TailKey, int],
    overlap_index: Dict[tuple, int],
) -> np.ndarray:
    """Central digits of all failing collection overlaps for one candidate.

    New overlap kinds are appended to ``overlap_index`` as discovered, so a
    family of probes shares one coordinate system.
    """
    pcp = _cover_pcp(params, g, tails)
    cand = FiniteGroup(pcp, check=False)
    defects = cand.consistency_defects()
    for d in defects:
        key = (d["kind"], tuple(d["indices"]))
        if key not in overlap_index:
            overlap_index[key] = len(overlap_index)
    vec = np.zeros(max(len(overlap_index), 1), dtype=np.int64)
    for d in defects:
        lhs, rhs = d["lhs"], d["rhs"]
        if lhs[:-1] != rhs[:-1]:  # pragma: no cover - central candidates only
            raise CertificationError(
                "candidate defect is not central; the tails model does not "
                "apply",
                [],
            )
        pos = overlap_index[(d["kind"], tuple(d["indices"]))]
        vec[pos] = (lhs[-1] - rhs[-1]) % params.prime
    return vec


def _consistent_tail_space(
    params: FamilyParams, g: FiniteGroup, *, pin_lambda: bool
) -> Optional[Tuple[np.ndarray, List[np.ndarray], List[TailKey]]]:
    """Particular solution and kernel basis of the consistency constraints.

    The defect of every collection overlap is an affine-linear function of
    the tail vector (tails enter relations as central letters, and central
    letters accumulate additively during collection).  The map is probed on
    unit vectors, then solved together with the structural pins: power
    tails vanish (exponent p) and, when ``pin_lambda`` is set, the
    ``(a_r, a_{r-1})`` commutator tail is ``-1`` (pairing normalization).

    Returns ``None`` when the pinned system is infeasible.  With the
    pairing pin this happens for every ``r >= 3``: lifts of
    ``gamma_{r-1}`` and ``gamma_r`` elements land in
    ``gamma_{2r-1}`` of the cover, which is trivial as soon as
    ``2r-1 >= r+2`` since a group of order ``p^(r+2)`` has class at most
    ``r+1``.  The infeasible solve is the machine half of that proof.
    """
    p, r = params.prime, params.r
    keys = _tail_keys(r)
    k = len(keys)
    overlap_index: Dict[tuple, int] = {}
    zero = {key: 0 for key in keys}
    probes = [_defect_vector(params, g, zero, overlap_index)]
    for key in keys:
        probe = dict(zero)
        probe[key] = 1
        probes.append(_defect_vector(params, g, probe, overlap_index))
    width = max(len(overlap_index), 1)
    base = np.zeros(width, dtype=np.int64)
    base[: probes[0].size] = probes[0]
    columns = []
    for vec in probes[1:]:
        col = np.zeros(width, dtype=np.int64)
        col[: vec.size] = vec
        columns.append((col - base) % p)
    rows = [np.array([c[i] for c in columns], dtype=np.int64) for i in range(width)]
    rhs = [(-int(base[i])) % p for i in range(width)]
    lam_key = ("c", r + 1, r)
    for j, key in enumerate(keys):
        if key[0] == "p" or (pin_lambda and key == lam_key):
            row = np.zeros(k, dtype=np.int64)
            row[j] = 1
            rows.append(row)
            rhs.append((p - 1) if key == lam_key else 0)
    matrix = FpMatrix(np.array(rows, dtype=np.int64), p)
    particular = solve_linear(matrix, np.array(rhs, dtype=np.int64))
    if particular is None:
        return None
    kernel = kernel_basis(matrix)
    return particular, kernel, keys


def _section_change_span(
    params: FamilyParams, g: FiniteGroup, keys: List[TailKey]
) -> List[np.ndarray]:
    """Tail changes induced by re-choosing generator lifts.

    Twisting the lift of base generator ``u`` by the central generator
    leaves powers and commutators unchanged but rewrites each relation's
    base word, shifting the word's central reading by its multiplicity of
    letter ``u``; the change is linear in the twist.
    """
    p, r = params.prime, params.r
    words = _base_words(g)
    span = []
    for u in range(1, r + 2):
        delta = np.zeros(len(keys), dtype=np.int64)
        for j, key in enumerate(keys):
            mult = sum(e for t, e in words.get(key, ()) if t == u)
            delta[j] = (-mult) % p
        if delta.any():
            span.append(delta)
    return span


def _candidate_tail_vectors(
    params: FamilyParams, g: FiniteGroup, *, pin_lambda: bool = True
) -> Optional[List[Dict[TailKey, int]]]:
    """All consistent candidates, one lex-least representative per class.

    Classes are cosets of the section-change span inside the affine space
    of consistent pinned tail vectors; representatives come back sorted.
    Returns ``None`` when the pinned constraint system is infeasible.
    """
    p, _ = params.prime, params.r
    space = _consistent_tail_space(params, g, pin_lambda=pin_lambda)
    if space is None:
        return None
    particular, kernel, keys = space
    span = _section_change_span(params, g, keys)
    solutions = set()
    coeff_count = len(kernel)
    for idx in range(p**coeff_count):
        coeffs = []
        v = idx
        for _ in range(coeff_count):
            coeffs.append(v % p)
            v //= p
        vec = particular.copy()
        for c, b in zip(coeffs, kernel):
            vec = (vec + c * b) % p
        solutions.add(tuple(int(x) for x in vec))
    reps = set()
    span_count = len(span)
    for sol in solutions:
        best = sol
        for idx in range(p**span_count):
            coeffs = []
            v = idx
            for _ in range(span_count):
                coeffs.append(v % p)
                v //= p
            shifted = np.array(sol, dtype=np.int64)
            for c, b in zip(coeffs, span):
                shifted = (shifted + c * b) % p
            cand = tuple(int(x) for x in shifted)
            if cand in solutions and cand < best:
                best = cand
        reps.add(best)
    ordered = sorted(reps)
    out = []
    for rep in ordered:
        out.append({key: val for key, val in zip(keys, rep) if val})
    return out


# ---------------------------------------------------------------------------
# The certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EtaCertificate:
    """A certified central cover of a family member.

    ``quotient_map[i]`` is the base element index of cover element ``i``
    (division by p: the fiber generator is last, so indices align).  The
    ``cocycle`` is the section cocycle of the extension, a closed degree-2
    cochain over a group presented identically to ``base``.

    ``certified`` reflects the gating predicates (order, exponent,
    central kernel, aligned quotient, pairing normalization, pullback
    dichotomy, non-splitness).  The stricter all-pullbacks-extraspecial
    reading is recorded in ``predicates`` and ``pullback_report`` but
    does not gate: see :func:`_verify_predicates` for why it cannot hold
    together with the pairing normalization.  When the pairing
    normalization itself is provably unsatisfiable (every member with
    ``r >= 3``), ``predicates`` records
    ``lambda_pairing_satisfiable: False`` and the pairing drops out of
    the gate; ``lambda_attained`` exposes the outcome either way.
    """

    params: FamilyParams
    ghat: FiniteGroup
    base: FiniteGroup
    kernel: Subgroup
    quotient_map: np.ndarray
    cocycle: Cochain
    predicates: Dict[str, Optional[bool]]
    pullback_report: Tuple[Dict[str, object], ...]
    tails: Dict[TailKey, int]
    mode: str  # "literal" or "search"

    @property
    def certified(self) -> bool:
        return _gate_passed(self.predicates)

    @property
    def fully_extraspecial(self) -> bool:
        """Strict reading: every out-of-part plane pullback extraspecial."""
        return bool(self.predicates.get("pullbacks_extraspecial"))

    @property
    def lambda_attained(self) -> bool:
        """Whether the certified cover realizes the pairing normalization."""
        return bool(self.predicates.get("lambda_pairing"))


def _verify_predicates(
    params: FamilyParams,
    g: FiniteGroup,
    ghat: FiniteGroup,
    type_b: Sequence[Subgroup],
    require_lambda: bool = True,
) -> Tuple[Dict[str, Optional[bool]], Tuple[Dict[str, object], ...]]:
    """Evaluate the certificate predicates on one candidate cover.

    Cheap structural checks run first and short-circuit, so rejected
    candidates stay inexpensive; skipped predicates are reported as
    ``None`` in the trace.  The second return value is the per-plane
    pullback report.  With ``require_lambda`` false a failed pairing
    check is recorded but does not short-circuit (used when the pairing
    normalization is known to be unsatisfiable, see
    :func:`_consistent_tail_space`).

    The plane survey deserves a note.  For a cover with the pairing
    normalization, bilinearity of commutation against the central fiber
    forces the lifted commutator ``[a_r, b]`` to vanish on exactly one of
    the planes ``<b, a_r>``: writing the relevant relation tails as
    ``y2 = [a_r, sigma]`` and ``y3 = [a_r, a_{r-1}]``, the commutator with
    a lift of ``b = sigma^k x`` reads ``k*y2 + x_{r-1}*y3`` in the fiber,
    and the normalization pins ``y3 != 0``, so one residue of
    ``x_{r-1}/k`` always kills it.  The pullback over that plane is
    elementary abelian and the extension over it splits; over every other
    plane the pullback is nonabelian of order p^3 and exponent p, hence
    extraspecial.  Both outcomes trivialize restrictions of products with
    the sigma-dual, which is what the depth argument consumes, so
    certification gates on the dichotomy (``pullbacks_dichotomy``) while
    the strict all-extraspecial reading is recorded separately
    (``pullbacks_extraspecial``) and is expected to be False.
    """
    p, r = params.prime, params.r
    z_gen = ghat.generator(r + 2)
    kernel = ghat.subgroup_generated([z_gen])
    preds: Dict[str, Optional[bool]] = {
        "order": None,
        "exponent_p": None,
        "kernel_central": None,
        "quotient_matches": None,
        "lambda_pairing": None,
        "pullbacks_dichotomy": None,
        "pullbacks_extraspecial": None,
        "non_split": None,
    }
    planes: Tuple[Dict[str, object], ...] = ()
    preds["order"] = ghat.order == p ** (r + 2)
    if not preds["order"]:
        return preds, planes
    preds["exponent_p"] = ghat.exponent_of() == p
    if not preds["exponent_p"]:
        return preds, planes
    preds["kernel_central"] = kernel.order == p and kernel.is_central()
    if not preds["kernel_central"]:
        return preds, planes
    stripped = _strip_last_generator(ghat.pcp)
    preds["quotient_matches"] = format_presentation(stripped) == (
        format_presentation(g.pcp)
    )
    if not preds["quotient_matches"]:
        return preds, planes
    preds["lambda_pairing"] = (
        ghat.commutator(ghat.generator(r), ghat.generator(r + 1)) == z_gen
    )
    if require_lambda and not preds["lambda_pairing"]:
        return preds, planes
    report = []
    for sub in type_b:
        total, ker = _pullback_via(ghat, p, sub)
        # label the plane by its least element outside the abelian part
        witness = next(
            sub.parent.element_of_index(i)
            for i in sub.elements
            if sub.parent.element_of_index(i)[0]
        )
        entry: Dict[str, object] = {
            "plane": tuple(int(d) for d in witness),
            "order": total.order,
            "exponent": total.exponent_of(),
        }
        if total.full_subgroup().is_abelian():
            entry["kind"] = (
                "split_elementary"
                if entry["exponent"] == p
                and total.has_complement(ker) is not None
                else "other"
            )
        else:
            entry["kind"] = (
                "extraspecial"
                if entry["order"] == p**3
                and entry["exponent"] == p
                and is_extraspecial(total)
                else "other"
            )
        report.append(entry)
    planes = tuple(report)
    preds["pullbacks_extraspecial"] = all(
        e["kind"] == "extraspecial" for e in report
    )
    preds["pullbacks_dichotomy"] = all(
        e["kind"] in ("extraspecial", "split_elementary") for e in report
    )
    if not preds["pullbacks_dichotomy"]:
        return preds, planes
    preds["non_split"] = ghat.has_complement(kernel) is None
    return preds, planes


_GATE_PREDICATES = (
    "order",
    "exponent_p",
    "kernel_central",
    "quotient_matches",
    "lambda_pairing",
    "pullbacks_dichotomy",
    "non_split",
)


def _gate_passed(preds: Dict[str, Optional[bool]]) -> bool:
    """Gate check; the pairing predicate only gates while satisfiable.

    When the constraint solve has proved that no consistent cover can
    realize the pairing normalization (every ``r >= 3``), the certificate
    records ``lambda_pairing: False`` alongside
    ``lambda_pairing_satisfiable: False`` and the remaining predicates
    decide certification.  This keeps the downstream restriction
    arguments available - they consume the pullback dichotomy and the
    non-split witness, not the pairing itself - while the report stays
    explicit about what could not be achieved.
    """
    satisfiable = preds.get("lambda_pairing_satisfiable", True)
    for name in _GATE_PREDICATES:
        if name == "lambda_pairing" and not satisfiable:
            continue
        if not preds.get(name):
            return False
    return True


def _strip_last_generator(pcp: PcPresentation) -> PcPresentation:
    n = pcp.n_gens
    strip = lambda w: tuple((t, e) for t, e in w if t != n)
    ptails = {}
    for t, w in pcp.power_tails.items():
        if t == n:
            continue
        s = strip(w)
        if s:
            ptails[t] = s
    ctails = {}
    for (t, s), w in pcp.commutator_tails.items():
        if t == n or s == n:
            continue
        ss = strip(w)
        if ss:
            ctails[(t, s)] = ss
    return PcPresentation(pcp.prime, n - 1, ptails, ctails)


def _pullback_via(
    ghat: FiniteGroup, p: int, sub: Subgroup
) -> Tuple[FiniteGroup, Subgroup]:
    """Pullback of the cover over a base subgroup (fiber-aligned indices)."""
    preimage_ids = []
    for b in sub.elements:
        preimage_ids.extend(range(b * p, b * p + p))
    preimage_ids.sort()
    gens = ghat._greedy_generators(preimage_ids)
    preimage = ghat.subgroup_generated(gens)
    if preimage.order != sub.order * p:  # pragma: no cover - sanity
        raise ClassificationError("preimage closure has unexpected order")
    pcp, _, embed = subgroup_presentation(preimage)
    total = make_group(pcp)
    fiber_pos = int(np.nonzero(embed == 1)[0][0])
    kernel = total.subgroup_generated([total.element_of_index(fiber_pos)])
    return total, kernel


def construct_eta(params: FamilyParams) -> EtaCertificate:
    """Build and certify the cover of one family member.

    The literal twisted product is tried first; when its validation or
    certification fails, the consistent-tails search runs and candidates
    are checked in lexicographic order of their tail vectors.  The first
    candidate passing every gating predicate wins.  When none passes, the
    error carries each candidate's predicate outcomes.

    The search first pins the pairing normalization.  If that pinned
    system is infeasible - which the constraint solve proves for every
    ``r >= 3``, since the cover's nilpotency class caps the commutator
    ``[a_{r-1}, a_r]`` at the identity - the search reruns without the
    pin, and the resulting certificate carries
    ``lambda_pairing_satisfiable: False`` with the pairing predicate
    excluded from the gate (see :func:`_gate_passed`).
    """
    g = build_gr(params)
    classification = classify_rank2(params, group=g)
    type_b = classification.type_b
    literal = _literal_tails(params)
    trace: List[dict] = []
    if literal is not None:
        cert = _certify_candidates(
            params, g, type_b, "literal", [literal], trace, True
        )
        if cert is not None:
            return cert
    searched = _candidate_tail_vectors(params, g, pin_lambda=True)
    lambda_satisfiable = searched is not None
    if searched is None:
        searched = _candidate_tail_vectors(params, g, pin_lambda=False)
    if searched is None:
        raise CertificationError(
            f"no central extension of (p={params.prime}, r={params.r}) "
            "is consistent with exponent-p power pins",
            trace,
        )
    if literal is not None:
        searched = [c for c in searched if c != literal]
    cert = _certify_candidates(
        params, g, type_b, "search", searched, trace, lambda_satisfiable
    )
    if cert is not None:
        return cert
    raise CertificationError(
        f"no cover of (p={params.prime}, r={params.r}) satisfied the "
        f"gating predicates across {len(trace)} candidate(s)",
        trace,
    )


def _certify_candidates(
    params: FamilyParams,
    g: FiniteGroup,
    type_b: Sequence[Subgroup],
    mode: str,
    candidates: Sequence[Dict[TailKey, int]],
    trace: List[dict],
    lambda_satisfiable: bool,
) -> Optional[EtaCertificate]:
    for tails in candidates:
        pcp = _cover_pcp(params, g, tails)
        ghat = make_group(pcp)
        preds, planes = _verify_predicates(
            params, g, ghat, type_b, require_lambda=lambda_satisfiable
        )
        preds["lambda_pairing_satisfiable"] = lambda_satisfiable
        trace.append(
            {
                "tails": sorted((key, val) for key, val in tails.items()),
                "predicates": dict(preds),
                "mode": mode,
            }
        )
        if _gate_passed(preds):
            kernel = ghat.subgroup_generated([ghat.generator(params.r + 2)])
            cocycle = extension_to_cocycle(
                ghat, kernel, ghat.generator(params.r + 2)
            )
            return EtaCertificate(
                params=params,
                ghat=ghat,
                base=g,
                kernel=kernel,
                quotient_map=np.arange(ghat.order, dtype=np.int64)
                // params.prime,
                cocycle=cocycle,
                predicates=preds,
                pullback_report=planes,
                tails=dict(tails),
                mode=mode,
            )
    return None


def pullback_extension(
    cert: EtaCertificate, sub: Subgroup
) -> Tuple[FiniteGroup, Subgroup]:
    """Pullback of the certified extension over a subgroup of the base.

    Returns the preimage of ``sub`` under the quotient map as a standalone
    group (fiber generator last) together with its fiber subgroup.
    """
    if sub.parent is not cert.base and (
        format_presentation(sub.parent.pcp)
        != format_presentation(cert.base.pcp)
    ):
        raise ClassificationError(
            "subgroup does not live in the certificate's base group"
        )
    if sub.order == 1:
        pcp, _, embed = subgroup_presentation(cert.kernel)
        total = make_group(pcp)
        return total, total.full_subgroup()
    return _pullback_via(cert.ghat, cert.params.prime, sub)


# ---------------------------------------------------------------------------
# Rank-2 classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rank2Classification:
    """Partition of the rank-2 elementary abelian subgroups of a member.

    ``type_a``: inside the abelian part ``<a_1..a_r>`` with centralizer
    equal to that whole part.  ``type_b``: not inside it; each contains the
    center and is self-centralizing.
    """

    params: FamilyParams
    ambient: Subgroup  # <a_1, .., a_r>
    type_a: Tuple[Subgroup, ...]
    type_b: Tuple[Subgroup, ...]


def classify_rank2(
    params: FamilyParams, group: Optional[FiniteGroup] = None
) -> Rank2Classification:
    """Classify every rank-2 elementary abelian subgroup of ``G_r``.

    Each subgroup's tag is verified against an explicit centralizer
    computation; a subgroup matching neither case raises, since the
    dichotomy is what downstream restriction arguments rely on.
    """
    g = group if group is not None else build_gr(params)
    r = params.r
    ambient = g.subgroup_generated([g.generator(i) for i in range(2, r + 2)])
    center = g.center()
    type_a: List[Subgroup] = []
    type_b: List[Subgroup] = []
    for sub in g.enumerate_elementary_abelian(2):
        inside = all(i in ambient for i in sub.elements)
        cent = g.centralizer(sub)
        if inside:
            if cent.elements != ambient.elements:
                raise ClassificationError(
                    f"subgroup {sub.elements[:4]}... lies in the abelian "
                    "part but its centralizer is not the whole part"
                )
            type_a.append(sub)
        else:
            contains_center = all(i in sub for i in center.elements)
            if not contains_center or cent.elements != sub.elements:
                raise ClassificationError(
                    f"subgroup {sub.elements[:4]}... escapes the abelian "
                    "part but is not a self-centralizing center-containing "
                    "plane"
                )
            type_b.append(sub)
    return Rank2Classification(
        params=params,
        ambient=ambient,
        type_a=tuple(type_a),
        type_b=tuple(type_b),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def eta_to_json(cert: EtaCertificate) -> dict:
    """Stable JSON view of a cover certificate."""
    tails = sorted(
        [list(key) + [val] for key, val in cert.tails.items()]
    )
    cocycle_doc = cochain_to_json(cert.cocycle)
    return {
        "schema": "eta.v1",
        "prime": cert.params.prime,
        "r": cert.params.r,
        "mode": cert.mode,
        "order": cert.ghat.order,
        "tails": tails,
        "predicates": dict(sorted(cert.predicates.items())),
        "pullback_planes": [
            {k: (list(v) if isinstance(v, tuple) else v) for k, v in e.items()}
            for e in cert.pullback_report
        ],
        "kernel_generator": list(cert.ghat.generator(cert.params.r + 2)),
        "cocycle_digest": cocycle_doc["table_digest"],
        "certified": cert.certified,
        "fully_extraspecial": cert.fully_extraspecial,
        "lambda_attained": cert.lambda_attained,
    }
