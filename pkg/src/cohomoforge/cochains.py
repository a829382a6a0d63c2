"""Normalized inhomogeneous cochains over F_p for small finite groups.

Cochains of degree ``n`` assign a residue to every ``n``-tuple of
*non-identity* group elements; tuples containing the identity implicitly
evaluate to zero (the normalized subcomplex, which the differential below
preserves).  Coefficients are the trivial module F_p throughout.

The module provides

- :class:`Cochain` with the fixed differential convention
  ``(df)(g_1, .., g_{n+1}) = f(g_2, ..) + sum_i (-1)^i f(.., g_i g_{i+1}, ..)
  + (-1)^{n+1} f(g_1, .., g_n)``,
- cup products, restriction to subgroups, and duals of presentation
  generators,
- both bridges between central extensions with fiber C_p and degree-2
  cocycles (:func:`extension_to_cocycle`, :func:`cocycle_to_extension`),
- :func:`is_coboundary`, a streaming certificate producer: it runs the rows
  of the relevant differential through an exact F_p row-space builder in a
  fixed lexicographic order and returns either a verified primitive or a
  reproducible inconsistency summary,
- :func:`h1_basis` and :func:`cohomology_dim` for low-degree dimensions.

Sizes are guarded: solves whose exact-elimination state would not fit the
configured budget raise :class:`~cohomoforge.pcgroup.ResourceBudgetError`
instead of degrading silently.  All computations are single-threaded and
deterministic; row blocks are generated eagerly but always inserted in the
global enumeration order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .gfp import FpMatrix, FpScalar, SparseRowStream, inverse_mod, kernel_basis
from .pcgroup import (
    FiniteGroup,
    PcPresentation,
    PresentationError,
    ResourceBudgetError,
    Subgroup,
    format_presentation,
)

__all__ = [
    "IS_COBOUNDARY",
    "NOT_COBOUNDARY",
    "Cochain",
    "CoboundaryCertificate",
    "DomainMismatchError",
    "NotClosedError",
    "certificate_to_json",
    "cochain_to_json",
    "cohomology_dim",
    "cocycle_to_extension",
    "cup",
    "differential",
    "differential_is_zero",
    "extension_to_cocycle",
    "generator_dual",
    "h1_basis",
    "is_coboundary",
    "quotient_by_last_generator",
    "restrict",
]

IS_COBOUNDARY = "IS_COBOUNDARY"
NOT_COBOUNDARY = "NOT_COBOUNDARY"

#: Largest number of table entries a single materialized cochain may have.
MATERIALIZE_CAP = 1 << 26

#: Default byte budget for one streaming solve (basis + null certificate).
DEFAULT_SOLVE_BUDGET = 1_500_000_000

#: Degree cap for certification solves and dimension computations.
MAX_SOLVE_DEGREE = 3

#: Nonzero-entry cap for embedding a full value table in JSON.
SPARSE_JSON_CAP = 4096


class NotClosedError(ValueError):
    """A cocycle-only operation received a cochain with nonzero boundary."""


class DomainMismatchError(ValueError):
    """Operands live over different groups, or over incompatible domains."""


# ---------------------------------------------------------------------------
# Evaluation domains: a group, or a subgroup viewed through its parent
# ---------------------------------------------------------------------------


class _Domain:
    """Uniform element/multiplication access for a group or a subgroup.

    Elements are addressed by *local* ids ``0..order-1`` with 0 the
    identity; for a subgroup the ordering is by parent index, so local ids
    are stable under re-wrapping.
    """

    __slots__ = (
        "group",
        "subgroup",
        "p",
        "order",
        "parent_ids",
        "_local_of_parent",
        "_cayley",
        "key",
    )

    def __init__(self, group: FiniteGroup, subgroup: Optional[Subgroup]):
        self.group = group
        self.subgroup = subgroup
        self.p = group.p
        if subgroup is None:
            self.order = group.order
            self.parent_ids = np.arange(group.order, dtype=np.int64)
            self._local_of_parent = None
            self.key = ("group", format_presentation(group.pcp))
        else:
            self.order = subgroup.order
            self.parent_ids = np.asarray(subgroup.elements, dtype=np.int64)
            lookup = np.full(group.order, -1, dtype=np.int64)
            lookup[self.parent_ids] = np.arange(self.order, dtype=np.int64)
            self._local_of_parent = lookup
            self.key = (
                "subgroup",
                format_presentation(group.pcp),
                tuple(subgroup.elements),
            )
        self._cayley = None

    @staticmethod
    def wrap(obj: Union[FiniteGroup, Subgroup, "_Domain"]) -> "_Domain":
        if isinstance(obj, _Domain):
            return obj
        if isinstance(obj, FiniteGroup):
            return _Domain(obj, None)
        if isinstance(obj, Subgroup):
            return _Domain(obj.parent, obj)
        raise TypeError(f"cannot build an evaluation domain from {type(obj)}")

    def __eq__(self, other) -> bool:
        return isinstance(other, _Domain) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def local_of_element(self, x: Tuple[int, ...]) -> int:
        parent_idx = self.group.index_of_element(x)
        if self._local_of_parent is None:
            return parent_idx
        local = int(self._local_of_parent[parent_idx])
        if local < 0:
            raise DomainMismatchError(
                f"element {x} is not in the cochain's domain"
            )
        return local

    def element_of_local(self, i: int) -> Tuple[int, ...]:
        return self.group.element_of_index(int(self.parent_ids[i]))

    def cayley(self) -> np.ndarray:
        """Local multiplication table ``T[x, y] = local id of x*y``."""
        if self._cayley is None:
            g = self.group
            if self.subgroup is None:
                self._cayley = g.cayley_table().astype(np.int64)
            elif g.has_cayley_budget:
                block = g.cayley_table()[np.ix_(self.parent_ids, self.parent_ids)]
                self._cayley = self._local_of_parent[block.astype(np.int64)]
            else:
                rows = np.empty((self.order, self.order), dtype=np.int64)
                for i in range(self.order):
                    x = self.element_of_local(i)
                    full = g.left_translation_table(x)[self.parent_ids]
                    rows[i] = self._local_of_parent[full]
                self._cayley = rows
            if self._cayley.min() < 0:  # pragma: no cover - closure guard
                raise DomainMismatchError("domain is not closed under product")
        return self._cayley

    def fingerprint(self) -> str:
        return hashlib.sha256(repr(self.key).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Cochains
# ---------------------------------------------------------------------------


def _table_dtype(p: int):
    return np.uint8 if p < 256 else np.int64


class Cochain:
    """A normalized cochain: dense value table over non-identity tuples.

    ``table[i1-1, .., in-1]`` is the value on the tuple of elements with
    local ids ``(i1, .., in)``; tuples containing the identity evaluate to
    zero implicitly.  Instances are immutable.
    """

    __slots__ = ("domain", "degree", "table")

    def __init__(self, domain, degree: int, table) -> None:
        dom = _Domain.wrap(domain)
        if degree < 0:
            raise ValueError(f"degree must be >= 0, got {degree}")
        m = dom.order - 1
        arr = np.asarray(table, dtype=np.int64) % dom.p
        if arr.shape != (m,) * degree:
            raise ValueError(
                f"table shape {arr.shape} != {(m,) * degree} for degree "
                f"{degree} over a domain of order {dom.order}"
            )
        arr = arr.astype(_table_dtype(dom.p))
        arr.setflags(write=False)
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "table", arr)

    def __setattr__(self, name, value):  # immutability
        raise AttributeError("Cochain is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, domain, degree: int) -> "Cochain":
        dom = _Domain.wrap(domain)
        shape = (dom.order - 1,) * degree
        return cls(dom, degree, np.zeros(shape, dtype=np.int64))

    @classmethod
    def constant(cls, domain, value: int) -> "Cochain":
        dom = _Domain.wrap(domain)
        return cls(dom, 0, np.asarray(value, dtype=np.int64))

    # -- basic accessors ----------------------------------------------------

    @property
    def group(self) -> FiniteGroup:
        return self.domain.group

    @property
    def subgroup(self) -> Optional[Subgroup]:
        return self.domain.subgroup

    @property
    def modulus(self) -> int:
        return self.domain.p

    def value(self, *elements: Tuple[int, ...]) -> FpScalar:
        """Evaluate on a tuple of elements (normal-form tuples)."""
        if len(elements) != self.degree:
            raise ValueError(
                f"expected {self.degree} arguments, got {len(elements)}"
            )
        ids = [self.domain.local_of_element(x) for x in elements]
        if any(i == 0 for i in ids):
            return FpScalar(0, self.modulus)
        idx = tuple(i - 1 for i in ids)
        return FpScalar(int(self.table[idx]), self.modulus)

    @property
    def values(self) -> Dict[Tuple[Tuple[int, ...], ...], FpScalar]:
        """Mapping from non-identity element tuples to nonzero values."""
        p = self.modulus
        if self.degree == 0:
            v = int(self.table)
            return {(): FpScalar(v, p)} if v else {}
        out = {}
        for idx in zip(*np.nonzero(self.table)):
            key = tuple(
                self.domain.element_of_local(int(i) + 1) for i in idx
            )
            out[key] = FpScalar(int(self.table[idx]), p)
        return out

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.table))

    def is_zero(self) -> bool:
        return not self.table.any()

    # -- arithmetic ---------------------------------------------------------

    def _check_compatible(self, other: "Cochain") -> None:
        if not isinstance(other, Cochain):
            raise TypeError(f"expected a Cochain, got {type(other)}")
        if self.domain != other.domain or self.degree != other.degree:
            raise DomainMismatchError(
                "cochains live over different domains or degrees"
            )

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check_compatible(other)
        return Cochain(
            self.domain,
            self.degree,
            self.table.astype(np.int64) + other.table.astype(np.int64),
        )

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check_compatible(other)
        return Cochain(
            self.domain,
            self.degree,
            self.table.astype(np.int64) - other.table.astype(np.int64),
        )

    def __neg__(self) -> "Cochain":
        return Cochain(self.domain, self.degree, -self.table.astype(np.int64))

    def __mul__(self, scalar) -> "Cochain":
        c = int(scalar)
        return Cochain(
            self.domain, self.degree, self.table.astype(np.int64) * c
        )

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Cochain)
            and self.domain == other.domain
            and self.degree == other.degree
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self) -> int:
        return hash((self.domain, self.degree, self.table.tobytes()))

    def __repr__(self) -> str:
        kind = "subgroup" if self.subgroup is not None else "group"
        return (
            f"Cochain(degree={self.degree}, order={self.domain.order}, "
            f"p={self.modulus}, over={kind}, "
            f"nonzero={self.nonzero_count()})"
        )


# ---------------------------------------------------------------------------
# Differential
# ---------------------------------------------------------------------------


def _pad_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    """Prepend a zero hyperplane along ``axis``: local id 0 (the identity)
    then indexes the zero slice, implementing normalization."""
    shape = list(arr.shape)
    shape[axis] += 1
    out = np.zeros(shape, dtype=arr.dtype)
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(1, None)
    out[tuple(sl)] = arr
    return out


def _diff_blocks(c: Cochain) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(a, block)`` with ``block[x1-1, .., xn-1] = (dc)(a, x1, ..)``
    for each non-identity first argument ``a``, values reduced mod p."""
    n = c.degree
    dom = c.domain
    p = dom.p
    m = dom.order - 1
    if n == 0:
        # trivial coefficients: the two boundary terms cancel
        for a in range(1, m + 1):
            yield a, np.zeros((), dtype=np.int64)
        return
    cay = dom.cayley()
    table = c.table.astype(np.int64)
    padded0 = _pad_axis(table, 0)
    prod = cay[1:, 1:]  # product of two non-identity elements, local id
    for a in range(1, m + 1):
        block = table.copy()  # term f(x1, .., xn)
        block -= padded0[cay[a, 1:]]  # term -f(a*x1, x2, ..)
        sub = table[a - 1] if n >= 1 else table
        for i in range(2, n + 1):
            axis = i - 2
            moved = np.moveaxis(_pad_axis(sub, axis), axis, 0)
            gathered = np.moveaxis(moved[prod], (0, 1), (axis, axis + 1))
            if i % 2 == 0:
                block += gathered
            else:
                block -= gathered
        last = sub[..., np.newaxis] if n >= 2 else sub
        if (n + 1) % 2 == 0:
            block += last
        else:
            block -= last
        yield a, block % p


def differential(c: Cochain) -> Cochain:
    """The degree-raising boundary operator on normalized cochains."""
    dom = c.domain
    m = dom.order - 1
    n = c.degree
    if m**(n + 1) > MATERIALIZE_CAP:
        raise ResourceBudgetError(
            f"degree-{n + 1} table with {m ** (n + 1)} entries exceeds the "
            f"materialization cap {MATERIALIZE_CAP}; "
            "use differential_is_zero for closedness checks"
        )
    out = np.empty((m,) * (n + 1), dtype=np.int64)
    for a, block in _diff_blocks(c):
        out[a - 1] = block
    return Cochain(dom, n + 1, out)


def differential_is_zero(c: Cochain) -> bool:
    """Closedness check, streamed blockwise (never materializes d(c))."""
    return all(not block.any() for _, block in _diff_blocks(c))


# ---------------------------------------------------------------------------
# Cup product, restriction, generator duals
# ---------------------------------------------------------------------------


def cup(u: Cochain, v: Cochain) -> Cochain:
    """Cup product: ``(u v)(g_1..g_{m+n}) = u(g_1..g_m) * v(g_{m+1}..)``."""
    if u.domain != v.domain:
        raise DomainMismatchError("cup product operands over different groups")
    m = u.domain.order - 1
    total = u.degree + v.degree
    if m**total > MATERIALIZE_CAP:
        raise ResourceBudgetError(
            f"cup product of degree {total} exceeds the materialization cap"
        )
    table = np.multiply.outer(
        u.table.astype(np.int64), v.table.astype(np.int64)
    )
    return Cochain(u.domain, total, table)


def restrict(c: Cochain, sub: Subgroup) -> Cochain:
    """Restriction along a subgroup inclusion (values copied on its tuples)."""
    dom = c.domain
    if sub.parent is not dom.group and (
        format_presentation(sub.parent.pcp) != format_presentation(dom.group.pcp)
    ):
        raise DomainMismatchError(
            "restriction target is not a subgroup of the cochain's group"
        )
    if dom.subgroup is not None:
        if not set(sub.elements) <= set(dom.subgroup.elements):
            raise DomainMismatchError(
                "restriction target is not contained in the cochain's domain"
            )
    if dom.subgroup is None and sub.order == dom.order:
        return c  # restriction along the identity inclusion
    target = _Domain(dom.group, sub)
    # local ids of the target's non-identity elements inside the source
    if dom.subgroup is None:
        src_ids = target.parent_ids[1:]
    else:
        src_ids = dom._local_of_parent[target.parent_ids[1:]]
    if c.degree == 0:
        return Cochain(target, 0, c.table.astype(np.int64))
    take = src_ids - 1
    table = c.table[np.ix_(*([take] * c.degree))]
    return Cochain(target, c.degree, table.astype(np.int64))


def generator_dual(g: FiniteGroup, i: int) -> Cochain:
    """Degree-1 cochain reading off the exponent of generator ``i`` in the
    normal form.  It is a homomorphism (hence closed) exactly when that
    exponent is additive on products, e.g. for the leading generator."""
    if not 1 <= i <= g.n:
        raise ValueError(f"generator index {i} out of range 1..{g.n}")
    digits = g.digits_table()[1:, i - 1]
    return Cochain(g, 1, digits.astype(np.int64))


# ---------------------------------------------------------------------------
# Extension <-> cocycle bridges
# ---------------------------------------------------------------------------


def quotient_by_last_generator(total: FiniteGroup) -> FiniteGroup:
    """The quotient by the central subgroup generated by the last presentation
    generator, with indices aligned: element index ``z`` of the total group
    maps to index ``z // p`` of the quotient."""
    n = total.n
    strip = lambda word: tuple((t, e) for t, e in word if t != n)
    ptails = {}
    for t, word in total.pcp.power_tails.items():
        if t == n:
            continue
        w = strip(word)
        if w:
            ptails[t] = w
    ctails = {}
    for (t, s), word in total.pcp.commutator_tails.items():
        if t == n or s == n:
            continue
        w = strip(word)
        if w:
            ctails[(t, s)] = w
    return FiniteGroup(PcPresentation(total.p, n - 1, ptails, ctails))


def _check_central_fiber(
    total: FiniteGroup, kernel: Subgroup, generator_choice: Tuple[int, ...]
) -> int:
    p = total.p
    if kernel.parent is not total:
        raise DomainMismatchError("kernel is not a subgroup of the given group")
    if kernel.order != p:
        raise PresentationError(
            f"kernel must have order {p}, got {kernel.order}"
        )
    if not kernel.is_central():
        raise PresentationError("kernel is not central")
    if set(kernel.elements) != set(range(p)):
        # the suffix subgroup of the last generator occupies indices 0..p-1
        raise PresentationError(
            "kernel must be the subgroup generated by the last presentation "
            "generator; re-present the extension so the fiber comes last"
        )
    gi = total.index_of_element(tuple(generator_choice))
    if not 0 < gi < p:
        raise PresentationError(
            "generator_choice must be a non-identity element of the kernel"
        )
    return gi  # equals the exponent of the last generator


def extension_to_cocycle(
    total: FiniteGroup,
    kernel: Subgroup,
    generator_choice: Tuple[int, ...],
) -> Cochain:
    """Degree-2 cocycle of a central extension with fiber of order p.

    The section lifts each quotient normal form to the identical normal
    form in the total group (fiber exponent 0); the cocycle reads
    ``s(g) s(h) s(gh)^{-1}`` in the cyclic kernel through the chosen
    generator.  The result lives over the constructed quotient group,
    reachable as ``result.group``.
    """
    p = total.p
    e0 = _check_central_fiber(total, kernel, generator_choice)
    base = quotient_by_last_generator(total)
    q = base.order
    inv_e0 = inverse_mod(e0, p)
    lift_ids = np.arange(q, dtype=np.int64) * p
    table = np.empty((q - 1, q - 1), dtype=np.int64)
    for a in range(1, q):
        row = total.left_translation_table(total.element_of_index(a * p))
        # fiber coordinate of s(a)*s(b) relative to s of the projection
        table[a - 1] = row[lift_ids[1:]] % p
    table = (table * inv_e0) % p
    z = Cochain(base, 2, table)
    m = q - 1
    if m**3 <= MATERIALIZE_CAP and base.has_cayley_budget:
        if not differential_is_zero(z):  # pragma: no cover - sanity guard
            raise AssertionError("section cocycle failed the closedness check")
    return z


def cocycle_to_extension(
    base: FiniteGroup, z: Cochain
) -> Tuple[FiniteGroup, Subgroup]:
    """Central extension of ``base`` by C_p classified by the 2-cocycle ``z``.

    Concretely the group of pairs ``(g, x)`` with
    ``(g, x)(h, y) = (gh, x + y + z(g, h))``, re-presented on the
    generators of ``base`` plus one new central generator for the fiber.
    The returned kernel is the fiber subgroup.
    """
    dom = _Domain.wrap(base)
    if z.domain != dom:
        raise DomainMismatchError("cocycle does not live over the given group")
    if z.degree != 2:
        raise ValueError(f"expected a degree-2 cochain, got degree {z.degree}")
    if not differential_is_zero(z):
        raise NotClosedError("the given cochain is not a cocycle")
    p = base.p
    n = base.n
    cay = dom.cayley()
    inv_tab = (cay == 0).argmax(axis=1)  # cay[b, c] == 0 iff c == b^{-1}
    ztab = z.table.astype(np.int64)

    def zval(b: int, c: int) -> int:
        if b == 0 or c == 0:
            return 0
        return int(ztab[b - 1, c - 1])

    def pmul(x: Tuple[int, int], y: Tuple[int, int]) -> Tuple[int, int]:
        b, s = x
        c, t = y
        return int(cay[b, c]), (s + t + zval(b, c)) % p

    def pinv(x: Tuple[int, int]) -> Tuple[int, int]:
        b, s = x
        binv = int(inv_tab[b])
        return binv, (-s - zval(b, binv)) % p

    def lift_word(word) -> Tuple[int, int]:
        acc = (0, 0)
        for k, e in word:
            gk = base.index_of_element(base.generator(k))
            for _ in range(e):
                acc = pmul(acc, (gk, 0))
        return acc

    new_ptails = {}
    for t in range(1, n + 1):
        gt = base.index_of_element(base.generator(t))
        acc = (0, 0)
        for _ in range(p):
            acc = pmul(acc, (gt, 0))
        word = base.pcp.power_tails.get(t, ())
        b_w, k_w = lift_word(word)
        if acc[0] != b_w:  # pragma: no cover - internal consistency
            raise AssertionError("power relation mismatch in the pair model")
        extra = (acc[1] - k_w) % p
        new_word = word + (((n + 1), extra),) if extra else word
        if new_word:
            new_ptails[t] = new_word
    new_ctails = {}
    for t in range(2, n + 1):
        for s in range(1, t):
            gt = (base.index_of_element(base.generator(t)), 0)
            gs = (base.index_of_element(base.generator(s)), 0)
            comm = pmul(pmul(pmul(pinv(gt), pinv(gs)), gt), gs)
            word = base.pcp.commutator_tails.get((t, s), ())
            b_w, k_w = lift_word(word)
            if comm[0] != b_w:  # pragma: no cover - internal consistency
                raise AssertionError(
                    "commutator relation mismatch in the pair model"
                )
            extra = (comm[1] - k_w) % p
            new_word = word + (((n + 1), extra),) if extra else word
            if new_word:
                new_ctails[(t, s)] = new_word
    total = FiniteGroup(PcPresentation(p, n + 1, new_ptails, new_ctails))
    kernel = total.subgroup_generated([total.generator(n + 1)])
    return total, kernel


# ---------------------------------------------------------------------------
# Streaming coboundary certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoboundaryCertificate:
    """Outcome of a coboundary-membership solve.

    ``IS_COBOUNDARY`` carries a witness with ``d(witness)`` equal to the
    target exactly.  ``NOT_COBOUNDARY`` records the first row (in the fixed
    lexicographic enumeration) whose augmented residual is nonzero, plus
    the row-space summary at that point; the summary is reproducible.
    """

    status: str
    modulus: int
    degree: int
    column_count: int  # number of unknowns (lower-degree tuples)
    rows_processed: int
    basis_size: int
    witness: Optional[Cochain] = None
    failing_index: Optional[int] = None
    failing_tuple: Optional[Tuple[Tuple[int, ...], ...]] = None
    failing_value: Optional[int] = None

    @property
    def verified(self) -> bool:
        return self.status == IS_COBOUNDARY


def _solver_blocks(
    dom: _Domain, row_degree: int, ztab: Optional[np.ndarray]
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Padded sparse rows of the degree-raising map into ``row_degree``.

    Rows are indexed by ``row_degree``-tuples of non-identity elements in
    lexicographic order; columns by ``(row_degree - 1)``-tuples.  When
    ``ztab`` is given, an extra augmentation column (index = number of
    unknowns) carries the target value of each row.  Padding entries have
    value 0 (column 0), which the consumer ignores.
    """
    p = dom.p
    m = dom.order - 1
    cay = dom.cayley()
    minus = p - 1
    ids = np.arange(1, m + 1, dtype=np.int64)
    if row_degree == 1:
        # one constant unknown (column 0); the augmentation column is 1
        cols = np.full((m, 1), 1, dtype=np.int64)
        vals = (
            ztab.astype(np.int64)[:, None]
            if ztab is not None
            else np.zeros((m, 1), dtype=np.int64)
        )
        yield cols, vals
        return
    if row_degree == 2:
        aug_col = m
        for a in range(1, m + 1):
            ab = cay[a, 1:]
            cols = [ids - 1, np.where(ab > 0, ab - 1, 0), np.full(m, a - 1)]
            vals = [
                np.ones(m, dtype=np.int64),
                np.where(ab > 0, minus, 0),
                np.ones(m, dtype=np.int64),
            ]
            if ztab is not None:
                cols.append(np.full(m, aug_col))
                vals.append(ztab[a - 1].astype(np.int64))
            yield np.stack(cols, axis=1), np.stack(vals, axis=1)
        return
    if row_degree == 3:
        aug_col = m * m
        for a in range(1, m + 1):
            ab_row = cay[a]
            for b in range(1, m + 1):
                ab = int(ab_row[b])
                bc = cay[b, 1:]
                cols = [
                    (b - 1) * m + (ids - 1),
                    np.full(m, (ab - 1) * m, dtype=np.int64) + (ids - 1)
                    if ab > 0
                    else np.zeros(m, dtype=np.int64),
                    np.where(bc > 0, (a - 1) * m + (bc - 1), 0),
                    np.full(m, (a - 1) * m + (b - 1)),
                ]
                vals = [
                    np.ones(m, dtype=np.int64),
                    np.full(m, minus if ab > 0 else 0, dtype=np.int64),
                    np.where(bc > 0, 1, 0).astype(np.int64),
                    np.full(m, minus, dtype=np.int64),
                ]
                if ztab is not None:
                    cols.append(np.full(m, aug_col))
                    vals.append(ztab[a - 1, b - 1].astype(np.int64))
                yield np.stack(cols, axis=1), np.stack(vals, axis=1)
        return
    if row_degree == 4:
        if ztab is not None:
            raise ValueError("augmented solves stop at row degree 3")
        for a in range(1, m + 1):
            ab_row = cay[a]
            for b in range(1, m + 1):
                ab = int(ab_row[b])
                bc_row = cay[b]
                for c in range(1, m + 1):
                    bc = int(bc_row[c])
                    ce = cay[c, 1:]
                    base_bc = ((b - 1) * m + (c - 1)) * m
                    base_abc = (
                        ((ab - 1) * m + (c - 1)) * m if ab > 0 else 0
                    )
                    base_a_bc = (
                        ((a - 1) * m + (bc - 1)) * m if bc > 0 else 0
                    )
                    base_ab = ((a - 1) * m + (b - 1)) * m
                    cols = [
                        base_bc + (ids - 1),
                        np.full(m, base_abc) + (ids - 1)
                        if ab > 0
                        else np.zeros(m, dtype=np.int64),
                        np.full(m, base_a_bc) + (ids - 1)
                        if bc > 0
                        else np.zeros(m, dtype=np.int64),
                        np.where(ce > 0, base_ab + (ce - 1), 0),
                        np.full(m, base_ab + (c - 1)),
                    ]
                    vals = [
                        np.ones(m, dtype=np.int64),
                        np.full(m, minus if ab > 0 else 0, dtype=np.int64),
                        np.full(m, 1 if bc > 0 else 0, dtype=np.int64),
                        np.where(ce > 0, minus, 0).astype(np.int64),
                        np.ones(m, dtype=np.int64),
                    ]
                    yield np.stack(cols, axis=1), np.stack(vals, axis=1)
        return
    raise ValueError(f"row degree {row_degree} not supported")


def _solve_budget_check(unknowns: int, budget_bytes: Optional[int]) -> None:
    budget = DEFAULT_SOLVE_BUDGET if budget_bytes is None else budget_bytes
    need = 2 * (unknowns + 1) ** 2
    if need > budget:
        raise ResourceBudgetError(
            f"streaming solve needs ~{need} bytes of elimination state for "
            f"{unknowns} unknowns, over the budget of {budget}"
        )


def is_coboundary(
    z: Cochain, *, budget_bytes: Optional[int] = None
) -> CoboundaryCertificate:
    """Decide whether a closed cochain is a boundary, with certificate.

    Streams the rows of the degree-raising map from degree ``n - 1``
    (unknowns: normalized ``(n-1)``-tuples) augmented by the target values,
    in lexicographic row order, through an exact streaming eliminator.  The
    first row whose residual concentrates on the augmentation column yields
    a ``NOT_COBOUNDARY`` certificate; completing all rows consistently
    yields a witness, which is re-verified exactly before returning.
    """
    n = z.degree
    if not 1 <= n <= MAX_SOLVE_DEGREE:
        raise ValueError(
            f"certification covers degrees 1..{MAX_SOLVE_DEGREE}, got {n}"
        )
    dom = z.domain
    p = dom.p
    m = dom.order - 1
    unknowns = m ** (n - 1)
    # budget first: the closedness sweep below is itself degree-(n+1) work
    _solve_budget_check(unknowns, budget_bytes)
    if m ** (n + 1) > 8 * MATERIALIZE_CAP:
        raise ResourceBudgetError(
            f"closedness sweep in degree {n + 1} would stream "
            f"{m ** (n + 1)} entries; over the materialization cap"
        )
    if not differential_is_zero(z):
        raise NotClosedError("is_coboundary requires a closed cochain")
    stream = SparseRowStream(unknowns + 1, p)
    ztab = z.table
    rows_done = 0
    for cols, vals in _solver_blocks(dom, n, ztab):
        out = stream.insert_block(cols, vals)
        rows_done += cols.shape[0]
        hits = np.nonzero(out == unknowns)[0]
        if hits.size:
            offset = int(hits[0])
            ordinal = rows_done - cols.shape[0] + offset
            tuple_ids = np.unravel_index(ordinal, (m,) * n)
            failing = tuple(
                dom.element_of_local(int(i) + 1) for i in tuple_ids
            )
            return CoboundaryCertificate(
                status=NOT_COBOUNDARY,
                modulus=p,
                degree=n,
                column_count=unknowns,
                rows_processed=ordinal + 1,
                basis_size=stream.rank - 1,
                failing_index=ordinal,
                failing_tuple=failing,
                failing_value=1,
            )
    space = stream.space
    witness_vec = np.zeros(unknowns, dtype=np.int64)
    for row_pos, col in enumerate(space.pivot_columns):
        witness_vec[col] = space.basis_row(row_pos)[unknowns]
    witness = Cochain(dom, n - 1, witness_vec.reshape((m,) * (n - 1)))
    for a, block in _diff_blocks(witness):
        target = ztab[a - 1].astype(np.int64) if n >= 1 else ztab
        if not np.array_equal(block, target % p):  # pragma: no cover
            raise AssertionError("witness verification failed")
    return CoboundaryCertificate(
        status=IS_COBOUNDARY,
        modulus=p,
        degree=n,
        column_count=unknowns,
        rows_processed=rows_done,
        basis_size=stream.rank,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# Low-degree dimensions
# ---------------------------------------------------------------------------


def h1_basis(g: FiniteGroup) -> List[Cochain]:
    """Basis of homomorphisms ``g -> F_p`` as closed degree-1 cochains.

    Computed from the presentation: a generator assignment extends to a
    homomorphism exactly when every relation tail evaluates to zero.  Each
    basis vector is verified against the multiplication tables.
    """
    p, n = g.p, g.n
    rows = []
    for word in g.pcp.power_tails.values():
        row = np.zeros(n, dtype=np.int64)
        for t, e in word:
            row[t - 1] = (row[t - 1] + e) % p
        rows.append(row)
    for word in g.pcp.commutator_tails.values():
        row = np.zeros(n, dtype=np.int64)
        for t, e in word:
            row[t - 1] = (row[t - 1] + e) % p
        rows.append(row)
    if rows:
        kernel = kernel_basis(FpMatrix(np.array(rows, dtype=np.int64), p))
    else:
        kernel = [np.eye(n, dtype=np.int64)[i] for i in range(n)]
    digits = g.digits_table().astype(np.int64)
    out = []
    for vec in kernel:
        full = (digits @ vec) % p
        for t in range(1, n + 1):
            shifted = (full + full[g.index_of_element(g.generator(t))]) % p
            if not np.array_equal(full[g.r_table(t)], shifted):
                raise AssertionError(
                    "generator assignment failed to extend multiplicatively"
                )  # pragma: no cover
        out.append(Cochain(g, 1, full[1:]))
    return out


def _rank_of_degree_map(
    dom: _Domain, row_degree: int, budget_bytes: Optional[int]
) -> int:
    """Rank of the degree-raising map whose rows have ``row_degree`` slots."""
    unknowns = (dom.order - 1) ** (row_degree - 1)
    _solve_budget_check(unknowns, budget_bytes)
    stream = SparseRowStream(unknowns + 1, dom.p)
    for cols, vals in _solver_blocks(dom, row_degree, None):
        stream.insert_block(cols, vals)
    return stream.rank


def cohomology_dim(
    g: Union[FiniteGroup, Subgroup],
    n: int,
    *,
    budget_bytes: Optional[int] = None,
) -> int:
    """Dimension of degree-``n`` cohomology with trivial F_p coefficients.

    Degree 0 is the constants; degree 1 counts homomorphisms to F_p; for
    degrees 2 and 3 the dimension is ``M^n - rank(out-map) - rank(in-map)``
    with both ranks obtained by streaming the differential rows.  Solves
    whose elimination state would exceed the budget raise
    :class:`ResourceBudgetError` rather than approximating.
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if n > MAX_SOLVE_DEGREE:
        raise ResourceBudgetError(
            f"dimension computations stop at degree {MAX_SOLVE_DEGREE}"
        )
    if n == 0:
        return 1
    if isinstance(g, FiniteGroup) and n == 1:
        return len(h1_basis(g))
    dom = _Domain.wrap(g)
    m = dom.order - 1
    if n == 1:
        rank_out = _rank_of_degree_map(dom, 2, budget_bytes)
        return m - rank_out
    # guard both solves before starting either: the feasible one may take
    # minutes, and the caller should learn about the infeasible one first
    _solve_budget_check(m ** (n - 1), budget_bytes)
    _solve_budget_check(m**n, budget_bytes)
    rank_in = _rank_of_degree_map(dom, n, budget_bytes)
    rank_out = _rank_of_degree_map(dom, n + 1, budget_bytes)
    return m**n - rank_out - rank_in


# ---------------------------------------------------------------------------
# JSON views
# ---------------------------------------------------------------------------


def _table_digest(table: np.ndarray) -> str:
    return hashlib.sha256(
        table.astype(np.uint8).tobytes() + str(table.shape).encode()
    ).hexdigest()


def cochain_to_json(c: Cochain) -> dict:
    """Stable JSON-ready view: degree, group fingerprint, sparse values."""
    doc = {
        "schema": "cochain.v1",
        "modulus": c.modulus,
        "degree": c.degree,
        "group": c.domain.fingerprint(),
        "domain_kind": "subgroup" if c.subgroup is not None else "group",
        "table_digest": _table_digest(c.table),
        "nonzero": c.nonzero_count(),
    }
    if c.nonzero_count() <= SPARSE_JSON_CAP:
        if c.degree == 0:
            v = int(c.table)
            doc["values"] = [[v]] if v else []
        else:
            entries = []
            for idx in zip(*np.nonzero(c.table)):
                entries.append(
                    [int(i) + 1 for i in idx] + [int(c.table[idx])]
                )
            doc["values"] = sorted(entries)
    return doc


def certificate_to_json(cert: CoboundaryCertificate) -> dict:
    doc = {
        "schema": "certificate.v1",
        "status": cert.status,
        "modulus": cert.modulus,
        "degree": cert.degree,
        "column_count": cert.column_count,
        "rows_processed": cert.rows_processed,
        "basis_size": cert.basis_size,
    }
    if cert.witness is not None:
        doc["witness_digest"] = _table_digest(cert.witness.table)
    if cert.failing_index is not None:
        doc["failing_index"] = cert.failing_index
        doc["failing_tuple"] = [list(t) for t in cert.failing_tuple]
        doc["failing_value"] = cert.failing_value
    return doc


def _json_dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
