"""Finite p-groups given by weighted polycyclic presentations.

A group of order ``p**n`` is described by generators ``g1 < g2 < ... < gn``,
all of relative order ``p``, together with *tails*: normal words for each
power ``gi**p`` and each commutator ``[gi, gj] = gi^-1 gj^-1 gi gj`` (stored
for ``i > j``).  The weighting condition — every tail involves only
generators of strictly higher index — makes collection terminate, and every
element has a unique normal form ``g1**e1 * ... * gn**en``.

The engine provides:

- collection-based multiplication with memoised generator conjugates,
- the standard consistency (overlap) checks for such presentations,
- an element indexing scheme (mixed radix, first generator most significant,
  so index order equals lexicographic order on exponent vectors),
- vectorised right/left translation tables, an optional full multiplication
  table below a configurable ceiling, element orders and inverses,
- structural queries: centre, centralisers, generated subgroups, commutator
  subgroups, the lower central series, exponent, enumeration of elementary
  abelian subgroups, and complement (splitting) search for extensions.

A text format for presentations is provided for the command line
(:func:`parse_presentation` / :func:`format_presentation`).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .gfp import is_prime

__all__ = [
    "ConsistencyError",
    "FiniteGroup",
    "PcPresentation",
    "PresentationError",
    "ResourceBudgetError",
    "Subgroup",
    "WeightingError",
    "Word",
    "center",
    "centralizer",
    "commutator_subgroup",
    "enumerate_elementary_abelian",
    "exponent_of",
    "format_presentation",
    "has_complement",
    "is_extraspecial",
    "lower_central_series",
    "make_group",
    "multiply",
    "parse_presentation",
    "subgroup_generated",
    "subgroup_presentation",
]

#: A normal word: ((generator index, exponent), ...) with strictly ascending
#: 1-based generator indices and exponents in [1, p).
Word = Tuple[Tuple[int, int], ...]

DEFAULT_CAYLEY_CEILING = 20000

#: Exhaustive pair enumeration limit for commutator subgroups.
PAIR_BUDGET = 4_000_000

#: Candidate limit for complement search (|kernel| ** lifted generators).
COMPLEMENT_BUDGET = 200_000


class PresentationError(ValueError):
    """Malformed polycyclic presentation."""


class WeightingError(PresentationError):
    """A tail word uses a generator of too low an index."""


class ConsistencyError(PresentationError):
    """The presentation fails an associativity (overlap) check."""

    def __init__(self, defects: Sequence[dict]):
        self.defects = list(defects)
        first = self.defects[0]
        super().__init__(
            f"inconsistent presentation: {len(self.defects)} failing overlap(s); "
            f"first: {first['kind']} at indices {first['indices']} "
            f"({first['lhs']} != {first['rhs']})"
        )


class ResourceBudgetError(RuntimeError):
    """An operation would exceed its configured resource budget."""


def _validate_word(word, n_gens: int, p: int) -> Word:
    out = []
    last = 0
    for item in word:
        t, e = int(item[0]), int(item[1])
        if not 1 <= t <= n_gens:
            raise PresentationError(f"generator index {t} out of range 1..{n_gens}")
        e %= p
        if e == 0:
            continue
        if t <= last:
            raise PresentationError(
                f"word letters must have strictly ascending indices, got g{t} after g{last}"
            )
        last = t
        out.append((t, e))
    return tuple(out)


@dataclass(frozen=True)
class PcPresentation:
    """A weighted polycyclic presentation with all relative orders ``p``."""

    prime: int
    n_gens: int
    power_tails: Mapping[int, Word] = None  # type: ignore[assignment]
    commutator_tails: Mapping[Tuple[int, int], Word] = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        p = self.prime
        if not is_prime(p) or p <= 2:
            raise PresentationError(f"prime must be an odd prime, got {p}")
        if self.n_gens < 1:
            raise PresentationError("need at least one generator")
        pt = {}
        for i, w in (self.power_tails or {}).items():
            i = int(i)
            if not 1 <= i <= self.n_gens:
                raise PresentationError(f"power tail index {i} out of range")
            word = _validate_word(w, self.n_gens, p)
            if word and word[0][0] <= i:
                raise WeightingError(
                    f"power tail of g{i} must use generators of index > {i}, "
                    f"got g{word[0][0]}"
                )
            if word:
                pt[i] = word
        ct = {}
        for key, w in (self.commutator_tails or {}).items():
            i, j = int(key[0]), int(key[1])
            if not (1 <= j < i <= self.n_gens):
                raise PresentationError(
                    f"commutator tail key must be (i, j) with i > j, got ({i}, {j})"
                )
            word = _validate_word(w, self.n_gens, p)
            if word and word[0][0] <= i:
                raise WeightingError(
                    f"tail of [g{i}, g{j}] must use generators of index > {i}, "
                    f"got g{word[0][0]}"
                )
            if word:
                ct[(i, j)] = word
        object.__setattr__(self, "power_tails", pt)
        object.__setattr__(self, "commutator_tails", ct)

    @property
    def order(self) -> int:
        return self.prime**self.n_gens


# ---------------------------------------------------------------------------
# Presentation text format
# ---------------------------------------------------------------------------

_WORD_FACTOR = re.compile(r"^g(\d+)(?:\^(\d+))?$")


def _parse_word(text: str, n_gens: int, p: int) -> Word:
    text = text.strip()
    if text in ("1", ""):
        return ()
    letters = []
    for factor in text.split("*"):
        m = _WORD_FACTOR.match(factor.strip())
        if not m:
            raise PresentationError(f"cannot parse word factor {factor!r}")
        t = int(m.group(1))
        e = int(m.group(2)) if m.group(2) else 1
        letters.append((t, e))
    return _validate_word(letters, n_gens, p)


def _format_word(word: Word) -> str:
    if not word:
        return "1"
    return "*".join(f"g{t}" if e == 1 else f"g{t}^{e}" for t, e in word)


def parse_presentation(text: str) -> PcPresentation:
    """Parse the one-relation-per-line presentation format.

    Grammar (``#`` starts a comment, blank lines ignored)::

        prime = 5
        gens = 3
        g1^p = 1           # power relation; "g1^5" is also accepted
        [g2,g1] = g3       # commutator tail, indices (higher, lower)
        g2^g1 = g2*g3      # conjugate form; the leading g2 may be omitted

    Unstated power and commutator tails default to trivial.
    """
    prime = None
    n_gens = None
    relations = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PresentationError(f"line {lineno}: expected '=' in {line!r}")
        lhs, rhs = (part.strip() for part in line.split("=", 1))
        if lhs in ("prime", "p"):
            prime = int(rhs)
            continue
        if lhs in ("gens", "generators", "n"):
            n_gens = int(rhs)
            continue
        relations.append((lineno, lhs, rhs))
    if prime is None or n_gens is None:
        raise PresentationError("presentation must declare 'prime = ...' and 'gens = ...'")

    power_tails: Dict[int, Word] = {}
    comm_tails: Dict[Tuple[int, int], Word] = {}
    for lineno, lhs, rhs in relations:
        m = re.match(r"^\[\s*g(\d+)\s*,\s*g(\d+)\s*\]$", lhs)
        if m:
            i, j = int(m.group(1)), int(m.group(2))
            comm_tails[(i, j)] = _parse_word(rhs, n_gens, prime)
            continue
        m = re.match(r"^g(\d+)\^(p|\d+)$", lhs)
        if m:
            i = int(m.group(1))
            exp = m.group(2)
            if exp == "p" or int(exp) == prime:
                power_tails[i] = _parse_word(rhs, n_gens, prime)
                continue
            mg = _WORD_FACTOR.match(f"g{exp}")
            if mg is None:
                raise PresentationError(
                    f"line {lineno}: unsupported power exponent in {lhs!r}"
                )
        m = re.match(r"^g(\d+)\^g(\d+)$", lhs)
        if m:
            i, j = int(m.group(1)), int(m.group(2))
            word = _parse_word(rhs, n_gens, prime)
            # Conjugate form g_i^g_j = g_i * tail; a leading g_i is stripped,
            # so a bare tail word is accepted as shorthand.
            if word and word[0] == (i, 1):
                word = word[1:]
            if word:
                comm_tails[(i, j)] = word
            continue
        raise PresentationError(f"line {lineno}: cannot parse relation {lhs!r}")
    return PcPresentation(prime, n_gens, power_tails, comm_tails)


def format_presentation(pcp: PcPresentation) -> str:
    """Canonical text form; round-trips through :func:`parse_presentation`."""
    lines = [f"prime = {pcp.prime}", f"gens = {pcp.n_gens}"]
    for i in sorted(pcp.power_tails):
        lines.append(f"g{i}^p = {_format_word(pcp.power_tails[i])}")
    for i, j in sorted(pcp.commutator_tails):
        lines.append(f"[g{i},g{j}] = {_format_word(pcp.commutator_tails[(i, j)])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------


class Subgroup:
    """A subgroup given by its sorted element indices and chosen generators."""

    __slots__ = ("parent", "elements", "generators", "_element_set")

    def __init__(
        self,
        parent: "FiniteGroup",
        elements: Sequence[int],
        generators: Sequence[Tuple[int, ...]],
    ):
        self.parent = parent
        self.elements = tuple(sorted(int(x) for x in elements))
        self.generators = tuple(tuple(g) for g in generators)
        self._element_set = frozenset(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def key(self) -> Tuple[int, ...]:
        """Canonical identity of the subgroup inside its parent."""
        return self.elements

    def __contains__(self, x) -> bool:
        if isinstance(x, tuple):
            x = self.parent.index_of_element(x)
        return int(x) in self._element_set

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subgroup)
            and self.parent is other.parent
            and self.elements == other.elements
        )

    def __hash__(self) -> int:
        return hash((id(self.parent), self.elements))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order} of {self.parent!r})"

    def element_tuples(self) -> List[Tuple[int, ...]]:
        return [self.parent.element_of_index(i) for i in self.elements]

    def is_abelian(self) -> bool:
        g = self.parent
        gens = self.generators
        return all(
            g.mul(a, b) == g.mul(b, a) for a, b in itertools.combinations(gens, 2)
        )

    def is_central(self) -> bool:
        g = self.parent
        zc = g.center()
        return all(i in zc._element_set for i in self.elements)

    def is_normal(self) -> bool:
        g = self.parent
        for i in range(1, g.n + 1):
            gen = g.generator(i)
            for h in self.generators:
                if g.conjugate(h, gen) not in self:
                    return False
        return True

    def exponent(self) -> int:
        g = self.parent
        if g.has_cayley_budget or g._orders is not None:
            return int(g.orders_all()[np.asarray(self.elements)].max())
        best = 1
        for i in self.elements:
            best = max(best, g.order_of(g.element_of_index(i)))
        return best

    def is_elementary_abelian(self) -> bool:
        return self.is_abelian() and self.exponent() <= self.parent.p

    def p_rank(self) -> int:
        """log_p of the largest elementary abelian subgroup contained here."""
        if self.is_elementary_abelian():
            return round(np.log(self.order) / np.log(self.parent.p)) if self.order > 1 else 0
        best = 0
        for sub in self.parent.enumerate_elementary_abelian_within(self):
            best = max(best, sub[1])
        return best

    def derived_subgroup(self) -> "Subgroup":
        return commutator_subgroup(self, self)

    def agemo(self) -> "Subgroup":
        """Subgroup generated by all p-th powers."""
        g = self.parent
        pth = g.pth_power_table()
        powers = np.unique(pth[np.asarray(self.elements)])
        return g.subgroup_generated(g._greedy_generators(powers.tolist()))


# ---------------------------------------------------------------------------
# The group engine
# ---------------------------------------------------------------------------


class FiniteGroup:
    """A finite p-group materialised from a :class:`PcPresentation`.

    Elements are exponent tuples of length ``n`` (normal forms); the integer
    index of an element is its mixed-radix value with the first generator as
    the most significant digit, so index order is lexicographic order.
    """

    def __init__(
        self,
        pcp: PcPresentation,
        cayley_ceiling: int = DEFAULT_CAYLEY_CEILING,
        check: bool = True,
    ):
        self.pcp = pcp
        self.p = pcp.prime
        self.n = pcp.n_gens
        self.order = pcp.order
        self.cayley_ceiling = int(cayley_ceiling)
        self._power_tails = dict(pcp.power_tails)
        self._ctails = dict(pcp.commutator_tails)
        self._identity = (0,) * self.n
        # Memoised conjugate powers: (t, k) -> [None, g_t^{g_k}, (g_t^{g_k})^2, ...]
        self._cpow: Dict[Tuple[int, int], List[Tuple[int, ...]]] = {}
        self._build_conjugates()
        self._powers_of_p = [self.p**m for m in range(self.n + 1)]
        # lazy caches
        self._r_tables: Dict[int, np.ndarray] = {}
        self._l_tables: Dict[int, np.ndarray] = {}
        self._digits: Optional[np.ndarray] = None
        self._cayley: Optional[np.ndarray] = None
        self._pth_powers: Optional[np.ndarray] = None
        self._orders: Optional[np.ndarray] = None
        self._inverses: Optional[np.ndarray] = None
        self._center: Optional[Subgroup] = None
        if check:
            defects = self.consistency_defects()
            if defects:
                raise ConsistencyError(defects)

    # -- construction helpers ----------------------------------------------

    def _unit(self, t: int) -> Tuple[int, ...]:
        v = [0] * self.n
        v[t - 1] = 1
        return tuple(v)

    def _build_conjugates(self) -> None:
        # Dependency order: conjugation by g_k only involves letters of index
        # > k, whose own swaps use tables for strictly larger k — so build k
        # descending.
        for k in range(self.n - 1, 0, -1):
            for t in range(k + 1, self.n + 1):
                tail = self._ctails.get((t, k))
                if not tail:
                    continue
                base = self._mul_word(self._unit(t), tail)
                powers: List[Optional[Tuple[int, ...]]] = [self._identity, base]
                for _ in range(2, self.p):
                    powers.append(self._mul_vec(powers[-1], base))
                self._cpow[(t, k)] = powers  # type: ignore[assignment]

    def _conj_power(self, t: int, k: int, e: int) -> Tuple[int, ...]:
        """(g_t conjugated by g_k) raised to the e-th power, as a normal form."""
        entry = self._cpow.get((t, k))
        if entry is None:
            v = [0] * self.n
            v[t - 1] = e
            return tuple(v)
        return entry[e]

    # -- collection ---------------------------------------------------------

    def _mul_gen(self, x: Tuple[int, ...], k: int) -> Tuple[int, ...]:
        """Right-multiply the normal form ``x`` by generator ``g_k``."""
        p = self.p
        res = list(x[:k]) + [0] * (self.n - k)
        res[k - 1] += 1
        carry = None
        if res[k - 1] == p:
            res[k - 1] = 0
            carry = self._power_tails.get(k)
        out = tuple(res)
        if carry:
            out = self._mul_word(out, carry)
        for t in range(k + 1, self.n + 1):
            e = x[t - 1]
            if e:
                out = self._mul_vec(out, self._conj_power(t, k, e))
        return out

    def _mul_vec(self, x: Tuple[int, ...], v: Tuple[int, ...]) -> Tuple[int, ...]:
        for t in range(1, self.n + 1):
            e = v[t - 1]
            for _ in range(e):
                x = self._mul_gen(x, t)
        return x

    def _mul_word(self, x: Tuple[int, ...], w: Word) -> Tuple[int, ...]:
        for t, e in w:
            for _ in range(e):
                x = self._mul_gen(x, t)
        return x

    def _word_vec(self, w: Word) -> Tuple[int, ...]:
        v = [0] * self.n
        for t, e in w:
            v[t - 1] = e
        return tuple(v)

    # -- public element operations -----------------------------------------

    @property
    def identity(self) -> Tuple[int, ...]:
        return self._identity

    def generator(self, i: int) -> Tuple[int, ...]:
        if not 1 <= i <= self.n:
            raise ValueError(f"generator index {i} out of range 1..{self.n}")
        return self._unit(i)

    def generators(self) -> List[Tuple[int, ...]]:
        return [self._unit(i) for i in range(1, self.n + 1)]

    def mul(self, x: Tuple[int, ...], y: Tuple[int, ...]) -> Tuple[int, ...]:
        return self._mul_vec(tuple(x), tuple(y))

    def inv(self, x: Tuple[int, ...]) -> Tuple[int, ...]:
        z = self._identity
        for t in range(1, self.n + 1):
            e = self._mul_vec(tuple(x), z)[t - 1]
            if e:
                z = self._mul_word(z, ((t, self.p - e),))
        return z

    def power(self, x: Tuple[int, ...], m: int) -> Tuple[int, ...]:
        if m < 0:
            return self.power(self.inv(x), -m)
        acc = self._identity
        base = tuple(x)
        while m:
            if m & 1:
                acc = self._mul_vec(acc, base)
            base = self._mul_vec(base, base)
            m >>= 1
        return acc

    def conjugate(self, x, y) -> Tuple[int, ...]:
        """x conjugated by y:  y^-1 * x * y."""
        return self._mul_vec(self._mul_vec(self.inv(y), tuple(x)), tuple(y))

    def commutator(self, x, y) -> Tuple[int, ...]:
        """[x, y] = x^-1 y^-1 x y."""
        return self._mul_vec(
            self.inv(self._mul_vec(tuple(y), tuple(x))),
            self._mul_vec(tuple(x), tuple(y)),
        )

    def order_of(self, x: Tuple[int, ...]) -> int:
        ord_ = 1
        y = tuple(x)
        while y != self._identity:
            y = self.power(y, self.p)
            ord_ *= self.p
        return ord_

    # -- indexing -----------------------------------------------------------

    def index_of_element(self, x: Sequence[int]) -> int:
        idx = 0
        for e in x:
            idx = idx * self.p + int(e)
        return idx

    def element_of_index(self, idx: int) -> Tuple[int, ...]:
        idx = int(idx)
        v = [0] * self.n
        for t in range(self.n - 1, -1, -1):
            idx, v[t] = divmod(idx, self.p)
        return tuple(v)

    def digits_table(self) -> np.ndarray:
        """(order, n) uint8 array: row z is the exponent vector of index z."""
        if self._digits is None:
            shape = (self.p,) * self.n
            grids = np.unravel_index(np.arange(self.order), shape)
            self._digits = np.stack(grids, axis=1).astype(np.uint8)
        return self._digits

    # -- consistency --------------------------------------------------------

    def consistency_defects(self) -> List[dict]:
        """Evaluate every standard overlap; return records of the failures.

        For presentations with all relative orders prime, collection yields a
        consistent (associative) multiplication iff the overlaps
        ``g_k (g_j g_i) = (g_k g_j) g_i`` (k > j > i),
        ``g_j^p g_i = g_j^{p-1} (g_j g_i)`` and
        ``g_j (g_i^p) = (g_j g_i) g_i^{p-1}`` (j > i), and
        ``g_i (g_i^p) = (g_i^p) g_i`` all collect identically.
        """
        defects = []
        p, n = self.p, self.n

        def record(kind, indices, lhs, rhs):
            if lhs != rhs:
                defects.append(
                    {"kind": kind, "indices": indices, "lhs": lhs, "rhs": rhs}
                )

        for k in range(3, n + 1):
            for j in range(2, k):
                for i in range(1, j):
                    gk, gj, gi = self._unit(k), self._unit(j), self._unit(i)
                    lhs = self._mul_vec(self._mul_vec(gk, gj), gi)
                    rhs = self._mul_vec(gk, self._mul_vec(gj, gi))
                    record("associativity", (k, j, i), lhs, rhs)
        for j in range(1, n + 1):
            pv_j = self._word_vec(self._power_tails.get(j, ()))
            for i in range(1, j):
                gi, gj = self._unit(i), self._unit(j)
                lhs = self._mul_vec(pv_j, gi)
                jv = [0] * n
                jv[j - 1] = p - 1
                rhs = self._mul_vec(tuple(jv), self._mul_vec(gj, gi))
                record("power-left", (j, i), lhs, rhs)
                pv_i = self._word_vec(self._power_tails.get(i, ()))
                lhs2 = self._mul_vec(gj, pv_i)
                iv = [0] * n
                iv[i - 1] = p - 1
                rhs2 = self._mul_vec(self._mul_vec(gj, gi), tuple(iv))
                record("power-right", (j, i), lhs2, rhs2)
        for i in range(1, n + 1):
            pv = self._word_vec(self._power_tails.get(i, ()))
            gi = self._unit(i)
            record(
                "power-self",
                (i,),
                self._mul_vec(pv, gi),
                self._mul_vec(gi, pv),
            )
        return defects

    # -- vectorised tables ---------------------------------------------------

    def r_table(self, k: int) -> np.ndarray:
        """index -> index of (element * g_k), for the full group.

        Built vectorised, highest generator first: with m = p^(n-k),
        an index z splits as H*m + L (head digits 1..k, tail digits > k), and
        elem(z)*g_k = (head*g_k) * (tail conjugated by g_k).  The conjugated
        tail lives in the subgroup M_k of generators > k, whose indices are
        exactly 0..m-1, so one conjugation table on M_k plus plain digit
        arithmetic on H assembles the whole column.
        """
        if k not in self._r_tables:
            for kk in range(self.n, k - 1, -1):
                if kk not in self._r_tables:
                    table = self._build_r_table(kk)
                    table.setflags(write=False)
                    self._r_tables[kk] = table
        return self._r_tables[k]

    def _sub_left_translation(self, k: int, y: Tuple[int, ...]) -> np.ndarray:
        """Left translation by y (an element of M_k) on the indices of M_k."""
        p, n = self.p, self.n
        m = self._powers_of_p[n - k]
        L = np.empty(m, dtype=np.int64)
        L[0] = self.index_of_element(y)
        for t in range(k + 1, n + 1):
            step = self._powers_of_p[n - t]
            table = self._r_tables[t]
            prefix = (
                np.arange(self._powers_of_p[t - k - 1], dtype=np.int64) * (p * step)
            )
            for e in range(1, p):
                block = prefix + e * step
                L[block] = table[L[block - step]]
        return L

    def _build_r_table(self, k: int) -> np.ndarray:
        p, n = self.p, self.n
        m = self._powers_of_p[n - k]
        # Conjugation by g_k on the tail subgroup M_k, by index recursion:
        # elem(z) = elem(z - step) * g_t  =>  conj[z] = conj[z - step] * g_t^{g_k}.
        C = np.zeros(m, dtype=np.int64)
        for t in range(k + 1, n + 1):
            step = self._powers_of_p[n - t]
            w = self._conj_power(t, k, 1)
            prefix = (
                np.arange(self._powers_of_p[t - k - 1], dtype=np.int64) * (p * step)
            )
            for e in range(1, p):
                block = prefix + e * step
                C[block] = self.rmul_all(C[block - step], w)
        idx = np.arange(self.order, dtype=np.int64)
        H, L = np.divmod(idx, m)
        ek = H % p
        conj = C[L]
        wk = self._power_tails.get(k)
        if wk:
            Lw = self._sub_left_translation(k, self._word_vec(wk))
            over = Lw[conj]
        else:
            over = conj
        return np.where(
            ek < p - 1, (H + 1) * m + conj, (H - (p - 1)) * m + over
        )

    def rmul_all(self, indices: np.ndarray, y: Tuple[int, ...]) -> np.ndarray:
        """Vectorised right multiplication of many elements by a fixed y."""
        idx = np.asarray(indices, dtype=np.int64)
        for t in range(1, self.n + 1):
            e = y[t - 1]
            if e:
                table = self.r_table(t)
                for _ in range(e):
                    idx = table[idx]
        return idx

    def left_translation_table(self, y: Tuple[int, ...]) -> np.ndarray:
        """index -> index of (y * element), built by index-order recursion.

        If z has last nonzero digit e at position t then
        elem(z) = elem(z - p^(n-t)) * g_t, so L[z] = R_t[L[z - p^(n-t)]].
        Blocks are processed with t ascending, e ascending, which respects
        the dependency order.
        """
        L = np.empty(self.order, dtype=np.int64)
        L[0] = self.index_of_element(y)
        p, n = self.p, self.n
        for t in range(1, n + 1):
            step = self._powers_of_p[n - t]
            table = self.r_table(t)
            prefix = np.arange(self._powers_of_p[t - 1], dtype=np.int64) * (p * step)
            for e in range(1, p):
                block = prefix + e * step
                L[block] = table[L[block - step]]
        return L

    def l_table(self, k: int) -> np.ndarray:
        if k not in self._l_tables:
            table = self.left_translation_table(self._unit(k))
            table.setflags(write=False)
            self._l_tables[k] = table
        return self._l_tables[k]

    def conjugation_table(self, y: Tuple[int, ...]) -> np.ndarray:
        """index -> index of y^-1 * element * y."""
        return self.rmul_all(self.left_translation_table(self.inv(y)), y)

    @property
    def has_cayley_budget(self) -> bool:
        return self.order <= self.cayley_ceiling

    def cayley_table(self) -> np.ndarray:
        """Full multiplication table T[x, z] = index(elem(x) * elem(z))."""
        if self._cayley is None:
            if not self.has_cayley_budget:
                raise ResourceBudgetError(
                    f"multiplication table for order {self.order} exceeds the "
                    f"ceiling {self.cayley_ceiling}"
                )
            dtype = np.uint16 if self.order <= 0xFFFF else np.int32
            T = np.empty((self.order, self.order), dtype=dtype)
            T[:, 0] = np.arange(self.order, dtype=dtype)
            digits = self.digits_table()
            p, n = self.p, self.n
            for t in range(1, n + 1):
                step = self._powers_of_p[n - t]
                table = self.r_table(t)
                prefix = (
                    np.arange(self._powers_of_p[t - 1], dtype=np.int64) * (p * step)
                )
                for e in range(1, p):
                    for z in prefix + e * step:
                        T[:, z] = table[T[:, z - step]]
            self._cayley = T
        return self._cayley

    def pth_power_table(self) -> np.ndarray:
        """index -> index of the p-th power (vectorised when a table fits)."""
        if self._pth_powers is None:
            if self._cayley is not None or (
                self.has_cayley_budget and self.n < 2
            ):
                T = self.cayley_table()
                idx = np.arange(self.order, dtype=np.int64)
                acc = idx.copy()
                for _ in range(self.p - 1):
                    acc = T[acc, idx].astype(np.int64)
            elif self.n >= 2 and self.order // self.p <= self.cayley_ceiling:
                acc = self._pth_powers_by_transversal()
            elif self.has_cayley_budget:
                T = self.cayley_table()
                idx = np.arange(self.order, dtype=np.int64)
                acc = idx.copy()
                for _ in range(self.p - 1):
                    acc = T[acc, idx].astype(np.int64)
            else:
                acc = np.empty(self.order, dtype=np.int64)
                for z in range(self.order):
                    acc[z] = self.index_of_element(
                        self.power(self.element_of_index(z), self.p)
                    )
            acc.setflags(write=False)
            self._pth_powers = acc
        return self._pth_powers

    def _tail_subgroup_presentation(self) -> PcPresentation:
        """The presentation induced on generators 2..n, reindexed from 1."""
        shift = lambda w: tuple((t - 1, e) for t, e in w)
        ptails = {
            i - 1: shift(w) for i, w in self._power_tails.items() if i >= 2
        }
        ctails = {
            (i - 1, j - 1): shift(w)
            for (i, j), w in self._ctails.items()
            if j >= 2
        }
        return PcPresentation(self.p, self.n - 1, ptails, ctails)

    def _pth_powers_by_transversal(self) -> np.ndarray:
        """p-th powers via the maximal subgroup M = <g_2..g_n>.

        Every element is g_1^e * h with h in M, and
        (g*h)^p = g^p * h^{g^(p-1)} * ... * h^g * h  for g = g_1^e,
        so one multiplication table for M plus conjugation tables on M
        cover the whole group one transversal block at a time.
        """
        p, m = self.p, self.order // self.p
        sub = FiniteGroup(
            self._tail_subgroup_presentation(),
            cayley_ceiling=self.cayley_ceiling,
            check=False,
        )
        TM = sub.cayley_table()
        conj_g1 = self.conjugation_table(self._unit(1))[:m]
        out = np.empty(self.order, dtype=np.int64)
        out[:m] = sub.pth_power_table()
        ell = np.arange(m, dtype=np.int64)
        w1 = self._power_tails.get(1)
        for e in range(1, p):
            Ce = ell
            for _ in range(e):
                Ce = conj_g1[Ce]
            acc = ell
            cum = ell
            for _ in range(1, p):
                cum = Ce[cum]
                acc = TM[cum, acc].astype(np.int64)
            if w1:
                head = self.power(self._word_vec(w1), e)
                acc = self._sub_left_translation(1, head)[acc]
            out[e * m : (e + 1) * m] = acc
        return out

    def orders_all(self) -> np.ndarray:
        """Element orders for every index."""
        if self._orders is None:
            pth = self.pth_power_table()
            orders = np.zeros(self.order, dtype=np.int64)
            cur = np.arange(self.order, dtype=np.int64)
            k = 0
            while True:
                fresh = (cur == 0) & (orders == 0)
                orders[fresh] = self.p**k
                if (orders != 0).all():
                    break
                cur = pth[cur]
                k += 1
            orders.setflags(write=False)
            self._orders = orders
        return self._orders

    def inverse_all(self) -> np.ndarray:
        """index -> index of the inverse element.

        Built by index-order recursion (no full multiplication table needed):
        inv(z) = inv(g_t) * inv(z - step) when z ends with digit (t, e).
        """
        if self._inverses is None:
            inv = np.empty(self.order, dtype=np.int64)
            inv[0] = 0
            p, n = self.p, self.n
            gen_inv_L = [
                self.left_translation_table(self.inv(self._unit(t)))
                for t in range(1, n + 1)
            ]
            for t in range(1, n + 1):
                step = self._powers_of_p[n - t]
                L = gen_inv_L[t - 1]
                prefix = (
                    np.arange(self._powers_of_p[t - 1], dtype=np.int64) * (p * step)
                )
                for e in range(1, p):
                    block = prefix + e * step
                    inv[block] = L[inv[block - step]]
            inv.setflags(write=False)
            self._inverses = inv
        return self._inverses

    # -- structural queries --------------------------------------------------

    def exponent_of(self) -> int:
        return int(self.orders_all().max())

    def _greedy_generators(self, indices: Sequence[int]) -> List[Tuple[int, ...]]:
        """A short generating sequence for the subgroup on these indices."""
        index_set = frozenset(int(i) for i in indices)
        if len(index_set) == self.order:
            return self.generators()
        gens: List[Tuple[int, ...]] = []
        known = {0}
        for idx in sorted(index_set):
            if idx in known:
                continue
            gens.append(self.element_of_index(idx))
            known = set(self._closure_indices(gens))
            if len(known) == len(index_set):
                break
        return gens

    def _closure_indices(self, gens: Sequence[Tuple[int, ...]]) -> np.ndarray:
        known = np.zeros(self.order, dtype=bool)
        known[0] = True
        frontier = np.array([0], dtype=np.int64)
        gens = [tuple(g) for g in gens]
        while frontier.size:
            nxt = []
            for g in gens:
                cand = self.rmul_all(frontier, g)
                new = cand[~known[cand]]
                if new.size:
                    new = np.unique(new)
                    known[new] = True
                    nxt.append(new)
            frontier = np.concatenate(nxt) if nxt else np.empty(0, dtype=np.int64)
            frontier = np.unique(frontier)
        return np.nonzero(known)[0]

    def subgroup_generated(self, gens: Iterable[Tuple[int, ...]]) -> Subgroup:
        gens = [tuple(g) for g in gens if tuple(g) != self._identity]
        if not gens:
            return Subgroup(self, [0], [])
        elems = self._closure_indices(gens)
        return Subgroup(self, elems, gens)

    def _subgroup_from_indices(self, indices: Sequence[int]) -> Subgroup:
        gens = self._greedy_generators(indices)
        return Subgroup(self, indices, gens)

    def full_subgroup(self) -> Subgroup:
        return Subgroup(self, range(self.order), self.generators())

    def trivial_subgroup(self) -> Subgroup:
        return Subgroup(self, [0], [])

    def center(self) -> Subgroup:
        if self._center is None:
            mask = np.ones(self.order, dtype=bool)
            for k in range(1, self.n + 1):
                mask &= self.r_table(k) == self.l_table(k)
            self._center = self._subgroup_from_indices(np.nonzero(mask)[0])
        return self._center

    def centralizer(self, sub: Subgroup) -> Subgroup:
        if sub.parent is not self:
            raise ValueError("subgroup belongs to a different group")
        mask = np.ones(self.order, dtype=bool)
        for y in sub.generators:
            idx = np.arange(self.order, dtype=np.int64)
            mask &= self.rmul_all(idx, y) == self.left_translation_table(y)
        return self._subgroup_from_indices(np.nonzero(mask)[0])

    def is_normal(self, sub: Subgroup) -> bool:
        elems = np.asarray(sub.elements, dtype=np.int64)
        elem_set = sub._element_set
        for k in range(1, self.n + 1):
            conj = self.conjugation_table(self._unit(k))[elems]
            if not all(int(c) in elem_set for c in conj):
                return False
        return True

    def normal_closure(self, sub: Subgroup) -> Subgroup:
        current = sub
        while True:
            extra = []
            for k in range(1, self.n + 1):
                gk = self._unit(k)
                for h in current.generators:
                    c = self.conjugate(h, gk)
                    if c not in current:
                        extra.append(c)
            if not extra:
                return current
            current = self.subgroup_generated(list(current.generators) + extra)

    def commutator_with_group(self, sub: Subgroup) -> Subgroup:
        """[sub, G] for a *normal* subgroup: the normal closure of the
        commutators of generators (exact for normal subgroups)."""
        comms = []
        for h in sub.generators:
            for k in range(1, self.n + 1):
                c = self.commutator(h, self._unit(k))
                if c != self._identity:
                    comms.append(c)
        return self.normal_closure(self.subgroup_generated(comms))

    def lower_central_series(self) -> List[Subgroup]:
        series = [self.full_subgroup()]
        while series[-1].order > 1:
            nxt = self.commutator_with_group(series[-1])
            if nxt.order == series[-1].order:
                raise RuntimeError("lower central series did not descend")
            series.append(nxt)
        return series

    def enumerate_elementary_abelian(self, s: int) -> List[Subgroup]:
        """All subgroups isomorphic to (C_p)^s, in lexicographic order of
        their sorted element-index tuples."""
        if s < 1:
            raise ValueError("rank must be at least 1")
        if s > self.n:
            return []
        if not self.has_cayley_budget:
            raise ResourceBudgetError(
                f"elementary abelian enumeration needs the multiplication "
                f"table (order {self.order} > ceiling {self.cayley_ceiling})"
            )
        T = self.cayley_table()
        orders = self.orders_all()
        inv_ok = np.nonzero(orders == self.p)[0]

        def span_powers(x: int) -> List[int]:
            out = [0]
            cur = 0
            for _ in range(self.p - 1):
                cur = int(T[cur, x])
                out.append(cur)
            return out

        level: Dict[Tuple[int, ...], Tuple[Tuple[int, ...], List[int]]] = {}
        for x in inv_ok:
            pw = span_powers(int(x))
            key = tuple(sorted(pw))
            if key not in level:
                level[key] = ((int(x),), pw)
        for _ in range(2, s + 1):
            nxt: Dict[Tuple[int, ...], Tuple[Tuple[int, ...], List[int]]] = {}
            for key, (gens, elems) in level.items():
                elem_set = set(elems)
                for x in inv_ok:
                    x = int(x)
                    if x in elem_set:
                        continue
                    if any(T[g, x] != T[x, g] for g in gens):
                        continue
                    pw = span_powers(x)
                    new_elems = sorted(int(T[a, b]) for a in elems for b in pw)
                    new_key = tuple(new_elems)
                    if new_key not in nxt:
                        nxt[new_key] = (gens + (x,), new_elems)
            level = nxt
        subs = []
        for key in sorted(level):
            gens, elems = level[key]
            subs.append(
                Subgroup(self, elems, [self.element_of_index(g) for g in gens])
            )
        return subs

    def enumerate_elementary_abelian_within(self, sub: Subgroup):
        """Yield (subgroup_key, rank) for elementary abelian subgroups of sub."""
        for s in range(1, self.n + 1):
            found = False
            for cand in self.enumerate_elementary_abelian(s):
                if all(i in sub._element_set for i in cand.elements):
                    found = True
                    yield cand.key, s
            if not found:
                break

    def has_complement(self, kernel: Subgroup) -> Optional[Subgroup]:
        """A complement to a normal subgroup, or None if the extension over
        the kernel does not split.

        Searches homomorphic section lifts: each generator image outside the
        kernel is lifted across all kernel-coset choices; a choice generating
        a subgroup of order |G|/|kernel| is a complement (the converse holds
        because any complement contains such lifts).
        """
        if kernel.parent is not self:
            raise ValueError("kernel belongs to a different group")
        if not self.is_normal(kernel):
            raise ValueError("kernel is not normal")
        target = self.order // kernel.order
        if target == self.order:
            return self.full_subgroup()
        lift_gens = [
            self._unit(i)
            for i in range(1, self.n + 1)
            if self._unit(i) not in kernel
        ]
        n_combos = kernel.order ** len(lift_gens)
        if n_combos > COMPLEMENT_BUDGET:
            raise ResourceBudgetError(
                f"complement search space {n_combos} exceeds the budget"
            )
        kernel_elems = kernel.element_tuples()
        for combo in itertools.product(kernel_elems, repeat=len(lift_gens)):
            lifts = [self._mul_vec(g, z) for g, z in zip(lift_gens, combo)]
            cand = self.subgroup_generated(lifts)
            if cand.order == target:
                return cand
        return None

    def __repr__(self) -> str:
        return f"FiniteGroup(p={self.p}, gens={self.n}, order={self.order})"


# ---------------------------------------------------------------------------
# Extraspecial predicate
# ---------------------------------------------------------------------------


def is_extraspecial(g: FiniteGroup) -> bool:
    """Centre, derived subgroup and Frattini subgroup coincide with order p."""
    z = g.center()
    if z.order != g.p:
        return False
    derived = g.full_subgroup().derived_subgroup()
    if derived.key != z.key:
        return False
    frattini_gens = list(derived.generators) + list(
        g.full_subgroup().agemo().generators
    )
    frattini = g.subgroup_generated(frattini_gens)
    return frattini.key == z.key


# ---------------------------------------------------------------------------
# Module-level operation aliases
# ---------------------------------------------------------------------------


def make_group(
    pcp: PcPresentation, cayley_ceiling: int = DEFAULT_CAYLEY_CEILING
) -> FiniteGroup:
    """Materialise a group, verifying the consistency overlaps."""
    return FiniteGroup(pcp, cayley_ceiling=cayley_ceiling, check=True)


def multiply(g: FiniteGroup, x, y):
    return g.mul(tuple(x), tuple(y))


def center(g: FiniteGroup) -> Subgroup:
    return g.center()


def centralizer(g: FiniteGroup, sub: Subgroup) -> Subgroup:
    return g.centralizer(sub)


def exponent_of(g: FiniteGroup) -> int:
    return g.exponent_of()


def subgroup_generated(g: FiniteGroup, gens) -> Subgroup:
    return g.subgroup_generated(gens)


def lower_central_series(g: FiniteGroup) -> List[Subgroup]:
    return g.lower_central_series()


def enumerate_elementary_abelian(g: FiniteGroup, s: int) -> List[Subgroup]:
    return g.enumerate_elementary_abelian(s)


def has_complement(total: FiniteGroup, kernel: Subgroup) -> Optional[Subgroup]:
    return total.has_complement(kernel)


def commutator_subgroup(a: Subgroup, b: Subgroup) -> Subgroup:
    """⟨[x, y] : x in a, y in b⟩, computed from exhaustive pair commutators
    (with a vectorised fast path when the parent's multiplication table and
    both element lists are available)."""
    if a.parent is not b.parent:
        raise ValueError("subgroups belong to different parents")
    g = a.parent
    n_pairs = a.order * b.order
    if n_pairs <= PAIR_BUDGET and g.has_cayley_budget:
        T = g.cayley_table()
        inv = g.inverse_all()
        xa = np.asarray(a.elements, dtype=np.int64)
        comm_indices = set()
        for y in b.elements:
            iy = int(inv[y])
            left = T[inv[xa], iy].astype(np.int64)
            right = T[xa, y].astype(np.int64)
            comm_indices.update(int(v) for v in T[left, right])
        comm_indices.discard(0)
        gens = g._greedy_generators([0] + sorted(comm_indices))
        return g.subgroup_generated(gens)
    if n_pairs > PAIR_BUDGET:
        raise ResourceBudgetError(
            f"{n_pairs} commutator pairs exceed the exhaustive budget"
        )
    comms = set()
    for xi in a.elements:
        x = g.element_of_index(xi)
        for yi in b.elements:
            y = g.element_of_index(yi)
            comms.add(g.commutator(x, y))
    comms.discard(g.identity)
    return g.subgroup_generated(sorted(comms, key=g.index_of_element))


def subgroup_presentation(
    sub: Subgroup,
) -> Tuple[PcPresentation, List[Tuple[int, ...]], np.ndarray]:
    """Induced weighted presentation of a subgroup, plus its embedding.

    Chooses one generator per leading position occurring among the
    subgroup's normal forms (normalised to leading digit 1).  That sequence
    is polycyclic: powers and commutators of its members lie strictly
    deeper in the position chain, so greedy digit extraction rewrites them
    as tail words over the new generators.

    Returns ``(pcp, generators, embedding)``: ``generators[i]`` is the
    parent normal form of new generator ``i+1``, and ``embedding[j]`` is
    the parent element index corresponding to new element index ``j``.  The
    presented group is isomorphic to the subgroup via exactly that
    correspondence (the new index order is the mixed-radix order of the
    new exponents).
    """
    g = sub.parent
    p = g.p
    if sub.order == 1:
        raise PresentationError("the trivial subgroup has no pc generators")
    chosen: Dict[int, Tuple[int, ...]] = {}
    for idx in sub.elements:
        if idx == 0:
            continue
        x = g.element_of_index(idx)
        lead = next(t for t, e in enumerate(x, start=1) if e)
        if lead in chosen:
            continue
        d = x[lead - 1]
        if d != 1:
            x = g.power(x, pow(d, -1, p))
        chosen[lead] = x
    leads = sorted(chosen)
    gens = [chosen[t] for t in leads]
    k = len(gens)
    if p**k != sub.order:  # pragma: no cover - subgroups are closed
        raise PresentationError(
            "leading positions do not account for the subgroup order"
        )
    lead_to_new = {t: i + 1 for i, t in enumerate(leads)}

    def extract(x: Tuple[int, ...]) -> Word:
        """Normal word of a subgroup element over the new generators."""
        word = []
        while x != g.identity:
            lead = next(t for t, e in enumerate(x, start=1) if e)
            j = lead_to_new.get(lead)
            if j is None:  # pragma: no cover - closure guarantees a hit
                raise PresentationError(
                    "element escapes the induced generating sequence"
                )
            d = x[lead - 1]
            word.append((j, d))
            x = g.mul(g.power(gens[j - 1], p - d), x)
        return tuple(word)

    power_tails = {}
    for i, h in enumerate(gens, start=1):
        w = extract(g.power(h, p))
        if w:
            power_tails[i] = w
    commutator_tails = {}
    for ti in range(2, k + 1):
        for si in range(1, ti):
            w = extract(g.commutator(gens[ti - 1], gens[si - 1]))
            if w:
                commutator_tails[(ti, si)] = w
    pcp = PcPresentation(p, k, power_tails, commutator_tails)

    embed = np.zeros(1, dtype=np.int64)
    for h in reversed(gens):
        table = g.left_translation_table(h)
        blocks = [embed]
        for _ in range(1, p):
            blocks.append(table[blocks[-1]])
        embed = np.concatenate(blocks)
    return pcp, gens, embed
