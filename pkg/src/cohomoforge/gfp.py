"""Exact linear algebra over the prime field F_p.

Everything here is exact integer arithmetic: residues live in ``[0, p)`` as
machine words (numpy ``int64`` during elimination) and are reduced after every
multiply-add.  The module provides

- :class:`FpScalar` — a single residue with an attached prime modulus,
- :class:`FpMatrix` — an immutable matrix with an internal dense/sparse
  storage split (very sparse matrices keep a coordinate dictionary),
- :func:`rref_rank`, :func:`solve_linear`, :func:`kernel_basis` — plain
  Gauss–Jordan elimination, deterministic solving (free variables pinned to
  zero), and null-space bases,
- :class:`StreamingRowSpace` / :func:`streaming_membership` — an eagerly
  reduced echelon basis that consumes an arbitrarily long stream of rows in
  ``O(cols^2)`` memory, used for coboundary-membership solving where the full
  row set is far too large to materialize.

Only prime moduli with ``2 < p < 2**16`` are accepted; all target computations
use tiny primes and plain elimination is more than fast enough at that scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "FpMatrix",
    "FpScalar",
    "InsertResult",
    "ModulusMismatchError",
    "SparseRowStream",
    "StreamingRowSpace",
    "inverse_mod",
    "is_prime",
    "kernel_basis",
    "rref_rank",
    "solve_linear",
    "streaming_membership",
]

#: Largest allowed modulus (exclusive).  Keeps every product of two residues
#: comfortably inside int64 even after summing ~2**30 terms.
MAX_MODULUS = 1 << 16

#: Matrices with density below this fraction are stored as coordinate dicts.
#: The choice is internal and observationally irrelevant.
SPARSE_DENSITY_THRESHOLD = 0.05


class ModulusMismatchError(ValueError):
    """Raised when operands carry different moduli."""


class DimensionMismatchError(ValueError):
    """Raised when operand shapes are incompatible."""


def is_prime(n: int) -> bool:
    """Deterministic primality test for small integers (trial division)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _check_modulus(p: int) -> int:
    if not isinstance(p, (int, np.integer)):
        raise TypeError(f"modulus must be an integer, got {type(p).__name__}")
    p = int(p)
    if not 2 < p < MAX_MODULUS:
        raise ValueError(f"modulus must satisfy 2 < p < {MAX_MODULUS}, got {p}")
    if not is_prime(p):
        raise ValueError(f"modulus must be prime, got {p}")
    return p


def inverse_mod(a: int, p: int) -> int:
    """Multiplicative inverse of ``a`` modulo the prime ``p``."""
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse modulo {p}")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class FpScalar:
    """A residue in ``[0, p)`` for a fixed prime modulus ``p > 2``."""

    value: int
    modulus: int

    def __post_init__(self) -> None:
        _check_modulus(self.modulus)
        if not 0 <= self.value < self.modulus:
            raise ValueError(
                f"value {self.value} out of range [0, {self.modulus})"
            )

    @classmethod
    def reduce(cls, value: int, modulus: int) -> "FpScalar":
        """Build a scalar from any integer, reducing it into ``[0, p)``."""
        return cls(int(value) % _check_modulus(modulus), modulus)

    def _coerce(self, other: Union["FpScalar", int]) -> "FpScalar":
        if isinstance(other, FpScalar):
            if other.modulus != self.modulus:
                raise ModulusMismatchError(
                    f"moduli differ: {self.modulus} vs {other.modulus}"
                )
            return other
        if isinstance(other, (int, np.integer)):
            return FpScalar.reduce(int(other), self.modulus)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: Union["FpScalar", int]) -> "FpScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return FpScalar((self.value + o.value) % self.modulus, self.modulus)

    __radd__ = __add__

    def __sub__(self, other: Union["FpScalar", int]) -> "FpScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return FpScalar((self.value - o.value) % self.modulus, self.modulus)

    def __rsub__(self, other: Union["FpScalar", int]) -> "FpScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other: Union["FpScalar", int]) -> "FpScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return FpScalar((self.value * o.value) % self.modulus, self.modulus)

    __rmul__ = __mul__

    def __neg__(self) -> "FpScalar":
        return FpScalar((-self.value) % self.modulus, self.modulus)

    def inverse(self) -> "FpScalar":
        return FpScalar(inverse_mod(self.value, self.modulus), self.modulus)

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0


def _as_residue_array(data, modulus: int, *, ndim: int) -> np.ndarray:
    """Convert nested sequences / numpy data / FpScalar's to an int64 residue array."""

    def strip(x):
        if isinstance(x, FpScalar):
            if x.modulus != modulus:
                raise ModulusMismatchError(
                    f"moduli differ: {modulus} vs {x.modulus}"
                )
            return x.value
        return x

    if isinstance(data, np.ndarray):
        arr = data.astype(np.int64, copy=True)
    else:
        seq = list(data)
        if ndim == 1:
            arr = np.array([strip(x) for x in seq], dtype=np.int64)
        else:
            arr = np.array([[strip(x) for x in row] for row in seq], dtype=np.int64)
    if arr.ndim != ndim:
        raise DimensionMismatchError(
            f"expected a {ndim}-dimensional array, got shape {arr.shape}"
        )
    return arr % modulus


class FpMatrix:
    """An immutable matrix over F_p.

    Construction normalises every entry into ``[0, p)``.  Internally either a
    dense ``int64`` array or, below :data:`SPARSE_DENSITY_THRESHOLD`, a
    coordinate dictionary is kept; the choice never changes observable
    behaviour.
    """

    __slots__ = ("rows", "cols", "modulus", "_dense", "_sparse")

    def __init__(self, data, modulus: int, *, shape: Optional[tuple] = None):
        self.modulus = _check_modulus(modulus)
        if isinstance(data, Mapping):
            if shape is None:
                raise ValueError("coordinate construction requires an explicit shape")
            rows, cols = shape
            entries = {}
            for (i, j), v in data.items():
                if isinstance(v, FpScalar):
                    if v.modulus != self.modulus:
                        raise ModulusMismatchError(
                            f"moduli differ: {self.modulus} vs {v.modulus}"
                        )
                    v = v.value
                if not (0 <= i < rows and 0 <= j < cols):
                    raise DimensionMismatchError(
                        f"entry ({i}, {j}) outside shape {shape}"
                    )
                v = int(v) % self.modulus
                if v:
                    entries[(int(i), int(j))] = v
            self.rows, self.cols = int(rows), int(cols)
            density = len(entries) / max(1, self.rows * self.cols)
            if density < SPARSE_DENSITY_THRESHOLD:
                self._sparse = entries
                self._dense = None
            else:
                self._sparse = None
                self._dense = self._dense_from_entries(entries)
        else:
            arr = _as_residue_array(data, self.modulus, ndim=2)
            self.rows, self.cols = arr.shape
            self._dense = arr
            self._sparse = None
        # Prevent accidental in-place mutation of the dense backing store.
        if self._dense is not None:
            self._dense.setflags(write=False)

    def _dense_from_entries(self, entries) -> np.ndarray:
        arr = np.zeros((self.rows, self.cols), dtype=np.int64)
        for (i, j), v in entries.items():
            arr[i, j] = v
        return arr

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: int) -> "FpMatrix":
        return cls({}, modulus, shape=(rows, cols))

    @classmethod
    def identity(cls, n: int, modulus: int) -> "FpMatrix":
        return cls(np.eye(n, dtype=np.int64), modulus)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], modulus: int) -> "FpMatrix":
        return cls(list(rows), modulus)

    # -- inspection ---------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    @property
    def storage(self) -> str:
        return "sparse" if self._sparse is not None else "dense"

    def to_dense(self) -> np.ndarray:
        """A writable int64 copy of the matrix."""
        if self._sparse is not None:
            return self._dense_from_entries(self._sparse)
        return self._dense.copy()

    def entry(self, i: int, j: int) -> FpScalar:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise DimensionMismatchError(f"index ({i}, {j}) outside {self.shape}")
        if self._sparse is not None:
            v = self._sparse.get((i, j), 0)
        else:
            v = int(self._dense[i, j])
        return FpScalar(v, self.modulus)

    def density(self) -> float:
        if self.rows * self.cols == 0:
            return 0.0
        if self._sparse is not None:
            nnz = len(self._sparse)
        else:
            nnz = int(np.count_nonzero(self._dense))
        return nnz / (self.rows * self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.shape == other.shape
            and bool(np.array_equal(self.to_dense(), other.to_dense()))
        )

    def __hash__(self) -> int:
        return hash((self.modulus, self.shape, self.to_dense().tobytes()))

    def __repr__(self) -> str:
        return (
            f"FpMatrix({self.rows}x{self.cols} mod {self.modulus}, "
            f"{self.storage})"
        )

    # -- arithmetic helpers used by callers and tests -----------------------

    def __matmul__(self, other) -> "FpMatrix":
        if isinstance(other, FpMatrix):
            if other.modulus != self.modulus:
                raise ModulusMismatchError(
                    f"moduli differ: {self.modulus} vs {other.modulus}"
                )
            if self.cols != other.rows:
                raise DimensionMismatchError(
                    f"cannot multiply {self.shape} by {other.shape}"
                )
            return FpMatrix(
                (self.to_dense() @ other.to_dense()) % self.modulus, self.modulus
            )
        return NotImplemented

    def apply(self, vec) -> np.ndarray:
        """Matrix–vector product over F_p; accepts any residue sequence."""
        v = _as_residue_array(vec, self.modulus, ndim=1)
        if v.shape[0] != self.cols:
            raise DimensionMismatchError(
                f"vector length {v.shape[0]} != cols {self.cols}"
            )
        return (self.to_dense() @ v) % self.modulus


def _require_same_modulus(m: FpMatrix, modulus: Optional[int]) -> None:
    if modulus is not None and m.modulus != modulus:
        raise ModulusMismatchError(f"moduli differ: {m.modulus} vs {modulus}")


def _rref_array(a: np.ndarray, p: int) -> tuple:
    """In-place Gauss–Jordan on an int64 residue array.  Returns pivot columns."""
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        inv = inverse_mod(int(a[r, c]), p)
        if inv != 1:
            a[r] = (a[r] * inv) % p
        colvals = a[:, c].copy()
        colvals[r] = 0
        hit = np.nonzero(colvals)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(colvals[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rref_rank(m: FpMatrix) -> tuple:
    """Unique reduced row echelon form of ``m`` together with its rank."""
    arr, pivots = _rref_array(m.to_dense(), m.modulus)
    return FpMatrix(arr, m.modulus), len(pivots)


def solve_linear(m: FpMatrix, rhs) -> Optional[np.ndarray]:
    """One exact solution of ``m @ x = rhs``, or ``None`` if inconsistent.

    Deterministic: free variables are pinned to zero, so repeated calls give
    the identical witness.
    """
    b = _as_residue_array(rhs, m.modulus, ndim=1)
    if b.shape[0] != m.rows:
        raise DimensionMismatchError(
            f"rhs length {b.shape[0]} != rows {m.rows}"
        )
    aug = np.concatenate([m.to_dense(), b[:, None]], axis=1)
    arr, pivots = _rref_array(aug, m.modulus)
    if pivots and pivots[-1] == m.cols:
        return None  # a row reduced to (0 ... 0 | nonzero)
    x = np.zeros(m.cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = arr[i, m.cols]
    return x


def kernel_basis(m: FpMatrix) -> list:
    """Deterministic basis of the right null space ``{x : m @ x = 0}``.

    One basis vector per free column, ordered by ascending free column; the
    vector has value 1 at its free column.
    """
    arr, pivots = _rref_array(m.to_dense(), m.modulus)
    p = m.modulus
    pivot_set = set(pivots)
    free_cols = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free_cols:
        v = np.zeros(m.cols, dtype=np.int64)
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-arr[i, f]) % p
        basis.append(v)
    return basis


class InsertResult(NamedTuple):
    """Outcome of one :meth:`StreamingRowSpace.insert` call."""

    in_span: bool
    pivot: Optional[int]  # pivot column of the newly added basis row, if any


class StreamingRowSpace:
    """Row space of a stream of F_p vectors, kept in reduced echelon form.

    Basis rows are split into a *settled* block and a short *pending* tail
    of recently added rows.  Both blocks are kept mutually reduced within
    themselves (every row is zero at every other row's pivot column), but
    clearing pending pivot columns out of the settled block is deferred.
    Reducing an incoming row is then two vectorised passes — one against
    each block — because subtraction of mutually reduced rows cannot create
    new nonzeros at that block's pivot columns.  Keeping the tail small
    makes its upkeep cheap, and once it reaches :attr:`_FLUSH` rows it is
    folded into the settled block with blocked float64 matrix products
    (exact: every intermediate integer stays far below 2**53), which moves
    the quadratic bulk of the elimination into fast dense multiplies.  The
    per-row outcomes and the final reduced basis are identical to eager
    row-at-a-time elimination.

    Memory stays ``O(rank * cols)`` no matter how many rows are streamed.
    Single-writer: callers must not interleave inserts from several threads.
    """

    #: Pending rows accumulated before a vectorised fold into the basis.
    _FLUSH = 256
    #: Settled rows touched per fold chunk (bounds temporary memory).
    _CHUNK = 2048

    def __init__(self, cols: int, modulus: int):
        self.modulus = _check_modulus(modulus)
        if cols < 1:
            raise ValueError(f"cols must be positive, got {cols}")
        self.cols = int(cols)
        self._dtype = np.uint8 if self.modulus < 256 else np.int64
        self._capacity = min(64, self.cols)
        self._basis = np.zeros((self._capacity, self.cols), dtype=self._dtype)
        self._nrows = 0
        self._settled = 0  # rows [0:_settled) are mutually fully reduced
        self._pend_pivots = np.zeros(self._FLUSH, dtype=np.int64)
        self._pivot_cols: list = []  # pivot column of each basis row, in order
        self._row_of_pivot = np.full(self.cols, -1, dtype=np.int64)

    # -- inspection ---------------------------------------------------------

    @property
    def rank(self) -> int:
        return self._nrows

    @property
    def pivot_index(self) -> dict:
        """Mapping pivot column -> basis row position."""
        return {c: i for i, c in enumerate(self._pivot_cols)}

    @property
    def pivot_columns(self) -> tuple:
        return tuple(self._pivot_cols)

    def basis_rows(self) -> np.ndarray:
        """Read-only view of the fully reduced basis (folds pending rows)."""
        self._flush()
        view = self._basis[: self._nrows]
        view.setflags(write=False)
        return view

    def basis_row(self, i: int) -> np.ndarray:
        self._flush()
        return self._basis[i].astype(np.int64)

    # -- core ---------------------------------------------------------------

    def _reduce(self, row) -> np.ndarray:
        vec = np.asarray(row, dtype=np.int64)
        if vec.ndim != 1 or vec.shape[0] != self.cols:
            raise DimensionMismatchError(
                f"row length {vec.shape} != cols {self.cols}"
            )
        vec = vec % self.modulus
        if self._settled:
            nz = np.nonzero(vec)[0]
            if nz.size:
                hit_rows = self._row_of_pivot[nz]
                mask = (hit_rows >= 0) & (hit_rows < self._settled)
                if mask.any():
                    rows_hit = hit_rows[mask]
                    coeffs = vec[nz[mask]]
                    vec = (
                        vec - coeffs @ self._basis[rows_hit].astype(np.int64)
                    ) % self.modulus
        # Pending rows are mutually reduced and zero at settled pivots, so a
        # single combined subtraction clears every pending pivot at once.
        n_pend = self._nrows - self._settled
        if n_pend:
            vals = vec[self._pend_pivots[:n_pend]]
            nzp = np.nonzero(vals)[0]
            if nzp.size:
                rows_hit = self._basis[self._settled + nzp].astype(np.int64)
                vec = (vec - vals[nzp] @ rows_hit) % self.modulus
        return vec

    def contains(self, row) -> bool:
        """Membership test without inserting."""
        return not self._reduce(row).any()

    def _grow(self) -> None:
        new_cap = min(self.cols, max(self._capacity * 2, 64))
        fresh = np.zeros((new_cap, self.cols), dtype=self._dtype)
        fresh[: self._nrows] = self._basis[: self._nrows]
        self._basis = fresh
        self._capacity = new_cap

    def _flush(self) -> None:
        """Fold the pending tail into the settled, fully reduced block.

        The tail is already mutually reduced, so the fold only has to clear
        the new pivot columns out of the settled block.  One matrix product
        per chunk is exact: every intermediate integer stays below
        flush_size * modulus**2 < 2**53.
        """
        q = self._nrows - self._settled
        if q == 0:
            return
        p = self.modulus
        s = self._settled
        if s:
            pivs = self._pend_pivots[:q]
            pending_f = self._basis[s : self._nrows].astype(np.float64)
            for start in range(0, s, self._CHUNK):
                stop = min(start + self._CHUNK, s)
                block = self._basis[start:stop].astype(np.float64)
                coeffs = block[:, pivs]
                if np.any(coeffs):
                    block = (block - coeffs @ pending_f) % p
                    self._basis[start:stop] = block.astype(self._dtype)
        self._settled = self._nrows

    def _clear_pending_column(self, lead: int, residual: np.ndarray) -> None:
        """Zero column ``lead`` in the pending tail using ``residual``.

        Keeps the tail mutually reduced when ``residual`` (whose leading
        entry is a 1 at ``lead``) becomes its newest row.
        """
        p = self.modulus
        tail = self._basis[self._settled : self._nrows]
        col = tail[:, lead]
        hits = np.nonzero(col)[0]
        if hits.size == 0:
            return
        if self._dtype == np.uint8 and p <= 127:
            # Group rows by coefficient: uint8 sums stay below 2p <= 254.
            for c in np.unique(col[hits]):
                rows_c = hits[col[hits] == c]
                shift = ((p - (int(c) * residual) % p) % p).astype(np.uint8)
                blk = tail[rows_c] + shift
                tail[rows_c] = np.where(blk >= p, blk - p, blk)
        else:
            blk = tail[hits].astype(np.int64)
            blk = (blk - np.outer(col[hits].astype(np.int64), residual)) % p
            tail[hits] = blk.astype(self._dtype)

    def insert(self, row) -> InsertResult:
        """Reduce ``row`` against the basis; add the residual if nonzero.

        Returns ``(in_span=True, pivot=None)`` when the row was already in
        the span, otherwise ``(False, pivot_column_of_new_row)``.
        """
        residual = self._reduce(row)
        nz = np.nonzero(residual)[0]
        if nz.size == 0:
            return InsertResult(True, None)
        lead = int(nz[0])
        inv = inverse_mod(int(residual[lead]), self.modulus)
        if inv != 1:
            residual = (residual * inv) % self.modulus
        self._clear_pending_column(lead, residual)
        if self._nrows == self._capacity:
            self._grow()
        self._basis[self._nrows] = residual.astype(self._dtype)
        self._row_of_pivot[lead] = self._nrows
        self._pivot_cols.append(lead)
        self._pend_pivots[self._nrows - self._settled] = lead
        self._nrows += 1
        if self._nrows - self._settled >= self._FLUSH:
            self._flush()
        return InsertResult(False, lead)


def streaming_membership(space: StreamingRowSpace, row) -> tuple:
    """Test ``row`` against ``space``; insert its residual when independent.

    Returns ``(in_span, space)``.  The space is updated in place (single
    writer); the final basis size is independent of insertion order for any
    fixed row multiset.
    """
    result = space.insert(row)
    return result.in_span, space


class SparseRowStream:
    """Row-space builder for very long streams of very sparse, wide rows.

    Wraps a :class:`StreamingRowSpace` and adds a *null-space certificate*:
    a basis ``N`` (stored as columns) of the right null space of the rows
    folded so far.  A sparse incoming row ``x`` satisfies ``x @ N == 0``
    exactly when it lies in the folded span, and that test costs only a few
    gathered rows of ``N`` — the overwhelming majority of stream rows (all
    repeats of an already-spanned functional) are recognized this way and
    are never expanded to dense vectors.  Rows that fail the test take the
    exact dense path through the wrapped space, so per-row outcomes are
    identical to feeding every row to :meth:`StreamingRowSpace.insert`.

    ``N`` is refreshed lazily: new basis rows accumulate in a window of at
    most :attr:`_NFOLD`, then one batched update intersects ``N`` with their
    null spaces using float32 matrix products (exact — all intermediate
    integers stay far below 2**24).

    Memory is ``O(cols^2)`` (basis plus certificate).  Single writer.
    """

    #: New basis rows accumulated before the null certificate is refreshed.
    _NFOLD = 64
    #: Null-basis columns processed per matrix product (bounds temporaries).
    _CHUNK = 4096

    def __init__(self, cols: int, modulus: int):
        self.modulus = _check_modulus(modulus)
        if cols < 1:
            raise ValueError(f"cols must be positive, got {cols}")
        self.cols = int(cols)
        self.space = StreamingRowSpace(cols, modulus)
        # float32 products sum at most cols terms, each below (p-1)^2; keep
        # every intermediate under 2**24 so they are exact.
        if (self.modulus - 1) ** 2 * self.cols >= 1 << 24:
            raise ValueError(
                "SparseRowStream precision bound exceeded: "
                f"(p-1)^2 * cols = {(self.modulus - 1) ** 2 * self.cols} "
                f">= 2^24"
            )
        # Columns 0..width-1 of _null span the right null space of the rows
        # folded so far; initially the whole space (no rows folded).
        self._null = np.zeros((self.cols, self.cols), dtype=np.int8)
        np.fill_diagonal(self._null, 1)
        self._width = self.cols
        self._folded = 0  # basis rows reflected in the certificate
        self.rows_seen = 0

    @property
    def rank(self) -> int:
        return self.space.rank

    @property
    def pivot_columns(self) -> tuple:
        return self.space.pivot_columns

    def insert_block(self, cols: np.ndarray, vals: np.ndarray) -> np.ndarray:
        """Insert rows given in padded sparse form, in order.

        ``cols`` and ``vals`` are int64 arrays of shape ``(m, k)``: row ``i``
        is the vector with ``vals[i, t]`` added at column ``cols[i, t]``
        (duplicate columns accumulate; entries with value 0 are padding).
        Returns an int64 array of length ``m`` holding the pivot column of
        each row that extended the basis and -1 for rows already in the
        span.  Outcomes equal those of dense one-at-a-time insertion.
        """
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64) % self.modulus
        if cols.ndim != 2 or cols.shape != vals.shape:
            raise DimensionMismatchError(
                f"cols shape {cols.shape} != vals shape {vals.shape}"
            )
        m, k = cols.shape
        self.rows_seen += m
        nulls = self._null[:, : self._width]
        v = np.zeros((m, self._width), dtype=np.int32)
        for t in range(k):
            v += vals[:, t : t + 1].astype(np.int32) * nulls[cols[:, t]]
        v %= self.modulus
        out = np.full(m, -1, dtype=np.int64)
        candidates = np.nonzero(v.any(axis=1))[0]
        for i in candidates:
            dense = np.zeros(self.cols, dtype=np.int64)
            np.add.at(dense, cols[i], vals[i])
            result = self.space.insert(dense)
            if not result.in_span:
                out[i] = result.pivot
                if self.space.rank - self._folded >= self._NFOLD:
                    self._refresh_certificate()
        return out

    def insert_sparse(self, cols, vals) -> InsertResult:
        """Single-row convenience wrapper around :meth:`insert_block`."""
        out = self.insert_block(
            np.asarray(cols, dtype=np.int64)[None, :],
            np.asarray(vals, dtype=np.int64)[None, :],
        )
        if out[0] < 0:
            return InsertResult(True, None)
        return InsertResult(False, int(out[0]))

    def _refresh_certificate(self) -> None:
        """Intersect the certificate with the new basis rows' null spaces.

        With ``R`` the basis rows not yet folded and ``W = R @ N``, the new
        null space is ``{N c : W c = 0}``; a reduced form of ``W`` with
        pivot columns ``J`` turns that into ``(N - N[:, J] @ U)`` restricted
        to the free columns.  ``W`` has full row rank because the new rows
        are independent modulo the folded span.
        """
        space = self.space
        fresh = space.rank - self._folded
        if fresh == 0:
            return
        p = self.modulus
        width = self._width
        nulls = self._null[:, :width]
        rows = space._basis[self._folded : space._nrows].astype(np.float32)
        w = np.empty((fresh, width), dtype=np.int64)
        for start in range(0, width, self._CHUNK):
            stop = min(start + self._CHUNK, width)
            prod = rows @ nulls[:, start:stop].astype(np.float32)
            w[:, start:stop] = prod.astype(np.int64) % p
        pivots, u = _row_reduce_wide(w, p)
        free = np.setdiff1d(
            np.arange(width, dtype=np.int64), pivots, assume_unique=True
        )
        nj = nulls[:, pivots].astype(np.float32)
        u_free = u[:, free].astype(np.float32)
        new_width = width - fresh
        for start in range(0, new_width, self._CHUNK):
            stop = min(start + self._CHUNK, new_width)
            src = nulls[:, free[start:stop]].astype(np.float32)
            src = (src - nj @ u_free[:, start:stop]) % p
            self._null[:, start:stop] = src.astype(np.int8)
        self._width = new_width
        self._folded = space.rank


def _row_reduce_wide(w: np.ndarray, p: int) -> tuple:
    """Pivot columns and reduced rows of a short, wide full-rank matrix.

    Returns ``(pivots, u)`` with ``u[:, pivots]`` the identity.  ``w`` is
    modified in place.  Exactness: intermediates stay below ``p**2 * rows``.
    """
    k, width = w.shape
    pivots = np.empty(k, dtype=np.int64)
    for i in range(k):
        row = w[i]
        nz = np.nonzero(row)[0]
        if nz.size == 0:
            raise ArithmeticError("certificate update lost row independence")
        lead = int(nz[0])
        pivots[i] = lead
        row *= inverse_mod(int(row[lead]), p)
        row %= p
        if i + 1 < k:
            coeffs = w[i + 1 :, lead].copy()
            hit = np.nonzero(coeffs)[0]
            if hit.size:
                w[i + 1 + hit] = (w[i + 1 + hit] - np.outer(coeffs[hit], row)) % p
    # wp is unit upper triangular; invert it bottom-up, then one exact
    # float32 product yields the fully reduced rows.
    wp = w[:, pivots]
    inv = np.eye(k, dtype=np.int64)
    for i in range(k - 2, -1, -1):
        inv[i] = (inv[i] - wp[i, i + 1 :] @ inv[i + 1 :]) % p
    u = (inv.astype(np.float32) @ w.astype(np.float32)) % p
    return pivots, u.astype(np.int64)
