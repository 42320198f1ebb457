"""Dense exact linear algebra over a configured finite field.

Matrices are 2-D numpy int64 arrays of field elements; every routine takes
the field object first, mirroring how the arithmetic is dispatched.  Besides
plain products and reduced row echelon form with a recorded transform, this
module provides:

* ``solve_in_row_space`` -- recover the combination matrix S with
  ``S (Y @ D) = H`` and classify the outcome by whether the recovered
  product ``S @ Y`` is unique;
* ``IncrementalReducer`` -- row reduction of a matrix that grows by a
  bordered block each round, reusing the previous round's reduction and
  falling back to a batch pass when the bordered update does not apply;
* Vandermonde construction and column-major (de)vectorization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .field import Field


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def mat_mul(field: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product over the field; raises ValueError on shape mismatch."""
    return field.matmul(a, b)


def _gauss_jordan(field: Field, work: np.ndarray, pivot_limit: int) -> list[int]:
    """In-place Gauss-Jordan elimination of ``work``.

    Pivots are searched in columns [0, pivot_limit) only, taking the first
    nonzero entry top-to-bottom in the leftmost unresolved column; columns
    beyond the limit ride along (augmented part).  Returns pivot columns in
    order; afterwards pivot rows sit at the top in pivot-column order.
    """
    rows = work.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(pivot_limit):
        if r >= rows:
            break
        col = work[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        piv = work[r, c]
        if piv != 1:
            work[r, c:] = field.mul(work[r, c:], field.inv(piv))
        factors = work[:, c].copy()
        factors[r] = 0
        if np.any(factors):
            # entries left of c are already settled, so restrict the update
            work[:, c:] = field.sub(work[:, c:], field.mul(factors[:, None], work[r, c:][None, :]))
        pivots.append(c)
        r += 1
    return pivots


@dataclass
class RrefResult:
    """Reduced row echelon form together with the invertible row transform
    (``transform @ original == reduced``)."""

    reduced: np.ndarray
    transform: np.ndarray
    pivot_cols: list[int]
    rank: int


def rref_with_transform(field: Field, a: np.ndarray) -> RrefResult:
    a = np.asarray(a)
    rows, cols = a.shape
    work = np.hstack([a.astype(np.int64, copy=True), eye(rows)])
    pivots = _gauss_jordan(field, work, cols)
    return RrefResult(
        reduced=work[:, :cols],
        transform=work[:, cols:],
        pivot_cols=pivots,
        rank=len(pivots),
    )


def rank(field: Field, a: np.ndarray) -> int:
    work = np.asarray(a).astype(np.int64, copy=True)
    return len(_gauss_jordan(field, work, work.shape[1]))


def independent_row_indices(field: Field, a: np.ndarray) -> list[int]:
    """Indices of a maximal linearly independent set of rows, scanning
    top-to-bottom (the pivot rows of the transposed reduction)."""
    work = np.asarray(a).T.astype(np.int64, copy=True)
    return _gauss_jordan(field, work, work.shape[1])


class SolveStatus(enum.Enum):
    UNIQUE = "unique"
    NO_SOLUTION = "no_solution"
    MULTIPLE = "multiple"


@dataclass
class SolveOutcome:
    status: SolveStatus
    solution: np.ndarray | None = None


def solve_exact(field: Field, a: np.ndarray, rhs: np.ndarray) -> SolveOutcome:
    """Classify and solve ``a @ x = rhs`` (rhs may have several columns).

    UNIQUE requires every unknown to be determined; MULTIPLE means the
    system is consistent but underdetermined.
    """
    a = np.asarray(a)
    rhs = np.asarray(rhs)
    vec = rhs.ndim == 1
    if vec:
        rhs = rhs[:, None]
    if a.shape[0] != rhs.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} vs rhs {rhs.shape}")
    cols = a.shape[1]
    work = np.hstack([a.astype(np.int64, copy=True), rhs.astype(np.int64, copy=True)])
    pivots = _gauss_jordan(field, work, cols)
    r = len(pivots)
    if np.any(work[r:, cols:]):
        return SolveOutcome(SolveStatus.NO_SOLUTION)
    if r < cols:
        return SolveOutcome(SolveStatus.MULTIPLE)
    x = work[:r, cols:]
    return SolveOutcome(SolveStatus.UNIQUE, x[:, 0] if vec else x)


def solve_in_row_space(field: Field, y: np.ndarray, dm: np.ndarray, h: np.ndarray) -> SolveOutcome:
    """Solve ``S (y @ dm) = h`` for the combination matrix S.

    UNIQUE means the recovered product ``S @ y`` is the same for every
    solution S, which holds exactly when rank(y @ dm) == rank(y); the
    returned S is then the particular solution with free components zero.
    MULTIPLE is reported when the system is consistent but some left null
    vector of ``y @ dm`` acts nontrivially on y, so the recovered product
    is ambiguous.
    """
    y = np.asarray(y)
    dm = np.asarray(dm)
    h = np.asarray(h)
    if y.shape[1] != dm.shape[0]:
        raise ValueError(f"dimension mismatch: y {y.shape} vs dm {dm.shape}")
    if h.shape[1] != dm.shape[1]:
        raise ValueError(f"dimension mismatch: h {h.shape} vs dm {dm.shape}")
    g = field.matmul(y, dm)
    ry = y.shape[0]
    work = np.hstack([g.T.astype(np.int64, copy=True), h.T.astype(np.int64, copy=True)])
    pivots = _gauss_jordan(field, work, ry)
    rg = len(pivots)
    if np.any(work[rg:, ry:]):
        return SolveOutcome(SolveStatus.NO_SOLUTION)
    if rg < rank(field, y):
        return SolveOutcome(SolveStatus.MULTIPLE)
    st = zeros(ry, h.shape[0])
    st[pivots] = work[:rg, ry:]
    return SolveOutcome(SolveStatus.UNIQUE, st.T)


def vandermonde(field: Field, points, num_rows: int) -> np.ndarray:
    """Matrix with entry (k, j) = points[j] ** (k+1), k in [0, num_rows).

    One column per evaluation point; exponents run 1..num_rows.
    """
    if num_rows < 1:
        raise ValueError("num_rows must be >= 1")
    points = np.asarray(points, dtype=np.int64)
    out = np.empty((num_rows, points.size), dtype=np.int64)
    row = points.copy()
    out[0] = row
    for k in range(1, num_rows):
        row = field.mul(row, points)
        out[k] = row
    return out


def vectorize(m: np.ndarray) -> np.ndarray:
    """Stack the columns of m into one vector (column-major order)."""
    return np.asarray(m).flatten(order="F")


def devectorize(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape length-{v.size} vector to {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


class IncrementalReducer:
    """Rolling reduced row echelon form of a matrix growing by bordered
    blocks, with the row transform recorded.

    Each round the accumulated matrix A gains a column block C, a row block
    B and a corner block D, forming [[A, C], [B, D]].  When the previous
    reduction has the clean shape [I; 0] (full column rank), only the small
    block left after cancelling B is freshly reduced and the factors are
    stitched together; otherwise the full accumulated matrix is re-reduced
    from scratch.  An optional right-hand side receives the same row
    operations, so growing linear systems can be solved without re-applying
    the transform.
    """

    def __init__(self, field: Field, a: np.ndarray, rhs: np.ndarray | None = None):
        self._f = field
        self._acc = np.asarray(a).astype(np.int64, copy=True)
        self._rhs_raw = None if rhs is None else np.asarray(rhs).astype(np.int64, copy=True)
        self.incremental_updates = 0
        self.fallback_count = 0
        self._batch()

    # -- state ---------------------------------------------------------
    @property
    def matrix(self) -> np.ndarray:
        return self._acc

    @property
    def reduced(self) -> np.ndarray:
        return self._reduced

    @property
    def transform(self) -> np.ndarray:
        return self._transform

    @property
    def pivot_cols(self) -> list[int]:
        return self._pivots

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def reduced_rhs(self) -> np.ndarray | None:
        return self._rhs_red

    def result(self) -> RrefResult:
        return RrefResult(self._reduced, self._transform, list(self._pivots), self.rank)

    @property
    def _clean(self) -> bool:
        return self.rank == self._acc.shape[1] and self._pivots == list(range(self.rank))

    # -- updates -------------------------------------------------------
    def _batch(self):
        rr = rref_with_transform(self._f, self._acc)
        self._reduced = rr.reduced
        self._transform = rr.transform
        self._pivots = rr.pivot_cols
        if self._rhs_raw is not None:
            self._rhs_red = self._f.matmul(self._transform, self._rhs_raw)
        else:
            self._rhs_red = None

    def update(self, col_block: np.ndarray, row_block: np.ndarray, corner_block: np.ndarray,
               rhs_rows: np.ndarray | None = None) -> None:
        f = self._f
        p, s = self._acc.shape
        c = np.asarray(col_block)
        b = np.asarray(row_block)
        d = np.asarray(corner_block)
        if c.shape[0] != p or b.shape[1] != s or d.shape != (b.shape[0], c.shape[1]):
            raise ValueError(
                f"blocks {c.shape}/{b.shape}/{d.shape} do not border a {p}x{s} matrix"
            )
        u, t = d.shape
        was_clean = self._clean
        self._acc = np.block([[self._acc, c], [b, d]])
        if (self._rhs_raw is None) != (rhs_rows is None):
            raise ValueError("rhs_rows must be given exactly when the reducer carries a rhs")
        if self._rhs_raw is not None:
            rhs_rows = np.asarray(rhs_rows)
            if rhs_rows.shape != (u, self._rhs_raw.shape[1]):
                raise ValueError(f"rhs_rows shape {rhs_rows.shape} != ({u}, rhs width)")
            self._rhs_raw = np.vstack([self._rhs_raw, rhs_rows])
        if not was_clean:
            self.fallback_count += 1
            self._batch()
            return

        # previous reduction is [I_s; 0]: reduce only the bordered blocks
        rc = f.matmul(self._transform, c)           # p x t
        c1 = rc[:s]
        d_new = f.sub(d, f.matmul(b, c1))           # u x t, B cancelled by I_s
        rr = rref_with_transform(f, d_new)
        kd = rr.rank
        piv_d = rr.pivot_cols
        # cancel the upper-right block at the freshly found pivot columns
        c_top = f.sub(rc, f.matmul(rc[:, piv_d], rr.reduced[:kd]))
        if np.any(c_top[s:]):
            # new columns reach outside the span the block formula covers
            self.fallback_count += 1
            self._batch()
            return
        self.incremental_updates += 1

        bottom_t = np.hstack([f.neg(f.matmul(rr.transform, f.matmul(b, self._transform[:s]))),
                              rr.transform])        # u x (p+u)
        top_t = np.hstack([self._transform, zeros(p, u)])
        top_t = f.sub(top_t, f.matmul(rc[:, piv_d], bottom_t[:kd]))

        reduced_pre = np.block([
            [self._reduced, c_top],
            [zeros(u, s), rr.reduced],
        ])
        transform_pre = np.vstack([top_t, bottom_t])
        if self._rhs_raw is not None:
            bot_rhs = f.matmul(rr.transform, f.sub(rhs_rows, f.matmul(b, self._rhs_red[:s])))
            top_rhs = f.sub(self._rhs_red, f.matmul(rc[:, piv_d], bot_rhs[:kd]))
            rhs_pre = np.vstack([top_rhs, bot_rhs])

        # place pivot rows on top in pivot-column order
        perm = (list(range(s)) + list(range(p, p + kd))
                + list(range(s, p)) + list(range(p + kd, p + u)))
        self._reduced = reduced_pre[perm]
        self._transform = transform_pre[perm]
        self._pivots = list(range(s)) + [s + j for j in piv_d]
        if self._rhs_raw is not None:
            self._rhs_red = rhs_pre[perm]

    def verify(self) -> bool:
        """Check transform @ accumulated == reduced and rref shape; used by
        tests to cross-validate the incremental path against batch."""
        f = self._f
        if not np.array_equal(f.matmul(self._transform, self._acc), self._reduced):
            return False
        batch = rref_with_transform(f, self._acc)
        return (np.array_equal(batch.reduced, self._reduced)
                and batch.pivot_cols == self._pivots)
