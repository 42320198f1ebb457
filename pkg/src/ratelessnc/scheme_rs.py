"""Random-secret scheme: no side channel, hashes ride the public network.

The source and sink pre-share random symbols (independent of the message).
Per stage k the encoder turns its share into a parity-check row block
``D_k`` (powers of the shared points) and targets ``h_k``, solves the
suffix ``l_k = h_k - D_k w`` for the vectorized message w, and ships two
packet kinds through separate channels:

* long packets: random combinations of (W | I_b), as in the secret-channel
  scheme;
* short packets: random combinations of a staircase of suffix blocks
  ``(L_k | dummy 0 | 0 | I)``, whose width grows with the stage.

The decoder extracts column bases of both stacked observations (the
trailing identity columns are independent with overwhelming probability),
expresses the rest in those bases, and assembles one linear key equation
over the unknown message and suffix entries; a unique solution decodes the
message.  Positional bookkeeping of the dummy padding is the delicate
part: the same index map drives the staircase assembly, the deletion of
dummy columns from the middle block, and the column order of the parity
block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .field import Field
from .linalg import SolveStatus
from .records import Decode, DecodeResult, TrialRecord
from .scheme_sc import SourceMessage


@dataclass(frozen=True)
class RsParams:
    """Shape parameters: message b x n, short-packet rank margin sigma,
    hash block width m, bound cbar on long-packet opportunities."""

    b: int
    n: int
    sigma: int
    m: int
    cbar: int

    def __post_init__(self):
        if min(self.b, self.n, self.sigma, self.m, self.cbar) < 1:
            raise ValueError("all RsParams fields must be >= 1")
        need = 2 * self.b * self.cbar + 2 * self.sigma * self.cbar + 1
        if self.sigma * self.m < need:
            raise ValueError(
                f"parameter rule violated: sigma*m = {self.sigma * self.m} < "
                f"2*b*cbar + 2*sigma*cbar + 1 = {need}"
            )

    @staticmethod
    def auto_m(b: int, sigma: int, cbar: int) -> int:
        """Smallest m satisfying sigma*m >= 2*b*cbar + 2*sigma*cbar + 1."""
        need = 2 * b * cbar + 2 * sigma * cbar + 1
        return -(-need // sigma)

    def alpha(self, k: int) -> int:
        return k * self.sigma * self.m

    def alpha_total(self, i: int) -> int:
        return self.sigma * self.m * i * (i + 1) // 2

    def check_field(self, field: Field) -> None:
        if self.n * self.b >= field.q:
            raise ValueError(f"n*b = {self.n * self.b} must be below the field order {field.q}")


class SharedSecret:
    """Pre-shared random symbols, drawn lazily stage by stage from a
    dedicated generator so they are independent of the message."""

    def __init__(self, field: Field, params: RsParams, rng: np.random.Generator):
        self.field = field
        self.params = params
        self._rng = rng
        self._stages: list[tuple[np.ndarray, np.ndarray]] = []

    @classmethod
    def from_symbols(cls, field: Field, params: RsParams,
                     stages: list[tuple[np.ndarray, np.ndarray]]) -> "SharedSecret":
        """Wrap explicitly agreed symbols (alpha_k points and targets per
        stage) instead of drawing them."""
        secret = cls(field, params, np.random.default_rng(0))
        for k, (d, h) in enumerate(stages, start=1):
            d = np.asarray(d, dtype=np.int64)
            h = np.asarray(h, dtype=np.int64)
            if d.size != params.alpha(k) or h.size != params.alpha(k):
                raise ValueError(f"stage {k} needs alpha_k = {params.alpha(k)} symbols each")
            secret._stages.append((d, h))
        secret._rng = None  # explicit secrets only; no lazy extension
        return secret

    def stage(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Parity points d^(k) and hash targets h^(k), alpha_k of each."""
        if k < 1:
            raise ValueError("stages are 1-based")
        while len(self._stages) < k:
            if self._rng is None:
                raise ValueError(f"no shared symbols agreed for stage {len(self._stages) + 1}")
            a = self.params.alpha(len(self._stages) + 1)
            self._stages.append((self.field.sample(self._rng, a),
                                 self.field.sample(self._rng, a)))
        return self._stages[k - 1]

    @property
    def consumed_symbols(self) -> int:
        return sum(2 * d.size for d, _ in self._stages)

    def parity_matrix(self, k: int) -> np.ndarray:
        """D_k with entry (i, j) = (d_i)^(j+1), j < n*b."""
        d_pts, _ = self.stage(k)
        return linalg.vandermonde(self.field, d_pts, self.params.n * self.params.b).T

    def stacked_parity(self, i: int) -> np.ndarray:
        return np.vstack([self.parity_matrix(k) for k in range(1, i + 1)])

    def stacked_targets(self, i: int) -> np.ndarray:
        return np.concatenate([self.stage(k)[1] for k in range(1, i + 1)])


@dataclass
class SuffixBlock:
    """Stage-k suffix: l_k = h_k - D_k w reshaped to sigma x (k m)."""

    stage: int
    script_l: np.ndarray
    l_vec: np.ndarray


def rs_make_suffix(field: Field, w_vec: np.ndarray, secret: SharedSecret,
                   k: int) -> SuffixBlock:
    p = secret.params
    if w_vec.size != p.n * p.b:
        raise ValueError(f"message vector length {w_vec.size} != n*b = {p.n * p.b}")
    d_k = secret.parity_matrix(k)
    _, h_k = secret.stage(k)
    l_vec = field.sub(h_k, field.matmul(d_k, w_vec[:, None])[:, 0])
    return SuffixBlock(stage=k, script_l=linalg.devectorize(l_vec, p.sigma, k * p.m),
                       l_vec=l_vec)


def l_entry_map(i: int, m: int, sigma: int) -> np.ndarray:
    """Map the non-identity region of the stage-i staircase to suffix
    symbol indices.

    Entry [c, (k-1)*sigma + s] is the index of L-column c, block-k row s in
    the concatenated suffix vector (l_1 .. l_i), or -1 where the position
    is dummy zero padding (block k ends at column k*m)."""
    out = np.full((i * m, i * sigma), -1, dtype=np.int64)
    offset = 0
    for k in range(1, i + 1):
        width = k * m
        cols = np.arange(width)
        rows = slice((k - 1) * sigma, k * sigma)
        out[:width, rows] = offset + cols[:, None] * sigma + np.arange(sigma)[None, :]
        offset += k * sigma * m
    return out


def assemble_staircase(params: RsParams, suffixes: list[SuffixBlock]) -> np.ndarray:
    """Stack the suffix blocks as (script_l | dummy 0 | 0 | I_sigma) rows,
    re-padded to the current stage's width i*(m + sigma)."""
    i = len(suffixes)
    m, sigma = params.m, params.sigma
    out = linalg.zeros(i * sigma, i * (m + sigma))
    for sfx in suffixes:
        k = sfx.stage
        rows = slice((k - 1) * sigma, k * sigma)
        out[rows, : k * m] = sfx.script_l
        out[rows, i * m + (k - 1) * sigma: i * m + k * sigma] = linalg.eye(sigma)
    return out


class RsEncoder:
    """Stage-sequential encoder for one session."""

    def __init__(self, field: Field, params: RsParams, msg: SourceMessage,
                 secret: SharedSecret):
        if (msg.b, msg.n) != (params.b, params.n):
            raise ValueError("message shape does not match params")
        params.check_field(field)
        self.field = field
        self.params = params
        self.msg = msg
        self.secret = secret
        self.w_vec = linalg.vectorize(msg.w)
        self.suffixes: list[SuffixBlock] = []

    def encode_stage(self, i: int, c_i: int, cbar_i: int,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Long packets X_i = K_i X0 and short packets A_i = G_i L^(i)."""
        if i != len(self.suffixes) + 1:
            raise ValueError(f"stages must be encoded in order; expected {len(self.suffixes) + 1}")
        f = self.field
        self.suffixes.append(rs_make_suffix(f, self.w_vec, self.secret, i))
        k_mat = f.sample(rng, (c_i, self.params.b))
        x_i = f.matmul(k_mat, self.msg.x0)
        staircase = assemble_staircase(self.params, self.suffixes)
        g_mat = f.sample(rng, (cbar_i, i * self.params.sigma))
        a_i = f.matmul(g_mat, staircase)
        return x_i, a_i


class _OnlineBasis:
    """Incremental independence test over field vectors (row echelon)."""

    def __init__(self, field: Field):
        self.field = field
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def add(self, v: np.ndarray) -> bool:
        f = self.field
        v = np.asarray(v).astype(np.int64, copy=True)
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                v = f.sub(v, f.mul(v[p], row))
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        p = int(nz[0])
        self.rows.append(f.mul(v, f.inv(v[p])))
        self.pivots.append(p)
        return True


@dataclass
class KeyEquation:
    """Assembled decode system B v = rhs plus the bookkeeping needed to
    solve it and to reassemble the message from a solution."""

    b_mat: np.ndarray
    rhs: np.ndarray
    stage: int
    r: int
    r_bar: int
    beta: int
    gamma: int
    x_col_order: list[int]       # W columns: basis columns first, then the rest
    l_col_order: list[int]       # staircase columns (non-identity region)
    kept_mask: np.ndarray        # which (column, row) slots are real suffix symbols
    l_kept_idx: np.ndarray       # their indices into (l_1 .. l_i)
    t_hat: np.ndarray
    t_bar_hat: np.ndarray
    f_z: np.ndarray
    f_x: np.ndarray
    f_e: np.ndarray
    f_a: np.ndarray
    yp: np.ndarray
    jp: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return self.b_mat.shape[1]


class RsSinkState:
    """Accumulated long/short observations of one session and the decoder."""

    def __init__(self, field: Field, params: RsParams, secret: SharedSecret):
        params.check_field(field)
        self.field = field
        self.params = params
        self.secret = secret
        self.stage = 0
        self._y_blocks: list[np.ndarray] = []
        self._j_blocks: list[np.ndarray] = []

    def ingest(self, y_i: np.ndarray, j_i: np.ndarray) -> None:
        p = self.params
        i = self.stage + 1
        if y_i.shape[1] != p.n + p.b:
            raise ValueError(f"long packet width {y_i.shape[1]} != n+b = {p.n + p.b}")
        if j_i.shape[1] != i * (p.m + p.sigma):
            raise ValueError(
                f"short packet width {j_i.shape[1]} != i*(m+sigma) = {i * (p.m + p.sigma)}"
            )
        self._y_blocks.append(np.asarray(y_i))
        self._j_blocks.append(np.asarray(j_i))
        self.stage = i

    def stacked_long(self) -> np.ndarray:
        return np.vstack(self._y_blocks)

    def stacked_short(self) -> np.ndarray:
        """Short observations re-padded with the dummy zeros of the current
        stage, exactly as the staircase rows are."""
        p = self.params
        i = self.stage
        parts = []
        for k, jk in enumerate(self._j_blocks, start=1):
            rows = jk.shape[0]
            parts.append(np.hstack([
                jk[:, : k * p.m],
                linalg.zeros(rows, (i - k) * p.m),
                jk[:, k * p.m:],
                linalg.zeros(rows, (i - k) * p.sigma),
            ]))
        return np.vstack(parts)

    # -- decoding -------------------------------------------------------
    def _extract_side(self, mat: np.ndarray, ident_cols: int, scan_limit: int,
                      scan_order=None):
        """Select independent rows, take the trailing ident_cols as the
        forced basis part, greedily complete the basis from the leading
        columns, and express the remaining columns in that basis.

        Returns None when the rows cannot support the forced basis yet."""
        f = self.field
        rows = linalg.independent_row_indices(f, mat)
        r = len(rows)
        if r < ident_cols:
            return None
        sel_rows = mat[rows]
        forced = sel_rows[:, scan_limit:]
        basis = _OnlineBasis(f)
        if not all(basis.add(forced[:, j]) for j in range(ident_cols)):
            return None  # trailing identity image degenerate this stage
        order = range(scan_limit) if scan_order is None else scan_order
        chosen: list[int] = []
        for c in order:
            if len(chosen) == r - ident_cols:
                break
            if basis.add(sel_rows[:, c]):
                chosen.append(c)
        if len(chosen) < r - ident_cols:
            raise AssertionError("column rank bookkeeping broken")
        rest = [c for c in range(scan_limit) if c not in set(chosen)]
        basis_mat = np.hstack([sel_rows[:, chosen], forced])
        inv = linalg.rref_with_transform(f, basis_mat).transform
        coef = f.matmul(inv, sel_rows[:, rest])
        return sel_rows, r, chosen, rest, coef

    def build_key_equation(self, scan_order_long=None, scan_order_short=None
                           ) -> KeyEquation | None:
        """Assemble B and the right-hand side; None while the observations
        cannot support the required identity-column bases."""
        f = self.field
        p = self.params
        i = self.stage
        if i == 0:
            return None
        long_side = self._extract_side(self.stacked_long(), p.b, p.n, scan_order_long)
        if long_side is None:
            return None
        yp, r, sel_y, rest_y, coef_y = long_side
        short_side = self._extract_side(self.stacked_short(), i * p.sigma, i * p.m,
                                        scan_order_short)
        if short_side is None:
            return None
        jp, r_bar, sel_j, rest_j, coef_j = short_side

        b, n, m, sigma = p.b, p.n, p.m, p.sigma
        isig = i * sigma
        beta = n + b - r
        gamma = i * (m + sigma) - r_bar
        t_hat = yp[:, n:]
        t_bar_hat = jp[:, i * m:]
        f_z, f_x = coef_y[: r - b], coef_y[r - b:]
        f_e, f_a = coef_j[: r_bar - isig], coef_j[r_bar - isig:]

        # top block: for each remaining long column, its basis expansion
        # cross-multiplied by t_hat
        left = f.neg(f.mul(f_z.T[:, None, :, None], t_hat[None, :, None, :]))
        b_top = np.hstack([
            left.reshape(beta * r, (r - b) * b),
            np.kron(linalg.eye(beta), t_hat),
        ])

        # middle block, then dummy-slot columns deleted
        left = f.neg(f.mul(f_e.T[:, None, :, None], t_bar_hat[None, :, None, :]))
        b_mid = np.hstack([
            left.reshape(gamma * r_bar, (r_bar - isig) * isig),
            np.kron(linalg.eye(gamma), t_bar_hat),
        ])
        lmap = l_entry_map(i, m, sigma)
        l_col_order = list(sel_j) + list(rest_j)
        slot_idx = np.concatenate([lmap[c] for c in l_col_order]) if l_col_order else \
            np.empty(0, dtype=np.int64)
        kept_mask = slot_idx >= 0
        l_kept_idx = slot_idx[kept_mask]
        b_mid = b_mid[:, kept_mask]

        # bottom block: parity staircase with columns following the basis
        # permutations and the kept suffix slots
        x_col_order = list(sel_y) + list(rest_y)
        stacked_d = self.secret.stacked_parity(i)
        xperm = np.concatenate([np.arange(c * b, (c + 1) * b) for c in x_col_order])
        alpha_tot = p.alpha_total(i)
        b_bot_l = linalg.zeros(alpha_tot, alpha_tot)
        b_bot_l[l_kept_idx, np.arange(alpha_tot)] = 1
        b_bot = np.hstack([stacked_d[:, xperm], b_bot_l])

        nb = n * b
        b_mat = np.vstack([
            np.hstack([b_top, linalg.zeros(beta * r, alpha_tot)]),
            np.hstack([linalg.zeros(gamma * r_bar, nb), b_mid]),
            b_bot,
        ])
        rhs = np.concatenate([
            linalg.vectorize(f.matmul(t_hat, f_x)),
            linalg.vectorize(f.matmul(t_bar_hat, f_a)),
            self.secret.stacked_targets(i),
        ])
        return KeyEquation(
            b_mat=b_mat, rhs=rhs, stage=i, r=r, r_bar=r_bar, beta=beta, gamma=gamma,
            x_col_order=x_col_order, l_col_order=l_col_order,
            kept_mask=kept_mask, l_kept_idx=l_kept_idx,
            t_hat=t_hat, t_bar_hat=t_bar_hat,
            f_z=f_z, f_x=f_x, f_e=f_e, f_a=f_a, yp=yp, jp=jp,
        )

    def try_decode(self, ke: KeyEquation | None = None) -> DecodeResult:
        """Solve the key equation, exploiting that the top and middle
        blocks pin the non-basis unknowns as affine functions of the basis
        ones; the reduced core plus dummy-slot constraints is solved
        exactly, and the full equation is re-verified on success."""
        f = self.field
        p = self.params
        if ke is None:
            ke = self.build_key_equation()
        if ke is None:
            return DecodeResult(Decode.NEED_MORE)
        b, n, sigma = p.b, p.n, p.sigma
        i = ke.stage
        isig = i * sigma
        r, r_bar, beta, gamma = ke.r, ke.r_bar, ke.beta, ke.gamma
        nb = n * b
        alpha_tot = p.alpha_total(i)
        theta_a = b * (r - b)

        n_basis_slots = (r_bar - isig) * isig
        kept_a = ke.kept_mask[:n_basis_slots]
        kept_b = ke.kept_mask[n_basis_slots:]
        la_cnt = int(kept_a.sum())

        b_bot = ke.b_mat[beta * r + gamma * r_bar:]
        s_xa = b_bot[:, :theta_a]
        s_xb = b_bot[:, theta_a:nb]
        s_la = b_bot[:, nb: nb + la_cnt]
        s_lb = b_bot[:, nb + la_cnt:]

        m_x = np.kron(ke.f_z.T, linalg.eye(b))             # (beta*b) x theta_a
        m_l = np.kron(ke.f_e.T, linalg.eye(isig))          # (gamma*isig) x n_basis_slots
        m_l = m_l[:, kept_a]                               # dummy basis slots are zero
        vec_fx = linalg.vectorize(ke.f_x)
        vec_fa = linalg.vectorize(ke.f_a)

        core = np.vstack([
            np.hstack([f.add(s_xa, f.matmul(s_xb, m_x)),
                       f.add(s_la, f.matmul(s_lb, m_l[kept_b]))]),
            np.hstack([linalg.zeros(int((~kept_b).sum()), theta_a), m_l[~kept_b]]),
        ])
        core_rhs = np.concatenate([
            f.sub(ke.rhs[beta * r + gamma * r_bar:],
                  f.add(f.matmul(s_xb, vec_fx[:, None])[:, 0],
                        f.matmul(s_lb, vec_fa[kept_b][:, None])[:, 0])),
            f.neg(vec_fa[~kept_b]),
        ])
        out = linalg.solve_exact(f, core, core_rhs)
        if out.status is SolveStatus.NO_SOLUTION:
            return DecodeResult(Decode.NEED_MORE)
        if out.status is SolveStatus.MULTIPLE:
            return DecodeResult(Decode.FAILURE)

        x_a = out.solution[:theta_a]
        l_a = out.solution[theta_a:]
        x_b = f.add(vec_fx, f.matmul(m_x, x_a[:, None])[:, 0])
        l_b_full = f.add(vec_fa, f.matmul(m_l, l_a[:, None])[:, 0])
        v_full = np.concatenate([x_a, x_b, l_a, l_b_full[kept_b]])
        if not np.array_equal(f.matmul(ke.b_mat, v_full[:, None])[:, 0], ke.rhs):
            raise AssertionError("key equation bookkeeping inconsistent with solution")

        w_hat = linalg.zeros(b, n)
        for t, col in enumerate(ke.x_col_order):
            if t < r - b:
                w_hat[:, col] = x_a[t * b: (t + 1) * b]
            else:
                v = t - (r - b)
                w_hat[:, col] = x_b[v * b: (v + 1) * b]
        return DecodeResult(Decode.DECODED, w=w_hat)


def truth_vector(ke: KeyEquation, msg: SourceMessage,
                 suffixes: list[SuffixBlock]) -> np.ndarray:
    """Assemble the ground-truth unknown vector in the key equation's
    permuted, dummy-deleted layout (testing and validation helper)."""
    b = msg.b
    x_parts = [msg.w[:, c] for c in ke.x_col_order]
    i = ke.stage
    sigma = suffixes[0].script_l.shape[0]
    m = suffixes[0].script_l.shape[1]
    l_parts = []
    for c in ke.l_col_order:
        for k in range(1, i + 1):
            if c < k * m:
                l_parts.append(suffixes[k - 1].script_l[:, c])
    r = ke.r
    n_basis = r - b
    x_a = np.concatenate(x_parts[:n_basis]) if n_basis else np.empty(0, dtype=np.int64)
    x_b = np.concatenate(x_parts[n_basis:])
    l_all = np.concatenate(l_parts) if l_parts else np.empty(0, dtype=np.int64)
    return np.concatenate([x_a, x_b, l_all])


def rs_run_session(field: Field, params: RsParams, msg: SourceMessage,
                   secret: SharedSecret, schedule, long_channel, short_channel,
                   rng: np.random.Generator, stage_cap: int = 64,
                   validate: bool = False) -> TrialRecord:
    """Run one random-secret session.

    ``schedule`` yields (long StageParams, short StageParams) pairs; long
    and short packets traverse independent channel instances.  Rate counts
    long packets only.  With validate=True the exact channel, parity
    staircase, basis reconstruction, and ground-truth key equation
    identities are asserted each stage.
    """
    p = params
    encoder = RsEncoder(field, p, msg, secret)
    sink = RsSinkState(field, p, secret)
    trace: list[tuple[int, int]] = []
    outcome = "exhausted"
    correct = False
    stages_used = 0

    for stage, (long_p, short_p) in enumerate(schedule, start=1):
        if stage > stage_cap:
            break
        if short_p.M - short_p.z < p.sigma:
            raise ValueError(
                f"short schedule violates sigma <= M_i - z_i at stage {stage}"
            )
        x_i, a_i = encoder.encode_stage(stage, long_p.c, short_p.c, rng)
        out_long = long_channel(long_p, x_i, rng)
        out_short = short_channel(short_p, a_i, rng)
        sink.ingest(out_long.Y, out_short.Y)
        trace.append((long_p.M, out_long.injected_errors(long_p.z)))
        stages_used = stage
        if validate:
            _validate_stage(field, p, msg, encoder, sink, out_long, x_i, out_short, a_i)
        ke = sink.build_key_equation()
        if validate and ke is not None:
            _validate_key_equation(field, p, msg, encoder, sink, ke, trace)
        result = sink.try_decode(ke)
        if result.status is Decode.DECODED:
            outcome = "decoded"
            correct = bool(np.array_equal(result.w, msg.w))
            break
        if result.status is Decode.FAILURE:
            outcome = "failure"
            break

    rate = p.b / stages_used if outcome == "decoded" else 0.0
    return TrialRecord(trial=0, stages_used=stages_used, outcome=outcome,
                       correct=correct, rate=rate, stage_trace=trace)


def _validate_stage(field, params, msg, encoder, sink, out_long, x_i, out_short, a_i):
    f = field
    y = f.add(f.matmul(out_long.T, x_i), f.matmul(out_long.Q, out_long.Z))
    if not np.array_equal(out_long.Y, y):
        raise AssertionError("long channel decomposition violated")
    j = f.add(f.matmul(out_short.T, a_i), f.matmul(out_short.Q, out_short.Z))
    if not np.array_equal(out_short.Y, j):
        raise AssertionError("short channel decomposition violated")
    i = sink.stage
    lhs = f.matmul(sink.secret.stacked_parity(i), encoder.w_vec[:, None])[:, 0]
    l_all = np.concatenate([s.l_vec for s in encoder.suffixes])
    if not np.array_equal(f.add(lhs, l_all), sink.secret.stacked_targets(i)):
        raise AssertionError("parity staircase identity violated")


def _validate_key_equation(field, params, msg, encoder, sink, ke, trace):
    f = field
    p = params
    # basis reconstruction identities on both sides
    for (mat, ident, limit, sel, coef) in (
        (ke.yp, p.b, p.n, ke.x_col_order[: ke.r - p.b], np.vstack([ke.f_z, ke.f_x])),
        (ke.jp, ke.stage * p.sigma, ke.stage * p.m,
         ke.l_col_order[: ke.r_bar - ke.stage * p.sigma], np.vstack([ke.f_e, ke.f_a])),
    ):
        basis = np.hstack([mat[:, sel], mat[:, limit:]])
        rest = [c for c in range(limit) if c not in set(sel)]
        if not np.array_equal(f.matmul(basis, coef), mat[:, rest]):
            raise AssertionError("basis reconstruction identity violated")
    # ground truth satisfies the key equation once the cut set is met
    b_tot = p.b + sum(z for _, z in trace)
    m_tot = sum(m for m, _ in trace)
    if b_tot <= m_tot:
        v = truth_vector(ke, msg, encoder.suffixes)
        if not np.array_equal(f.matmul(ke.b_mat, v[:, None])[:, 0], ke.rhs):
            raise AssertionError("ground truth does not satisfy the key equation")
