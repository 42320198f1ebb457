"""Secret-channel scheme: rateless encoder and accumulating decoder.

Per stage the source sends fresh random combinations of the message block
(with an appended identity) over the network, and hands the sink a small
hash over a reliable side conduit: a batch of fresh random evaluation
points plus the message evaluated at them (a Vandermonde product).  The
sink stacks everything received so far and tries to express the message as
a combination of its observations that is consistent with every hash; it
decodes once that combination pins down a single candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .field import Field
from .linalg import IncrementalReducer, SolveStatus
from .records import Decode, DecodeResult, TrialRecord


@dataclass
class SourceMessage:
    """Message block W (b x n) and its on-the-wire form (W | I_b)."""

    w: np.ndarray
    x0: np.ndarray

    @classmethod
    def from_w(cls, w: np.ndarray) -> "SourceMessage":
        b = w.shape[0]
        return cls(w=w, x0=np.hstack([w, linalg.eye(b)]))

    @classmethod
    def random(cls, field: Field, b: int, n: int, rng: np.random.Generator) -> "SourceMessage":
        if b < 1 or n < 1:
            raise ValueError("message shape must satisfy b >= 1 and n >= 1")
        if n + b >= field.q:
            raise ValueError(f"packet length n+b={n+b} must be below the field order {field.q}")
        return cls.from_w(field.sample(rng, (b, n)))

    @property
    def b(self) -> int:
        return self.w.shape[0]

    @property
    def n(self) -> int:
        return self.w.shape[1]


@dataclass
class SecretStagePayload:
    """One stage's side-channel content: evaluation points and the hash
    columns H = X0 @ vandermonde(points)."""

    points: np.ndarray
    hashes: np.ndarray

    @property
    def size_symbols(self) -> int:
        """Secret symbols consumed: points plus one hash column per point."""
        return self.points.size * (1 + self.hashes.shape[0])


def sc_encode_stage(field: Field, msg: SourceMessage, stage: int, c_i: int,
                    rng: np.random.Generator,
                    extra_point_every_stage: bool = False
                    ) -> tuple[np.ndarray, SecretStagePayload]:
    """Encode stage >= 1: X_i = K_i @ X0 with K_i uniform c_i x b, plus the
    stage hash.  Stage 1 carries one extra evaluation point."""
    if stage < 1 or c_i < 1:
        raise ValueError("stage and c_i must be >= 1")
    b = msg.b
    k = field.sample(rng, (c_i, b))
    x_i = field.matmul(k, msg.x0)
    n_points = b * c_i + (1 if (stage == 1 or extra_point_every_stage) else 0)
    points = field.sample(rng, n_points)
    d = linalg.vandermonde(field, points, msg.n + b)
    hashes = field.matmul(msg.x0, d)
    return x_i, SecretStagePayload(points=points, hashes=hashes)


class SinkStateSC:
    """Accumulated observations and hashes, with a rolling reduction of the
    growing decode system.

    The decode system is S (Y D) = H for the combination matrix S; its
    coefficient matrix (Y D)^T grows by a bordered block per stage, so the
    incremental reducer carries the reduction (and the reduced H) across
    stages.  A batch mode (incremental=False) is kept for cross-checking.
    """

    def __init__(self, field: Field, b: int, n: int, incremental: bool = True):
        self.field = field
        self.b = b
        self.n = n
        self.incremental = incremental
        self.stage = 0
        self.y = linalg.zeros(0, n + b)
        self.d = linalg.zeros(n + b, 0)
        self.h = linalg.zeros(b, 0)
        self._reducer: IncrementalReducer | None = None

    def ingest(self, y_i: np.ndarray, secret: SecretStagePayload) -> None:
        f = self.field
        width = self.n + self.b
        if y_i.shape[1] != width:
            raise ValueError(f"observation width {y_i.shape[1]} != n+b = {width}")
        if secret.hashes.shape != (self.b, secret.points.size):
            raise ValueError("hash block does not match its evaluation points")
        d_i = linalg.vandermonde(f, secret.points, width)
        if self.incremental:
            if self._reducer is None:
                g = f.matmul(y_i, d_i)
                self._reducer = IncrementalReducer(f, g.T, rhs=secret.hashes.T)
            else:
                col_block = f.matmul(y_i, self.d).T          # old hashes, new rows
                row_block = f.matmul(self.y, d_i).T          # new hashes, old rows
                corner = f.matmul(y_i, d_i).T
                self._reducer.update(col_block, row_block, corner,
                                     rhs_rows=secret.hashes.T)
        self.y = np.vstack([self.y, y_i])
        self.d = np.hstack([self.d, d_i])
        self.h = np.hstack([self.h, secret.hashes])
        self.stage += 1

    def try_decode(self) -> DecodeResult:
        f = self.field
        if self.stage == 0:
            return DecodeResult(Decode.NEED_MORE)
        rank_y = linalg.rank(f, self.y)
        if rank_y < self.b:
            return DecodeResult(Decode.NEED_MORE)

        if self.incremental:
            red = self._reducer
            rhs = red.reduced_rhs
            if np.any(rhs[red.rank:]):
                return DecodeResult(Decode.NEED_MORE)
            if red.rank < rank_y:
                return DecodeResult(Decode.FAILURE)
            xs_t = linalg.zeros(self.y.shape[0], self.b)
            xs_t[red.pivot_cols] = rhs[:red.rank]
            xs = xs_t.T
        else:
            out = linalg.solve_in_row_space(f, self.y, self.d, self.h)
            if out.status is SolveStatus.NO_SOLUTION:
                return DecodeResult(Decode.NEED_MORE)
            if out.status is SolveStatus.MULTIPLE:
                return DecodeResult(Decode.FAILURE)
            xs = out.solution

        x0_hat = f.matmul(xs, self.y)
        if not np.array_equal(x0_hat[:, self.n:], linalg.eye(self.b)):
            return DecodeResult(Decode.FAILURE)
        return DecodeResult(Decode.DECODED, w=x0_hat[:, : self.n])


def sc_run_session(field: Field, msg: SourceMessage, schedule, channel,
                   rng: np.random.Generator, stage_cap: int = 64,
                   incremental: bool = True, validate: bool = False,
                   extra_point_every_stage: bool = False) -> TrialRecord:
    """Run one session: encode, transmit, ingest and attempt decode per
    stage until decoded, failed, or the stage cap is hit.

    ``schedule`` yields StageParams; ``channel`` maps (params, X, rng) to a
    StageOutcome.  With validate=True the exact channel decomposition and
    hash identity are asserted every stage.
    """
    sink = SinkStateSC(field, msg.b, msg.n, incremental=incremental)
    trace: list[tuple[int, int]] = []
    outcome = "exhausted"
    correct = False
    stages_used = 0

    for stage, params in enumerate(schedule, start=1):
        if stage > stage_cap:
            break
        x_i, secret = sc_encode_stage(field, msg, stage, params.c, rng,
                                      extra_point_every_stage=extra_point_every_stage)
        out = channel(params, x_i, rng)
        if validate:
            recombined = field.add(field.matmul(out.T, x_i), field.matmul(out.Q, out.Z))
            if not np.array_equal(out.Y, recombined):
                raise AssertionError("channel decomposition Y = T X + Q Z violated")
            d_i = linalg.vandermonde(field, secret.points, msg.n + msg.b)
            if not np.array_equal(field.matmul(msg.x0, d_i), secret.hashes):
                raise AssertionError("hash identity H = X0 D violated")
        sink.ingest(out.Y, secret)
        trace.append((params.M, out.injected_errors(params.z)))
        stages_used = stage
        result = sink.try_decode()
        if result.status is Decode.DECODED:
            outcome = "decoded"
            correct = bool(np.array_equal(result.w, msg.w))
            break
        if result.status is Decode.FAILURE:
            outcome = "failure"
            break

    rate = msg.b / stages_used if outcome == "decoded" else 0.0
    return TrialRecord(trial=0, stages_used=stages_used, outcome=outcome,
                       correct=correct, rate=rate, stage_trace=trace)
