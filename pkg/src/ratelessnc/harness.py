"""Experiment driver: config handling, Monte Carlo runs, CSV/JSON output.

Configs are YAML (key-value with nested sections); every stage-parameter
rule is enforced at load time with an error naming the violated rule.
Trials are deterministic: trial t draws from generators seeded with
(seed, t), so identical configs produce byte-identical trials.csv, and
each trial owns its session state outright, so trials could be fanned out
to workers without changing results as long as records are re-ordered by
trial id.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import yaml

from .channel import AdversaryStrategy, Hypergraph, HypergraphChannel, MatrixChannel, StageParams
from .field import Field, get_field
from .records import TrialRecord
from .scheme_rs import RsParams, SharedSecret, rs_run_session
from .scheme_sc import SourceMessage, sc_run_session

_SECRET_STREAM = 0x5EC


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the broken rule."""


# ---------------------------------------------------------------------------
# stage models
# ---------------------------------------------------------------------------

@dataclass
class FixedStageModel:
    """A finite schedule of stage parameters, cycled if the session runs
    past its end."""

    schedule: list[StageParams]
    cbar: int

    def iterate(self, rng: np.random.Generator):
        return itertools.cycle(self.schedule)

    @property
    def mean_m(self) -> float:
        return sum(p.M for p in self.schedule) / len(self.schedule)

    @property
    def mean_z(self) -> float:
        return sum(p.z for p in self.schedule) / len(self.schedule)


@dataclass
class IidStageModel:
    """Stage parameters drawn i.i.d. from discrete distributions; c either
    mirrors M or is its own distribution."""

    m_values: list[int]
    m_probs: list[float]
    z_values: list[int]
    z_probs: list[float]
    c_values: list[int] | None  # None: c = M
    c_probs: list[float] | None
    cbar: int

    def iterate(self, rng: np.random.Generator):
        while True:
            m = int(rng.choice(self.m_values, p=self.m_probs))
            z = int(rng.choice(self.z_values, p=self.z_probs))
            c = m if self.c_values is None else int(rng.choice(self.c_values, p=self.c_probs))
            yield StageParams(M=m, z=z, c=c)

    @property
    def mean_m(self) -> float:
        return float(np.dot(self.m_values, self.m_probs))

    @property
    def mean_z(self) -> float:
        return float(np.dot(self.z_values, self.z_probs))


def _parse_dist(node, name: str) -> tuple[list[int], list[float]]:
    if isinstance(node, int):
        return [node], [1.0]
    if not isinstance(node, dict) or "values" not in node:
        raise ConfigError(f"{name}: expected an integer or {{values: [...], probs: [...]}}")
    values = [int(v) for v in node["values"]]
    probs = node.get("probs")
    if probs is None:
        probs = [1.0 / len(values)] * len(values)
    probs = [float(p) for p in probs]
    if len(probs) != len(values):
        raise ConfigError(f"{name}: probs length != values length")
    if abs(sum(probs) - 1.0) > 1e-9 or min(probs) < 0:
        raise ConfigError(f"{name}: probs must be nonnegative and sum to 1")
    return values, probs


def _parse_stage_model(node, label: str):
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError(f"{label}: expected a mapping with a 'kind' key")
    kind = node["kind"]
    if kind == "fixed":
        raw = node.get("schedule")
        if not raw:
            raise ConfigError(f"{label}: fixed stage model needs a non-empty 'schedule'")
        schedule = []
        for entry in raw:
            m = int(entry["M"])
            z = int(entry.get("z", 0))
            c = int(entry.get("c", m))
            try:
                schedule.append(StageParams(M=m, z=z, c=c))
            except ValueError as exc:
                raise ConfigError(f"{label}: {exc}") from exc
        cbar = int(node.get("cbar", max(p.c for p in schedule)))
        if any(p.c > cbar for p in schedule):
            raise ConfigError(f"{label}: some c_i exceeds cbar={cbar} (violates c_i <= cbar)")
        return FixedStageModel(schedule=schedule, cbar=cbar)
    if kind == "iid":
        m_vals, m_probs = _parse_dist(node.get("M"), f"{label}.M")
        z_vals, z_probs = _parse_dist(node.get("z", 0), f"{label}.z")
        if max(z_vals) >= min(m_vals):
            raise ConfigError(
                f"{label}: i.i.d. supports allow z >= M (violates z_i < M_i); "
                f"max z = {max(z_vals)}, min M = {min(m_vals)}"
            )
        c_node = node.get("c", "M")
        if c_node == "M":
            c_vals = c_probs = None
            c_max = max(m_vals)
        else:
            c_vals, c_probs = _parse_dist(c_node, f"{label}.c")
            if min(c_vals) < max(m_vals):
                raise ConfigError(f"{label}: c support allows M > c (violates M_i <= c_i)")
            c_max = max(c_vals)
        cbar = int(node.get("cbar", c_max))
        if c_max > cbar:
            raise ConfigError(f"{label}: c support exceeds cbar (violates c_i <= cbar)")
        return IidStageModel(m_values=m_vals, m_probs=m_probs, z_values=z_vals,
                             z_probs=z_probs, c_values=c_vals, c_probs=c_probs, cbar=cbar)
    raise ConfigError(f"{label}: unknown stage model kind {kind!r}")


# ---------------------------------------------------------------------------
# experiment config
# ---------------------------------------------------------------------------

_SCHEME_ALIASES = {"sc": "secret-channel", "secret-channel": "secret-channel",
                   "rs": "random-secret", "random-secret": "random-secret"}


@dataclass
class ExperimentConfig:
    scheme: str
    field_name: str
    b: int
    n: int
    trials: int
    seed: int
    stage_cap: int
    adversary: AdversaryStrategy
    stage_model: FixedStageModel | IidStageModel
    channel_mode: str = "matrix"
    topology: Hypergraph | None = None
    rs_params: RsParams | None = None
    short_stage_model: FixedStageModel | IidStageModel | None = None
    validate: bool = False
    sc_extra_point_every_stage: bool = False


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate an experiment config file; overrides (e.g. from
    CLI flags) are applied to the raw mapping before validation."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not well-formed YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    if overrides:
        raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    return build_config(raw, base_dir=Path(path).parent)


def build_config(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    scheme = _SCHEME_ALIASES.get(str(raw.get("scheme", "")))
    if scheme is None:
        raise ConfigError("scheme must be 'secret-channel' (sc) or 'random-secret' (rs)")
    field_name = str(raw.get("field", "gf2_16"))
    try:
        field = get_field(field_name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        b = int(raw["b"])
        n = int(raw["n"])
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc}") from exc
    if b < 1 or n < 1:
        raise ConfigError("b and n must be >= 1")
    if n + b >= field.q:
        raise ConfigError(f"n + b = {n + b} must be below the field order {field.q}")

    trials = int(raw.get("trials", 100))
    if trials < 0:
        raise ConfigError("trials must be >= 0")
    seed = int(raw.get("seed", 0))
    stage_cap = int(raw.get("stage_cap", 64))
    if stage_cap < 1:
        raise ConfigError("stage_cap must be >= 1")

    adv_node = raw.get("adversary", "uniform-random")
    if isinstance(adv_node, dict):
        adv_node = adv_node.get("kind", "uniform-random")
    try:
        adversary = AdversaryStrategy(kind=str(adv_node))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if "stages" not in raw:
        raise ConfigError("missing required 'stages' stage model")
    stage_model = _parse_stage_model(raw["stages"], "stages")

    channel_node = raw.get("channel", {"mode": "matrix"})
    if isinstance(channel_node, str):
        channel_node = {"mode": channel_node}
    mode = channel_node.get("mode", "matrix")
    topology = None
    if mode == "hypergraph":
        top_path = channel_node.get("topology")
        if not top_path:
            raise ConfigError("hypergraph channel mode needs a 'topology' file path")
        top_path = Path(top_path)
        if base_dir is not None and not top_path.is_absolute():
            top_path = base_dir / top_path
        try:
            topology = Hypergraph.from_file(top_path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"topology: {exc}") from exc
        if not isinstance(stage_model, FixedStageModel):
            raise ConfigError("hypergraph channel mode requires a fixed stage model")
        m_cut = topology.honest_min_cut()
        z_cut = topology.adversary_min_cut()
        slots = topology.source_slots
        for p in stage_model.schedule:
            want_z = 0 if adversary.kind == "none" else z_cut
            if (p.M, p.c) != (m_cut, slots) or (adversary.kind != "none" and p.z != z_cut):
                raise ConfigError(
                    f"stage ({p.M},{p.z},{p.c}) does not match topology min cuts "
                    f"(M={m_cut}, z={want_z}, c={slots})"
                )
    elif mode != "matrix":
        raise ConfigError(f"unknown channel mode {mode!r}")

    rs_params = None
    short_model = None
    if scheme == "random-secret":
        if "short_stages" not in raw:
            raise ConfigError("random-secret scheme requires a 'short_stages' stage model")
        short_model = _parse_stage_model(raw["short_stages"], "short_stages")
        sigma = int(raw.get("sigma", 1))
        if isinstance(short_model, FixedStageModel):
            margin = min(p.M - p.z for p in short_model.schedule)
        else:
            margin = min(short_model.m_values) - max(short_model.z_values)
        if sigma > margin:
            raise ConfigError(
                f"sigma = {sigma} violates sigma <= M_i - z_i for the short stage model "
                f"(worst margin {margin})"
            )
        m_node = raw.get("m", "auto")
        if m_node == "auto":
            m = RsParams.auto_m(b, sigma, stage_model.cbar)
        else:
            m = int(m_node)
        try:
            rs_params = RsParams(b=b, n=n, sigma=sigma, m=m, cbar=stage_model.cbar)
            rs_params.check_field(field)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    return ExperimentConfig(
        scheme=scheme, field_name=field_name, b=b, n=n, trials=trials, seed=seed,
        stage_cap=stage_cap, adversary=adversary, stage_model=stage_model,
        channel_mode=mode, topology=topology, rs_params=rs_params,
        short_stage_model=short_model, validate=bool(raw.get("validate", False)),
        sc_extra_point_every_stage=bool(raw.get("sc_extra_point_every_stage", False)),
    )


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

@dataclass
class Summary:
    trials: int
    mean_rate: float
    decode_at_cutset_frequency: float
    silent_corruption_count: int
    theoretical_rate_bound: float
    wall_clock_seconds: float
    outcome_counts: dict = dc_field(default_factory=dict)


def _make_channel(cfg: ExperimentConfig, field: Field):
    if cfg.channel_mode == "hypergraph":
        return HypergraphChannel(field, cfg.topology, cfg.adversary)
    return MatrixChannel(field, cfg.adversary)


def run_trial(cfg: ExperimentConfig, field: Field, trial: int,
              long_channel=None) -> TrialRecord:
    rng = np.random.default_rng([cfg.seed, trial])
    msg = SourceMessage.random(field, cfg.b, cfg.n, rng)
    if long_channel is None:
        long_channel = _make_channel(cfg, field)
    if cfg.scheme == "secret-channel":
        record = sc_run_session(field, msg, cfg.stage_model.iterate(rng), long_channel,
                                rng, stage_cap=cfg.stage_cap, validate=cfg.validate,
                                extra_point_every_stage=cfg.sc_extra_point_every_stage)
    else:
        secret = SharedSecret(field, cfg.rs_params,
                              np.random.default_rng([cfg.seed, trial, _SECRET_STREAM]))
        short_channel = MatrixChannel(field, cfg.adversary)
        schedule = zip(cfg.stage_model.iterate(rng), cfg.short_stage_model.iterate(rng))
        record = rs_run_session(field, cfg.rs_params, msg, secret, schedule,
                                long_channel, short_channel, rng,
                                stage_cap=cfg.stage_cap, validate=cfg.validate)
    record.trial = trial
    return record


def run_experiment(cfg: ExperimentConfig) -> tuple[list[TrialRecord], Summary]:
    t0 = time.perf_counter()
    field = get_field(cfg.field_name)
    channel = _make_channel(cfg, field)
    records = [run_trial(cfg, field, t, long_channel=channel) for t in range(cfg.trials)]

    counts: dict[str, int] = {}
    silent = 0
    at_cutset = 0
    for r in records:
        counts[r.outcome] = counts.get(r.outcome, 0) + 1
        if r.outcome == "decoded" and not r.correct:
            silent += 1
        if r.outcome == "decoded" and r.stages_used == r.cutset_stage(cfg.b):
            at_cutset += 1
    mean_rate = float(np.mean([r.rate for r in records])) if records else 0.0
    bound = (cfg.b / (cfg.b + cfg.stage_model.cbar - 1)) * (
        cfg.stage_model.mean_m - cfg.stage_model.mean_z
    )
    summary = Summary(
        trials=cfg.trials,
        mean_rate=mean_rate,
        decode_at_cutset_frequency=(at_cutset / cfg.trials) if cfg.trials else 0.0,
        silent_corruption_count=silent,
        theoretical_rate_bound=bound,
        wall_clock_seconds=time.perf_counter() - t0,
        outcome_counts=counts,
    )
    return records, summary


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def format_trial_row(r: TrialRecord) -> str:
    trace = ";".join(f"{m}:{z}" for m, z in r.stage_trace)
    return f"{r.trial},{r.stages_used},{r.outcome},{'true' if r.correct else 'false'},{r.rate},{trace}"


def emit_outputs(records: list[TrialRecord], summary: Summary, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "trials.csv"
    lines = ["trial,N,outcome,correct,rate,stage_trace"]
    lines += [format_trial_row(r) for r in records]
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary_path = out / "summary.json"
    payload = {
        "trials": summary.trials,
        "mean_rate": summary.mean_rate,
        "decode_at_cutset_frequency": summary.decode_at_cutset_frequency,
        "silent_corruption_count": summary.silent_corruption_count,
        "theoretical_rate_bound": summary.theoretical_rate_bound,
        "wall_clock_seconds": summary.wall_clock_seconds,
        "outcome_counts": summary.outcome_counts,
    }
    summary_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    return csv_path, summary_path
