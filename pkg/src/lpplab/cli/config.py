"""Experiment configuration: a single flat JSON object, strictly validated.

Unknown keys are rejected, as are known keys that the chosen experiment does
not use; a typo should never silently change what gets computed. `workers`
and `output_path` affect execution only, never results, so the config echo
embedded in records excludes them.
"""

from __future__ import annotations

import json
from enum import Enum

import pydantic
from pydantic import BaseModel, ConfigDict

from ..errors import ParseError, ValidationError

_MASK64 = (1 << 64) - 1


class Experiment(str, Enum):
    SMALL_BALL = "small_ball"
    ONE_POINT = "one_point"
    ONE_POINT_INTERVAL = "one_point_interval"
    CONSTRAINED_TAIL = "constrained_tail"
    TRANSVERSAL_TAIL = "transversal_tail"
    LIMIT_SHAPE = "limit_shape"
    TW_STAT = "tw_stat"
    BLOCK_STATS = "block_stats"
    COALESCENCE = "coalescence"
    CROSSING_COUNT = "crossing_count"
    ORACLE_CHECK = "oracle_check"


# keys every experiment accepts
_COMMON = {"experiment", "replicas", "base_seed", "workers", "output_path"}
# geometry size: one of n / n_list, accepted by everything except oracle_check
_SIZE = {"n", "n_list"}

_REQUIRED: dict[Experiment, set[str]] = {
    Experiment.SMALL_BALL: {"delta_list"},
    Experiment.ONE_POINT: {"delta_list"},
    Experiment.ONE_POINT_INTERVAL: {"psi_lo", "psi_hi"},
    Experiment.CONSTRAINED_TAIL: {"delta_list", "c_const"},
    Experiment.TRANSVERSAL_TAIL: {"x_list"},
    Experiment.LIMIT_SHAPE: {"gamma"},
    Experiment.TW_STAT: {"gamma"},
    Experiment.BLOCK_STATS: {"delta_list", "A"},
    Experiment.COALESCENCE: {"m_const"},
    Experiment.CROSSING_COUNT: {"delta_list"},
    Experiment.ORACLE_CHECK: set(),
}

# optional keys beyond required + common + size
_OPTIONAL: dict[Experiment, set[str]] = {
    Experiment.ONE_POINT: {"t"},
    Experiment.ONE_POINT_INTERVAL: {"t"},
    Experiment.COALESCENCE: {"t"},
    Experiment.CROSSING_COUNT: {"t"},
}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: Experiment
    replicas: int
    base_seed: int = 0
    workers: int | None = None
    output_path: str | None = None
    n: int | None = None
    n_list: list[int] | None = None
    t: int | None = None
    delta_list: list[float] | None = None
    gamma: float | None = None
    A: float | None = None
    c_const: float | None = None
    m_const: float | None = None
    x_list: list[float] | None = None
    psi_lo: int | None = None
    psi_hi: int | None = None

    def sizes(self) -> list[int]:
        if self.n_list is not None:
            return list(self.n_list)
        return [self.n] if self.n is not None else []

    def t_for(self, n: int) -> int:
        """Observation line for size n; defaults to the midpoint phi = n."""
        return self.t if self.t is not None else n

    def echo(self) -> dict:
        """The config as it identifies results: execution-only keys dropped."""
        return self.model_dump(
            mode="json", exclude_none=True, exclude={"workers", "output_path"}
        )


def _fail(key: str, constraint: str) -> None:
    raise ValidationError(f"config key {key!r}: {constraint}")


def _check_ranges(cfg: ExperimentConfig) -> None:
    if cfg.replicas < 1:
        _fail("replicas", "must be >= 1")
    if not (0 <= cfg.base_seed <= _MASK64):
        _fail("base_seed", "must fit in 64 unsigned bits")
    if cfg.workers is not None and cfg.workers < 1:
        _fail("workers", "must be >= 1")
    if cfg.n is not None and cfg.n < 1:
        _fail("n", "must be >= 1")
    if cfg.n_list is not None and (not cfg.n_list or any(n < 1 for n in cfg.n_list)):
        _fail("n_list", "must be a nonempty list of integers >= 1")
    if cfg.delta_list is not None and (
        not cfg.delta_list or any(d <= 0 for d in cfg.delta_list)
    ):
        _fail("delta_list", "must be a nonempty list of reals > 0")
    if cfg.x_list is not None and (not cfg.x_list or any(x < 0 for x in cfg.x_list)):
        _fail("x_list", "must be a nonempty list of reals >= 0")
    if cfg.gamma is not None and cfg.gamma <= 0:
        _fail("gamma", "must be > 0")
    if cfg.A is not None and cfg.A <= 0:
        _fail("A", "must be > 0")
    if cfg.c_const is not None and cfg.c_const < 0:
        _fail("c_const", "must be >= 0")
    if cfg.m_const is not None and cfg.m_const < 0:
        _fail("m_const", "must be >= 0")
    if cfg.t is not None:
        if cfg.t < 0:
            _fail("t", "must be >= 0")
        for n in cfg.sizes():
            if cfg.t > 2 * n:
                _fail("t", f"must be <= 2n = {2 * n} for n = {n}")
    if cfg.psi_lo is not None and cfg.psi_hi is not None and cfg.psi_hi - cfg.psi_lo < 2:
        _fail("psi_hi", "interval [psi_lo, psi_hi] must have length >= 2")


def validate_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    try:
        cfg = ExperimentConfig(**data)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "config"
        raise ValidationError(f"config key {loc!r}: {first['msg']}") from e

    allowed = _COMMON | _REQUIRED[cfg.experiment] | _OPTIONAL.get(cfg.experiment, set())
    if cfg.experiment is not Experiment.ORACLE_CHECK:
        allowed |= _SIZE
    given = set(data.keys())
    for key in sorted(given - allowed):
        _fail(key, f"not used by experiment {cfg.experiment.value!r}")
    for key in sorted(_REQUIRED[cfg.experiment] - given):
        _fail(key, f"required by experiment {cfg.experiment.value!r}")

    if cfg.experiment is not Experiment.ORACLE_CHECK:
        if cfg.n is not None and cfg.n_list is not None:
            _fail("n_list", "give n or n_list, not both")
        if cfg.n is None and cfg.n_list is None:
            _fail("n", f"required by experiment {cfg.experiment.value!r}")
    _check_ranges(cfg)
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"config is not valid JSON: {e}") from e
    return validate_config(data)
