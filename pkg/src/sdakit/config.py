"""Run configuration: flat key-value files plus 1:1 command-line overrides.

A config file holds `key = value` lines ('#' starts a comment). Every key
has a same-named CLI flag (dashes and underscores are interchangeable);
flags given on the command line win over the file. List-valued keys (beta,
seed, iters_sweep) take comma or whitespace separated values in the file
and repeatable flags on the command line.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .evaluation import DEFAULT_BETA_GRID, DEFAULT_ITERATION_SWEEP, DEFAULT_SEEDS
from .sda import ALGORITHMS

GRAPH_KINDS = ("knn", "threshold", "precomputed")


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or inconsistent."""


@dataclass
class RunConfig:
    """Everything a run needs; validated before any work starts."""

    data: str | None = None
    labels: str | None = None
    graph: str = "knn"
    k: int = 5
    theta: float = 0.4
    graph_file: str | None = None
    algorithm: str = "fsda"
    alpha: float = 0.5
    beta: tuple[float, ...] = DEFAULT_BETA_GRID
    tol: float = 1e-8
    iters_spectral: int = 1000
    iters_regression: int = 1000
    seed: tuple[int, ...] = DEFAULT_SEEDS
    threads: int = 0  # 0 means all available cores
    output: str = "sdakit-out"
    text_ratings: bool = False
    iters_sweep: tuple[int, ...] = DEFAULT_ITERATION_SWEEP

    def validate(self, *, need_data=True, need_labels=False) -> None:
        if need_data and not self.data:
            raise ConfigError("field 'data' is required (path to the sparse data matrix)")
        if need_labels and not self.labels:
            raise ConfigError("field 'labels' is required (path to the label file)")
        if self.graph not in GRAPH_KINDS:
            raise ConfigError(f"field 'graph' must be one of {GRAPH_KINDS}, got {self.graph!r}")
        if self.graph == "precomputed" and not self.graph_file:
            raise ConfigError("field 'graph_file' is required when graph = precomputed")
        if self.k < 1:
            raise ConfigError(f"field 'k' must be a positive neighbor count, got {self.k}")
        if not 0.0 < self.theta <= 1.0:
            raise ConfigError(f"field 'theta' must lie in (0, 1], got {self.theta}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"field 'algorithm' must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"field 'alpha' must lie in [0, 1], got {self.alpha}")
        if self.algorithm == "sa-sda" and self.alpha == 0.0:
            raise ConfigError(
                "field 'alpha': sa-sda requires alpha != 0 (the graph term is "
                "what propagates ratings to unlabeled samples)"
            )
        if self.algorithm == "lda" and self.alpha != 0.0:
            raise ConfigError(
                f"field 'alpha': algorithm 'lda' is fsda at alpha = 0, got alpha = {self.alpha}"
            )
        if len(self.beta) == 0:
            raise ConfigError("field 'beta' must list at least one shift")
        b = sorted(self.beta)
        if b[0] < 0:
            raise ConfigError("field 'beta' values must be non-negative")
        if len(set(b)) != len(b):
            raise ConfigError("field 'beta' values must be distinct")
        if self.tol <= 0:
            raise ConfigError(f"field 'tol' must be positive, got {self.tol}")
        if self.iters_spectral < 1 or self.iters_regression < 1:
            raise ConfigError("fields 'iters_spectral' and 'iters_regression' must be >= 1")
        if len(self.seed) == 0:
            raise ConfigError("field 'seed' must list at least one seed")
        if self.threads < 0:
            raise ConfigError(f"field 'threads' must be >= 0, got {self.threads}")
        if any(i < 1 for i in self.iters_sweep):
            raise ConfigError("field 'iters_sweep' values must be >= 1")

    @property
    def n_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    @property
    def beta_grid(self) -> tuple[float, ...]:
        return tuple(sorted(self.beta))


_LIST_FIELDS = {"beta": float, "seed": int, "iters_sweep": int}
_SCALAR_PARSERS = {
    "data": str, "labels": str, "graph": str, "k": int, "theta": float,
    "graph_file": str, "algorithm": str, "alpha": float, "tol": float,
    "iters_spectral": int, "iters_regression": int, "threads": int,
    "output": str, "text_ratings": None,  # bool handled specially
}


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"field {key!r} expects a boolean, got {raw!r}")


def parse_config_file(path) -> dict:
    """Read `key = value` lines into typed values."""
    known = {f.name for f in fields(RunConfig)}
    out: dict = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, raw = line.partition("=")
            else:
                key, _, raw = line.partition(" ")
            key = key.strip().replace("-", "_")
            raw = raw.strip()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                if key in _LIST_FIELDS:
                    cast = _LIST_FIELDS[key]
                    out[key] = tuple(cast(tok) for tok in raw.replace(",", " ").split())
                elif key == "text_ratings":
                    out[key] = _parse_bool(key, raw)
                else:
                    out[key] = _SCALAR_PARSERS[key](raw)
            except ConfigError:
                raise
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {raw!r}") from e
    return out


def build_config(config_path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the config file, then explicit CLI overrides."""
    values: dict = {}
    if config_path:
        values.update(parse_config_file(config_path))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        key = key.replace("-", "_")
        if key in _LIST_FIELDS:
            val = tuple(_LIST_FIELDS[key](v) for v in val)
        values[key] = val
    try:
        return RunConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from e
