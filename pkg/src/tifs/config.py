"""YAML run configuration and system builders for the command line.

A configuration file is a YAML mapping. Unknown keys are errors at every
level. Example::

    system:
      name: counterexample        # cantor | counterexample | non_autonomous | explicit
      k_cap: 40
    t_grid: [0.5, 0.8, 0.9]
    n: 200
    tol: 1.0e-3
    out: pressure.csv

Systems:

``cantor``
    no further keys.
``counterexample``
    ``k_cap`` (int), ``t_k`` (list of t_1, t_2, ...), ``n_k`` (list of
    n_1, n_2, ...; requires ``t_k``). Without lists the default sequences
    ``t_k = k/(k+1)``, ``n_k = k(k+1)`` are used.
``non_autonomous``
    ``levels``: list of levels, each a list of maps; ``cycle`` (bool);
    ``box``.
``explicit``
    ``max_depth`` (int), ``nodes``: mapping from dot-separated parent path
    (``""`` for the root) to a list of maps with a ``label`` key; ``box``.

A map is ``{ratio, offset, flip}`` in 1D or ``{ratio, offset: [x, y],
quarter_turns, reflect}`` in 2D. A box is ``{lower: [...], upper: [...]}``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any

import yaml

from .errors import DomainError
from .maps import Box, SimilarityMap, TifsSpec, unit_interval
from .systems import CounterexampleParams, cantor_tifs, counterexample_tifs, non_autonomous_tifs
from .tree import ExplicitTree, parse_path

BUILTIN_SYSTEMS = ("cantor", "counterexample", "non_autonomous", "explicit")


class ConfigError(DomainError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    system: dict[str, Any] | None = None
    t: float | None = None
    t_grid: list[float] | None = None
    n: int | None = None
    n_schedule: list[int] | None = None
    tol: float = 1e-3
    threshold: float = 1.0
    out: str | None = None
    cap: int | None = None
    scales: list[float] | None = None
    kind: str = "cover"
    anchor: list[float] | None = None
    beta_star_hi: float = 0.651
    beta_lo: float = 0.95

    def validate(self) -> "RunConfig":
        if isinstance(self.system, str):
            self.system = {"name": self.system}
        if self.system is None:
            pass
        elif not isinstance(self.system, dict) or "name" not in self.system:
            raise ConfigError("system must be a mapping with a 'name' key")
        elif self.system["name"] not in BUILTIN_SYSTEMS:
            raise ConfigError(f"unknown system {self.system['name']!r}; choose from {BUILTIN_SYSTEMS}")
        ts = ([self.t] if self.t is not None else []) + list(self.t_grid or [])
        if any(not isinstance(t, (int, float)) or t < 0 for t in ts):
            raise ConfigError("t values must be numbers >= 0")
        if self.n is not None and (not isinstance(self.n, int) or self.n < 1):
            raise ConfigError("n must be a positive integer")
        if self.n_schedule is not None:
            sched = self.n_schedule
            if not sched or any(not isinstance(v, int) or v < 1 for v in sched) or \
                    any(b <= a for a, b in zip(sched, sched[1:])):
                raise ConfigError("n_schedule must be strictly increasing positive integers")
        if not self.tol > 0:
            raise ConfigError("tol must be > 0")
        if not self.threshold > 0:
            raise ConfigError("threshold must be > 0")
        if self.cap is not None and (not isinstance(self.cap, int) or self.cap < 1):
            raise ConfigError("cap must be a positive integer")
        if self.kind not in ("cover", "cloud"):
            raise ConfigError("kind must be 'cover' or 'cloud'")
        return self


def load_config(path: str | None) -> RunConfig:
    """Read a YAML configuration file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path!r}: {exc}") from None
    return config_from_mapping(raw or {})


def config_from_mapping(raw: Any) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("the configuration must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    return RunConfig(**raw).validate()


def _expect_keys(where: str, mapping: dict, allowed: set[str], required: set[str] = frozenset()) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = set(required) - set(mapping)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _box(raw: Any) -> Box:
    _expect_keys("box", raw, {"lower", "upper"}, {"lower", "upper"})
    return Box(tuple(raw["lower"]), tuple(raw["upper"]))


def _map(raw: Any, dim: int, extra: set[str] = frozenset()) -> SimilarityMap:
    if dim == 1:
        _expect_keys("map", raw, {"ratio", "offset", "flip"} | extra, {"ratio", "offset"})
        offset = raw["offset"]
        if isinstance(offset, list):
            (offset,) = offset
        return SimilarityMap.line(float(raw["ratio"]), float(offset), bool(raw.get("flip", False)))
    _expect_keys("map", raw, {"ratio", "offset", "quarter_turns", "reflect"} | extra, {"ratio", "offset"})
    return SimilarityMap.plane(float(raw["ratio"]), raw["offset"], int(raw.get("quarter_turns", 0)),
                               bool(raw.get("reflect", False)))


def build_system(system: dict[str, Any]) -> TifsSpec:
    """Construct the :class:`TifsSpec` described by a ``system`` mapping."""
    name = system.get("name")
    rest = {k: v for k, v in system.items() if k != "name"}
    try:
        if name == "cantor":
            _expect_keys("system", rest, set())
            return cantor_tifs()
        if name == "counterexample":
            _expect_keys("system", rest, {"k_cap", "t_k", "n_k"})
            if "n_k" in rest and "t_k" not in rest:
                raise ConfigError("n_k overrides need matching t_k values")
            if "t_k" in rest:
                t_values = [float(v) for v in rest["t_k"]]
                if "n_k" in rest:
                    params = CounterexampleParams.from_sequences(t_values, [int(v) for v in rest["n_k"]])
                else:
                    params = CounterexampleParams(lambda k: t_values[k - 1], None, len(t_values) - 1)
            else:
                params = CounterexampleParams(k_cap=int(rest.get("k_cap", 40)))
            return counterexample_tifs(params)
        if name == "non_autonomous":
            _expect_keys("system", rest, {"levels", "cycle", "box"}, {"levels"})
            space = _box(rest["box"]) if "box" in rest else unit_interval()
            levels = [[_map(m, space.dim) for m in level] for level in rest["levels"]]
            return non_autonomous_tifs(levels, space, bool(rest.get("cycle", False)))
        if name == "explicit":
            _expect_keys("system", rest, {"max_depth", "nodes", "box"}, {"max_depth", "nodes"})
            space = _box(rest["box"]) if "box" in rest else unit_interval()
            table = {}
            for key, entries in rest["nodes"].items():
                path = parse_path(str(key) if key is not None else "")
                table[path] = []
                for entry in entries:
                    if "label" not in entry:
                        raise ConfigError(f"map under node {key!r} has no label")
                    table[path].append((int(entry["label"]), _map(entry, space.dim, {"label"})))
            return TifsSpec(ExplicitTree(table, int(rest["max_depth"])), space, name="explicit")
    except ConfigError:
        raise
    except (DomainError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid {name} system: {exc}") from None
    raise ConfigError(f"unknown system {name!r}")
