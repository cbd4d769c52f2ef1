"""Scenario files: YAML description of marginals, target correlation and run size.

Example::

    name: poisson_nb_positive
    horizon: 1.0
    periods: 7
    paths: 100000
    seed: 2024
    tol: 1.0e-12
    points_per_period: 10
    marginals:
      - {type: poisson, mean: 5.0}
      - {type: negative_binomial, mean: 5.0, variance: 30.0}
    correlation:
      - [1.0, 0.7]
      - [0.7, 1.0]

Marginal types: ``poisson`` (``mean`` count at the horizon, or ``rate``),
``negative_binomial`` (``mean`` and ``variance`` at the horizon, or raw gamma
``shape`` and ``rate``) and ``mixture`` (``atoms``: list of ``[rate, weight]``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .distributions import Degenerate, FiniteDiscrete, Gamma, StructureDistribution, nb_from_mean_variance


class ScenarioError(ValueError):
    """Malformed scenario; the message names the offending field."""


_MARGINAL_KEYS = {
    "poisson": ({"mean"}, {"rate"}),
    "negative_binomial": ({"mean", "variance"}, {"shape", "rate"}),
    "mixture": ({"atoms"},),
}


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{where}: value must be finite, got {value!r}")
    return float(value)


def _integer(value, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {value!r}")
    if value < minimum:
        raise ScenarioError(f"{where}: must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class MarginalSpec:
    type: str
    params: dict

    def structure(self, horizon: float) -> StructureDistribution:
        p = self.params
        if self.type == "poisson":
            rate = p["rate"] if "rate" in p else p["mean"] / horizon
            return Degenerate(rate)
        if self.type == "negative_binomial":
            if "shape" in p:
                return Gamma(p["shape"], p["rate"])
            return nb_from_mean_variance(p["mean"], p["variance"], horizon)
        return FiniteDiscrete.from_atoms([tuple(a) for a in p["atoms"]])

    def to_dict(self) -> dict:
        return {"type": self.type, **self.params}


def _parse_marginal(raw, where: str) -> MarginalSpec:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected a mapping")
    kind = raw.get("type")
    if kind not in _MARGINAL_KEYS:
        raise ScenarioError(f"{where}.type: expected one of {sorted(_MARGINAL_KEYS)}, got {kind!r}")
    keys = set(raw) - {"type"}
    options = _MARGINAL_KEYS[kind]
    if keys not in options:
        wanted = " or ".join("{" + ", ".join(sorted(o)) + "}" for o in options)
        raise ScenarioError(f"{where}: {kind} marginal needs fields {wanted}, got {sorted(keys)}")
    if kind == "mixture":
        atoms = raw["atoms"]
        if not isinstance(atoms, list) or not atoms:
            raise ScenarioError(f"{where}.atoms: expected a non-empty list of [rate, weight]")
        parsed = []
        for i, atom in enumerate(atoms):
            if not isinstance(atom, list) or len(atom) != 2:
                raise ScenarioError(f"{where}.atoms[{i}]: expected [rate, weight]")
            parsed.append([_number(atom[0], f"{where}.atoms[{i}][0]"),
                           _number(atom[1], f"{where}.atoms[{i}][1]")])
        params = {"atoms": parsed}
    else:
        params = {k: _number(raw[k], f"{where}.{k}") for k in sorted(keys)}
    return MarginalSpec(kind, params)


@dataclass(frozen=True)
class Scenario:
    marginals: tuple[MarginalSpec, ...]
    correlation: tuple[tuple[float, ...], ...]
    horizon: float = 1.0
    periods: int = 1
    paths: int = 10_000
    seed: int = 0
    tol: float = 1e-12
    points_per_period: int = 10
    name: str = "scenario"
    out: str | None = None

    @property
    def d(self) -> int:
        return len(self.marginals)

    def structures(self) -> list[StructureDistribution]:
        out = []
        for i, m in enumerate(self.marginals):
            try:
                out.append(m.structure(self.horizon))
            except ValueError as exc:
                raise ScenarioError(f"marginals[{i}]: {exc}") from None
        return out

    def target(self) -> np.ndarray:
        return np.array(self.correlation, dtype=float)

    def time_grid(self) -> np.ndarray:
        """Evaluation times ``j T / points_per_period`` for ``j >= 1`` up to the end."""
        n = self.periods * self.points_per_period
        return self.horizon * np.arange(1, n + 1) / self.points_per_period

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "horizon": self.horizon,
            "periods": self.periods,
            "paths": self.paths,
            "seed": self.seed,
            "tol": self.tol,
            "points_per_period": self.points_per_period,
            "marginals": [m.to_dict() for m in self.marginals],
            "correlation": [list(row) for row in self.correlation],
        }
        if self.out is not None:
            out["out"] = self.out
        return out

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)


def parse_scenario(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario: top level must be a mapping")
    known = {"name", "horizon", "periods", "paths", "seed", "tol", "points_per_period",
             "marginals", "correlation", "out"}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"scenario: unknown field(s) {sorted(unknown)}")
    for key in ("marginals", "correlation"):
        if key not in data:
            raise ScenarioError(f"scenario: missing required field '{key}'")
    raw_m = data["marginals"]
    if not isinstance(raw_m, list) or len(raw_m) < 2:
        raise ScenarioError("marginals: expected a list of at least two marginals")
    marginals = tuple(_parse_marginal(m, f"marginals[{i}]") for i, m in enumerate(raw_m))
    d = len(marginals)
    raw_c = data["correlation"]
    if not isinstance(raw_c, list) or len(raw_c) != d:
        raise ScenarioError(f"correlation: expected a {d}x{d} matrix (one row per marginal)")
    rows = []
    for i, row in enumerate(raw_c):
        if not isinstance(row, list) or len(row) != d:
            raise ScenarioError(f"correlation[{i}]: expected {d} entries")
        rows.append(tuple(_number(v, f"correlation[{i}][{j}]") for j, v in enumerate(row)))

    horizon = _number(data.get("horizon", 1.0), "horizon")
    if horizon <= 0:
        raise ScenarioError("horizon: must be positive")
    tol = _number(data.get("tol", 1e-12), "tol")
    if not 0 < tol < 1:
        raise ScenarioError("tol: must lie in (0, 1)")
    name = data.get("name", "scenario")
    out = data.get("out")
    if not isinstance(name, str) or (out is not None and not isinstance(out, str)):
        raise ScenarioError("name/out: expected strings")
    scenario = Scenario(
        marginals=marginals,
        correlation=tuple(rows),
        horizon=horizon,
        periods=_integer(data.get("periods", 1), "periods", 1),
        paths=_integer(data.get("paths", 10_000), "paths", 1),
        seed=_integer(data.get("seed", 0), "seed", 0),
        tol=tol,
        points_per_period=_integer(data.get("points_per_period", 10), "points_per_period", 1),
        name=name,
        out=out,
    )
    scenario.structures()  # surface parameter errors at parse time
    return scenario


def loads(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ScenarioError(f"{where}{getattr(exc, 'problem', None) or exc}") from None
    return parse_scenario(data)


def load(path) -> Scenario:
    return loads(Path(path).read_text())
