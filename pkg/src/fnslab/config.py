"""
Line-oriented run configuration: ``key = value`` with ``#`` comments.

Values may be integers, reals (fractions such as ``1/16`` are accepted),
comma-separated lists, or names. Unknown and repeated keys are errors.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from pathlib import Path

from .experiments import ScenarioSpec
from .integrator import SolverConfig
from .lemmas import RandomFieldEnsembleSpec
from .physics import PRESETS, polynomial_laws


class ConfigError(ValueError):
    pass


LAW_KEYS = ("mu_coeffs", "pe_prime_coeffs", "kappa_coeffs")
_SOLVER = {f.name: f for f in dataclasses.fields(SolverConfig)}
_SCENARIO = {f.name: f for f in dataclasses.fields(ScenarioSpec) if f.name not in ("kind", "solver")}
_LEMMA = {"lemma_" + f.name: f for f in dataclasses.fields(RandomFieldEnsembleSpec)}
KNOWN_KEYS = frozenset(_SOLVER) | frozenset(_SCENARIO) | frozenset(_LEMMA) | frozenset(LAW_KEYS)


def parse_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: key {key!r} given twice")
        entries[key] = value
    return entries


def _real(text: str) -> float:
    return float(Fraction(text))


def _convert(key: str, default, text: str):
    try:
        if key == "dt":
            return None if text.lower() in ("auto", "none") else _real(text)
        if key in ("laws", "backend", "kind"):
            return text
        if key == "lemma_band":
            return None if text.lower() in ("auto", "none") else _real(text)
        if isinstance(default, bool):
            if text.lower() not in ("true", "false"):
                raise ValueError(text)
            return text.lower() == "true"
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return _real(text)
        if isinstance(default, tuple):
            items = [_real(x) for x in text.split(",") if x.strip()]
            return tuple(int(x) for x in items) if all(isinstance(v, int) for v in default) else tuple(items)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad value for {key!r}: {text!r}") from None
    raise ConfigError(f"cannot interpret key {key!r}")


def _default(f: dataclasses.Field):
    if f.default is not dataclasses.MISSING:
        return f.default
    return f.default_factory()  # type: ignore[misc]


def build(kind: str, entries: dict[str, str]) -> tuple[ScenarioSpec, RandomFieldEnsembleSpec]:
    """Scenario and lemma-ensemble specs from parsed entries; ``seed`` applies to all."""
    solver_kw, scen_kw, lemma_kw = {}, {}, {}
    for key, text in entries.items():
        if key in LAW_KEYS:
            continue
        if key in _SOLVER:
            solver_kw[key] = _convert(key, _default(_SOLVER[key]), text)
        if key in _SCENARIO:
            scen_kw[key] = _convert(key, _default(_SCENARIO[key]), text)
        if key in _LEMMA:
            lemma_kw[key[len("lemma_"):]] = _convert(key, _default(_LEMMA[key]), text)
    if any(k in entries for k in LAW_KEYS):
        if "laws" in entries:
            raise ConfigError("give either a preset 'laws' or coefficient lists, not both")
        coeffs = dict(PRESETS["const-mu"])
        for k in LAW_KEYS:
            if k in entries:
                coeffs[k] = [_real(x) for x in entries[k].split(",")]
        try:
            solver_kw["laws"] = polynomial_laws("custom", **coeffs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if "seed" in entries:
        lemma_kw.setdefault("seed", int(entries["seed"]))
    try:
        solver = SolverConfig(**solver_kw)
        scenario = ScenarioSpec(kind=kind, solver=solver, **scen_kw)
        lemma = RandomFieldEnsembleSpec(**lemma_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return scenario, lemma


def load(path: str | Path | None, kind: str) -> tuple[ScenarioSpec, RandomFieldEnsembleSpec]:
    entries = {} if path is None else parse_text(Path(path).read_text())
    return build(kind, entries)
