"""Run configuration: a YAML document naming corpora paths, system
profiles, and ensembles. Validation errors carry the offending field path."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import yaml

from .errors import ValidationError
from .pipeline import CombineMode, EnsembleSpec, MemberSpec, derive_seed
from .rover import VoteConfig, VoteStat
from .scoring import Scope
from .simulator import SystemProfile


def _as_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _as_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ValidationError(f"{path}: expected a list, got {type(value).__name__}")
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str) or not value:
        raise ValidationError(f"{path}: expected a non-empty string, got {value!r}")
    return value


def _check_keys(mapping: dict, allowed: set, path: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ValidationError(f"{path}: unknown keys {sorted(unknown)} (allowed: {sorted(allowed)})")


def _parse_profile(name: str, raw, base_seed: int, path: str) -> SystemProfile:
    raw = _as_mapping(raw, path)
    _check_keys(
        raw,
        {"match_eng", "match_man", "seed", "kappa", "delta", "ins_rate", "nbest_size"},
        path,
    )
    for key in ("match_eng", "match_man"):
        if key not in raw:
            raise ValidationError(f"{path}.{key}: required")
    kwargs = {
        "name": name,
        "match_eng": _as_number(raw["match_eng"], f"{path}.match_eng"),
        "match_man": _as_number(raw["match_man"], f"{path}.match_man"),
        "seed": _as_int(raw["seed"], f"{path}.seed") if "seed" in raw else derive_seed(base_seed, name),
    }
    for key in ("kappa", "delta", "ins_rate"):
        if key in raw:
            kwargs[key] = _as_number(raw[key], f"{path}.{key}")
    if "nbest_size" in raw:
        kwargs["nbest_size"] = _as_int(raw["nbest_size"], f"{path}.nbest_size")
    try:
        return SystemProfile(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _parse_vote(raw, path: str) -> VoteConfig:
    raw = _as_mapping(raw, path)
    _check_keys(raw, {"alpha", "null_conf", "stat"}, path)
    kwargs = {}
    if "alpha" in raw:
        kwargs["alpha"] = _as_number(raw["alpha"], f"{path}.alpha")
    if "null_conf" in raw:
        kwargs["null_conf"] = _as_number(raw["null_conf"], f"{path}.null_conf")
    if "stat" in raw:
        stat = _as_str(raw["stat"], f"{path}.stat")
        try:
            kwargs["stat"] = VoteStat(stat)
        except ValueError:
            raise ValidationError(
                f"{path}.stat: {stat!r} is not one of {[s.value for s in VoteStat]}"
            ) from None
    try:
        return VoteConfig(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _parse_member(raw, profiles: dict[str, SystemProfile], path: str) -> MemberSpec:
    raw = _as_mapping(raw, path)
    _check_keys(raw, {"profile", "lm_weights", "lm_scale", "group"}, path)
    profile_name = _as_str(raw.get("profile"), f"{path}.profile")
    if profile_name not in profiles:
        raise ValidationError(f"{path}.profile: unknown profile {profile_name!r}")
    lm_weights = None
    if "lm_weights" in raw:
        weights_raw = _as_mapping(raw["lm_weights"], f"{path}.lm_weights")
        lm_weights = {
            key: _as_number(value, f"{path}.lm_weights.{key}")
            for key, value in weights_raw.items()
        }
    lm_scale = _as_number(raw["lm_scale"], f"{path}.lm_scale") if "lm_scale" in raw else 0.0
    group = _as_str(raw["group"], f"{path}.group") if "group" in raw else None
    try:
        return MemberSpec(profiles[profile_name], lm_weights, lm_scale, group)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _parse_ensemble(name: str, raw, profiles: dict, path: str) -> EnsembleSpec:
    raw = _as_mapping(raw, path)
    _check_keys(raw, {"members", "mode", "vote"}, path)
    members_raw = _as_list(raw.get("members"), f"{path}.members")
    members = tuple(
        _parse_member(m, profiles, f"{path}.members[{i}]") for i, m in enumerate(members_raw)
    )
    mode = CombineMode.FLAT
    if "mode" in raw:
        mode_str = _as_str(raw["mode"], f"{path}.mode")
        try:
            mode = CombineMode(mode_str)
        except ValueError:
            raise ValidationError(
                f"{path}.mode: {mode_str!r} is not one of {[m.value for m in CombineMode]}"
            ) from None
    vote = _parse_vote(raw["vote"], f"{path}.vote") if "vote" in raw else VoteConfig()
    try:
        return EnsembleSpec(name, members, mode, vote)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run configuration (all profile seeds concrete)."""

    path: Path
    seed: int
    scope: Scope
    refs_path: Path
    unlabeled_path: Optional[Path]
    profiles: dict[str, SystemProfile]
    ensembles: dict[str, EnsembleSpec]


def load_config(path, seed_override: Optional[int] = None) -> RunConfig:
    """Load and validate a YAML run config.

    Corpus paths are resolved relative to the config file. Profiles without
    an explicit seed get one derived from the run seed and their name, so
    --seed reseeds the whole run deterministically.
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: invalid YAML ({exc})") from exc
    raw = _as_mapping(raw, str(path))
    _check_keys(raw, {"seed", "scope", "corpora", "profiles", "ensembles"}, str(path))

    seed = seed_override if seed_override is not None else _as_int(raw.get("seed", 0), "seed")
    scope = Scope.BY_UTTERANCE_CATEGORY
    if "scope" in raw:
        scope_str = _as_str(raw["scope"], "scope")
        try:
            scope = Scope(scope_str)
        except ValueError:
            raise ValidationError(
                f"scope: {scope_str!r} is not one of {[s.value for s in Scope]}"
            ) from None

    corpora = _as_mapping(raw.get("corpora"), "corpora")
    _check_keys(corpora, {"refs", "unlabeled"}, "corpora")
    if "refs" not in corpora:
        raise ValidationError("corpora.refs: required")
    refs_path = path.parent / _as_str(corpora["refs"], "corpora.refs")
    unlabeled_path = (
        path.parent / _as_str(corpora["unlabeled"], "corpora.unlabeled")
        if "unlabeled" in corpora
        else None
    )

    profiles_raw = _as_mapping(raw.get("profiles"), "profiles")
    profiles = {
        name: _parse_profile(name, body, seed, f"profiles.{name}")
        for name, body in profiles_raw.items()
    }
    if not profiles:
        raise ValidationError("profiles: at least one profile is required")

    ensembles_raw = _as_mapping(raw.get("ensembles"), "ensembles")
    ensembles = {
        name: _parse_ensemble(name, body, profiles, f"ensembles.{name}")
        for name, body in ensembles_raw.items()
    }
    if not ensembles:
        raise ValidationError("ensembles: at least one ensemble is required")

    return RunConfig(path, seed, scope, refs_path, unlabeled_path, profiles, ensembles)
