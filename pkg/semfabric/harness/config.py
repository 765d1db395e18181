"""
Experiment configuration.

A config file is a flat `key = value` file read with python-dotenv.
Comma-separated values on mode, s, k, k_final and budget_tokens define grid
axes; `s = all` means every registered source.

    mode = centralized,decentralized
    s = 1,3,all
    k = 1,5,20
    corpus = ./fixture
    in_process = true
"""

import itertools
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import dotenv_values

from ..agent import DEFAULT_BUDGET_TOKENS
from ..agent.ledger import DEFAULT_CHARS_PER_TOKEN
from ..agent.retriever import DEFAULT_PARALLELISM
from ..errors import ConfigError
from ..wire import Constraints

S_ALL = "all"

KNOWN_KEYS = {
    "mode", "s", "k", "k_final", "budget_tokens", "corpus", "resolver", "central",
    "in_process", "parallelism", "chars_per_token", "licenses", "topics",
    "max_age_days", "media_types", "out",
}


class Mode(Enum):
    CENTRALIZED = "centralized"
    DECENTRALIZED = "decentralized"
    HYBRID = "hybrid"
    FULL_CONTEXT = "full_context"

    @staticmethod
    def parse(value: str) -> 'Mode':
        value = value.strip().lower()
        if value == "full":
            return Mode.FULL_CONTEXT
        try:
            return Mode(value)
        except ValueError:
            raise ConfigError(f"unknown mode {value!r}")


@dataclass
class ExperimentConfig:
    """One cell of the experiment grid."""
    mode: Mode
    k: Optional[int] = None
    s: Optional[int] = None
    s_all: bool = False
    k_final: Optional[int] = None
    budget_tokens: int = DEFAULT_BUDGET_TOKENS
    corpus_path: Optional[Path] = None
    resolver: Optional[str] = None
    central: Optional[str] = None
    constraints: Constraints = field(default_factory=Constraints)
    parallelism: int = DEFAULT_PARALLELISM
    chars_per_token: int = DEFAULT_CHARS_PER_TOKEN

    def validate(self, in_process: bool = False):
        """Check that the fields the mode needs are present."""
        m = self.mode
        if m in (Mode.CENTRALIZED, Mode.DECENTRALIZED, Mode.HYBRID):
            if self.k is None or self.k < 0:
                raise ConfigError(f"{m.value} needs k >= 0")
        if m in (Mode.DECENTRALIZED, Mode.HYBRID):
            if not self.s_all and (self.s is None or self.s < 1):
                raise ConfigError(f"{m.value} needs s >= 1 or s = all")
            if self.k < 1:
                raise ConfigError(f"{m.value} needs k >= 1")
            if not in_process and not self.resolver:
                raise ConfigError(f"{m.value} needs a resolver endpoint")
        if m is Mode.HYBRID and (self.k_final is None or self.k_final < 1):
            raise ConfigError("hybrid needs k_final >= 1")
        if m is Mode.CENTRALIZED and not in_process and not self.central:
            raise ConfigError("centralized needs a central endpoint")
        if self.budget_tokens < 0:
            raise ConfigError("budget_tokens must be >= 0")

    @property
    def label(self) -> str:
        parts = [self.mode.value]
        if self.s_all:
            parts.append("s=all")
        elif self.s is not None:
            parts.append(f"s={self.s}")
        if self.k is not None:
            parts.append(f"k={self.k}")
        if self.k_final is not None:
            parts.append(f"k_final={self.k_final}")
        if self.mode is Mode.FULL_CONTEXT:
            parts.append(f"budget={self.budget_tokens}")
        return " ".join(parts)


@dataclass
class GridConfig:
    """A parsed config file: grid axes plus shared settings."""
    modes: List[Mode]
    s_values: List[object] = field(default_factory=lambda: [None])
    k_values: List[Optional[int]] = field(default_factory=lambda: [None])
    k_final_values: List[Optional[int]] = field(default_factory=lambda: [None])
    budget_values: List[int] = field(default_factory=lambda: [DEFAULT_BUDGET_TOKENS])
    corpus_path: Optional[Path] = None
    resolver: Optional[str] = None
    central: Optional[str] = None
    in_process: bool = False
    parallelism: int = DEFAULT_PARALLELISM
    chars_per_token: int = DEFAULT_CHARS_PER_TOKEN
    constraints: Constraints = field(default_factory=Constraints)
    out: Optional[Path] = None

    def expand(self) -> List[ExperimentConfig]:
        """
        One ExperimentConfig per distinct grid cell.

        Axes a mode does not use are dropped, so centralized is not repeated
        for every s value.
        """
        configs, seen = [], set()
        for mode, s, k, k_final, budget in itertools.product(
                self.modes, self.s_values, self.k_values, self.k_final_values, self.budget_values):
            uses_s = mode in (Mode.DECENTRALIZED, Mode.HYBRID)
            uses_k = mode is not Mode.FULL_CONTEXT
            cfg = ExperimentConfig(
                mode=mode,
                k=k if uses_k else None,
                s=s if uses_s and s != S_ALL else None,
                s_all=uses_s and s == S_ALL,
                k_final=k_final if mode is Mode.HYBRID else None,
                budget_tokens=budget,
                corpus_path=self.corpus_path,
                resolver=self.resolver,
                central=self.central,
                constraints=self.constraints,
                parallelism=self.parallelism,
                chars_per_token=self.chars_per_token,
            )
            key = (mode, cfg.k, cfg.s, cfg.s_all, cfg.k_final,
                   budget if mode is Mode.FULL_CONTEXT else None)
            if key in seen:
                continue
            seen.add(key)
            cfg.validate(in_process=self.in_process)
            configs.append(cfg)
        return configs


def _split(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _ints(key: str, value: str, allow_all: bool = False) -> List[object]:
    out = []
    for item in _split(value):
        if allow_all and item.lower() == S_ALL:
            out.append(S_ALL)
            continue
        try:
            out.append(int(item))
        except ValueError:
            raise ConfigError(f"{key}: expected integers, got {item!r}")
    if not out:
        raise ConfigError(f"{key}: empty value")
    return out


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}")


def _bool(key: str, value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def parse_config(values: Dict[str, Optional[str]], base_dir: Optional[Path] = None) -> GridConfig:
    """
    Build a GridConfig from flat key/value pairs.

    Raises:
        ConfigError: unknown key, missing mode or malformed value
    """
    values = {k.strip().lower(): (v or "").strip() for k, v in values.items()}
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if not values.get("mode"):
        raise ConfigError("config needs a mode")

    def path(key):
        if not values.get(key):
            return None
        p = Path(values[key])
        return p if p.is_absolute() or base_dir is None else base_dir / p

    def listed(key):
        return _split(values[key]) or None if values.get(key) else None

    constraints = Constraints(
        licenses=listed("licenses"),
        topics=listed("topics"),
        max_age_days=_int("max_age_days", values["max_age_days"]) if values.get("max_age_days") else None,
        media_types=listed("media_types"),
    )

    grid = GridConfig(
        modes=[Mode.parse(m) for m in _split(values["mode"])],
        corpus_path=path("corpus"),
        resolver=values.get("resolver") or None,
        central=values.get("central") or None,
        in_process=_bool("in_process", values["in_process"]) if values.get("in_process") else False,
        constraints=constraints,
        out=path("out"),
    )
    if values.get("s"):
        grid.s_values = _ints("s", values["s"], allow_all=True)
    if values.get("k"):
        grid.k_values = _ints("k", values["k"])
    if values.get("k_final"):
        grid.k_final_values = _ints("k_final", values["k_final"])
    if values.get("budget_tokens"):
        grid.budget_values = _ints("budget_tokens", values["budget_tokens"])
    if values.get("parallelism"):
        grid.parallelism = _int("parallelism", values["parallelism"])
    if values.get("chars_per_token"):
        grid.chars_per_token = _int("chars_per_token", values["chars_per_token"])
        if grid.chars_per_token < 1:
            raise ConfigError("chars_per_token must be >= 1")
    if grid.parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    return grid


def load_config(path: Path) -> GridConfig:
    """Read a flat config file; relative paths resolve against its directory."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(dotenv_values(path), base_dir=path.parent)
