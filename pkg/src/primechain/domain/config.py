"""
Configuration for primechain.

Environment settings (prefix ``PRIMECHAIN_``) and the registry of named search
profiles loaded from YAML.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from primechain.domain.bigreal import DEFAULT_EXP2_GUARD, DEFAULT_MAX_BITS, PrecisionPolicy
from primechain.domain.exceptions import ConfigurationError, ParseError, ProfileNotFoundError
from primechain.domain.models import GrowthRule
from primechain.domain.primality import DEFAULT_EXTRA_ROUNDS
from primechain.domain.search import SearchConfig

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process-wide defaults, overridable from the environment."""

    model_config = SettingsConfigDict(env_prefix="PRIMECHAIN_", extra="ignore")

    store: str = "primechain_store.jsonl"
    precision_start_bits: int = 128
    precision_max_bits: int = DEFAULT_MAX_BITS
    prp_extra_rounds: int = DEFAULT_EXTRA_ROUNDS
    exp2_max_exponent: int = DEFAULT_EXP2_GUARD
    search_config_path: str = "config/search.yaml"
    log_level: str = "INFO"

    def precision_policy(self, max_bits: int | None = None) -> PrecisionPolicy:
        """
        Raises:
            ConfigurationError: If the bit bounds are inconsistent
        """
        top = max_bits if max_bits is not None else self.precision_max_bits
        try:
            return PrecisionPolicy(start_bits=min(self.precision_start_bits, top), max_bits=top)
        except ValueError as e:
            raise ConfigurationError(f"Invalid precision settings: {e}", config_key="precision") from e


@dataclass
class SearchProfile:
    """
    A named search setup.

    Attributes:
        name: Profile key in the YAML file
        rule: Growth rule searched over
        config: Annealing schedule and budget
    """

    name: str
    rule: GrowthRule
    config: SearchConfig

    def with_overrides(self, **overrides: Any) -> "SearchProfile":
        """Copy with the non-None overrides applied to the search config."""
        values = {k: v for k, v in overrides.items() if v is not None}
        if not values:
            return self
        try:
            config = SearchConfig(**{**self.config.model_dump(), **values})
        except ValidationError as e:
            raise ConfigurationError(f"Invalid search override: {e}", config_key=self.name) from e
        return SearchProfile(name=self.name, rule=self.rule, config=config)


class SearchProfileRegistry:
    """
    Registry for loading and accessing search profiles.

    Loads profiles from a YAML file whose ``profiles`` mapping holds a ``rule``
    spec and SearchConfig fields per profile.
    """

    def __init__(self, config_path: str = "config/search.yaml"):
        self._config_path = config_path
        self._profiles: dict[str, SearchProfile] = {}
        self._load_profiles()

    def _load_profiles(self) -> None:
        config_path = Path(self._config_path)

        if not config_path.exists():
            raise ConfigurationError(
                f"Search configuration file not found: {self._config_path}",
                config_key="search_config_path",
            )

        try:
            with open(config_path, "r") as f:
                config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(
                f"Invalid YAML in search configuration: {e}",
                config_key="search_config_path",
            ) from e

        for name, entry in (config.get("profiles") or {}).items():
            entry = dict(entry or {})
            try:
                rule = GrowthRule.parse(entry.pop("rule", "power:5/4:nearest"))
                search_config = SearchConfig(**entry)
            except (ParseError, ValidationError) as e:
                raise ConfigurationError(f"Invalid search profile '{name}': {e}", config_key=name) from e
            self._profiles[name] = SearchProfile(name=name, rule=rule, config=search_config)

        logger.debug(f"Loaded {len(self._profiles)} search profiles from {self._config_path}")

    def get_profile(self, name: str) -> SearchProfile:
        """
        Raises:
            ProfileNotFoundError: If no profile has this name
        """
        if name not in self._profiles:
            raise ProfileNotFoundError(name)
        return self._profiles[name]

    def get_all_profiles(self) -> dict[str, SearchProfile]:
        return self._profiles.copy()

    def reload(self) -> None:
        """Reload profiles from the configuration file."""
        self._profiles.clear()
        self._load_profiles()
