"""Configuration for the CLI and the service.

One TOML file serves both sides.  Top-level keys configure the CLI
(endpoint, api_key, project), a ``[service]`` table configures the server
(host, port, data_dir, bulk_size_cap), and ``[keys.<token>]`` tables map
API keys to access contexts.  Environment variables prefixed
``CONTRIBKIT_`` override file values; command-line flags override both.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .store import AccessContext

__all__ = [
    "CliConfig",
    "ConfigError",
    "DEFAULT_CONFIG_PATH",
    "ServiceConfig",
    "load_cli_config",
    "load_config_file",
    "load_service_config",
]

DEFAULT_CONFIG_PATH = "~/.contribkit.toml"


class ConfigError(ValueError):
    pass


@dataclass
class CliConfig:
    endpoint: str | None = None
    api_key: str | None = None
    project: str | None = None


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8421
    data_dir: str | None = None
    bulk_size_cap: int = 256 * 1024 * 1024
    api_keys: dict[str, AccessContext] = field(default_factory=dict)


def _config_path(explicit: str | None, env: dict[str, str]) -> Path | None:
    candidate = explicit or env.get("CONTRIBKIT_CONFIG") or DEFAULT_CONFIG_PATH
    path = Path(candidate).expanduser()
    if explicit or env.get("CONTRIBKIT_CONFIG"):
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        return path
    return path if path.is_file() else None


def load_config_file(path: str | None = None, env: dict[str, str] | None = None) -> dict:
    """Raw parsed config; {} when no file exists and none was demanded."""
    env = dict(os.environ) if env is None else env
    resolved = _config_path(path, env)
    if resolved is None:
        return {}
    try:
        with open(resolved, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{resolved}: {exc}") from exc


def load_cli_config(path: str | None = None, env: dict[str, str] | None = None) -> CliConfig:
    env = dict(os.environ) if env is None else env
    data = load_config_file(path, env)
    cfg = CliConfig(
        endpoint=data.get("endpoint"),
        api_key=data.get("api_key"),
        project=data.get("project"),
    )
    cfg.endpoint = env.get("CONTRIBKIT_ENDPOINT", cfg.endpoint)
    cfg.api_key = env.get("CONTRIBKIT_API_KEY", cfg.api_key)
    cfg.project = env.get("CONTRIBKIT_PROJECT", cfg.project)
    return cfg


def _context_from_table(token: str, table: dict) -> AccessContext:
    if not isinstance(table, dict):
        raise ConfigError(f"key {token!r}: expected a table of account/groups/admin")
    groups = table.get("groups", [])
    if not isinstance(groups, list) or not all(isinstance(g, str) for g in groups):
        raise ConfigError(f"key {token!r}: groups must be a list of project prefixes")
    return AccessContext(
        account=table.get("account"),
        groups=frozenset(groups),
        is_admin=bool(table.get("admin", False)),
    )


def load_service_config(path: str | None = None, env: dict[str, str] | None = None) -> ServiceConfig:
    env = dict(os.environ) if env is None else env
    data = load_config_file(path, env)
    service = data.get("service", {})
    cfg = ServiceConfig(
        host=service.get("host", "127.0.0.1"),
        port=int(service.get("port", 8421)),
        data_dir=service.get("data_dir"),
        bulk_size_cap=int(service.get("bulk_size_cap", ServiceConfig.bulk_size_cap)),
    )
    for token, table in data.get("keys", {}).items():
        cfg.api_keys[token] = _context_from_table(token, table)
    if "CONTRIBKIT_HOST" in env:
        cfg.host = env["CONTRIBKIT_HOST"]
    if "CONTRIBKIT_PORT" in env:
        cfg.port = int(env["CONTRIBKIT_PORT"])
    if "CONTRIBKIT_DATA_DIR" in env:
        cfg.data_dir = env["CONTRIBKIT_DATA_DIR"]
    if "CONTRIBKIT_BULK_SIZE_CAP" in env:
        cfg.bulk_size_cap = int(env["CONTRIBKIT_BULK_SIZE_CAP"])
    return cfg
