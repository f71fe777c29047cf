#!/usr/bin/env python3
"""
Run configuration resolution

Flat ``key = value`` text with ``#`` comments and dotted section prefixes.
Layers are applied in order: defaults < preset < config file < --set overrides.
The subcommand fixes ``mode``.
"""

from pathlib import Path
from typing import Dict, Iterable, Optional

from pydantic import ValidationError

from .errors import ConfigError
from .schema import REQUIRED_KEYS, SECTIONS, RunConfig, known_keys
from .utils import ensure_output_dir, format_number


PRESETS: Dict[str, Dict[str, str]] = {
    'two-stream': {
        'equilibrium.kind': 'two_stream',
        'equilibrium.v_bar': '2.4',
        'perturbation.shape': 'cos',
        'perturbation.wavenumber': '0.2',
        'perturbation.amplitude': '1e-3',
        'moments.order': '30',
        'control.modes': '10',
        'run.horizon': '30',
        'run.extend': '40',
    },
    'bump-on-tail': {
        'equilibrium.kind': 'bump_on_tail',
        'equilibrium.omega1': '0.8',
        'equilibrium.omega2': '0.2',
        'equilibrium.u': '3.5',
        'equilibrium.v_t': '0.5',
        'perturbation.shape': 'sin',
        'perturbation.wavenumber': '0.2',
        'perturbation.amplitude': '1e-3',
        'moments.order': '30',
        'control.modes': '10',
        'run.horizon': '25',
        'run.extend': '60',
    },
}

RESOLVED_FILENAME = "config.resolved"


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """Parse flat ``key = value`` lines

    Raises:
        ConfigError: Malformed line, duplicate or unknown key
    """
    values: Dict[str, str] = {}
    keys = known_keys()
    for line_num, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"{source}:{line_num}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in keys:
            raise ConfigError(f"{source}:{line_num}: unknown key {key!r}", key=key)
        if key in values:
            raise ConfigError(f"{source}:{line_num}: duplicate key {key!r}", key=key)
        values[key] = value
    return values


def parse_override(text: str) -> Dict[str, str]:
    """Parse one ``--set key=value`` argument"""
    if '=' not in text:
        raise ConfigError(f"Override must look like key=value, got {text!r}")
    key, value = (part.strip() for part in text.split('=', 1))
    if key not in known_keys():
        raise ConfigError(f"Unknown key {key!r}", key=key)
    return {key: value}


def load_flat(mode: str, preset: Optional[str] = None, config_path: Optional[Path] = None,
              overrides: Iterable[str] = (), output_dir: Optional[Path] = None) -> Dict[str, str]:
    """Merge all configuration layers into one flat mapping"""
    flat: Dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"Unknown preset {preset!r} (available: {', '.join(PRESETS)})")
        flat.update(PRESETS[preset])
    if config_path is not None:
        config_path = Path(config_path)
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")
        file_values = parse_config_text(config_path.read_text(encoding='utf-8'), str(config_path))
        if 'mode' in file_values and file_values['mode'] != mode:
            raise ConfigError(f"{config_path}: mode {file_values['mode']!r} conflicts with "
                              f"subcommand {mode!r}", key='mode')
        flat.update(file_values)
    for override in overrides:
        flat.update(parse_override(override))
    if output_dir is not None:
        flat['output.dir'] = str(output_dir)
    flat['mode'] = mode
    return flat


def _nest(flat: Dict[str, str]) -> dict:
    nested: dict = {}
    for key, value in flat.items():
        if '.' in key:
            section, name = key.split('.', 1)
            nested.setdefault(section, {})[name] = value
        else:
            nested[key] = value
    return nested


def build_config(flat: Dict[str, str]) -> RunConfig:
    """Validate a flat mapping into a RunConfig

    Raises:
        ConfigError: Missing required keys (all listed) or invalid value (key named)
    """
    missing = [key for key in REQUIRED_KEYS if key not in flat]
    if missing:
        raise ConfigError(f"Missing required keys: {', '.join(missing)}", key=missing[0])
    try:
        return RunConfig.model_validate(_nest(flat))
    except ValidationError as e:
        error = e.errors()[0]
        key = '.'.join(str(part) for part in error['loc'])
        raise ConfigError(f"Invalid value for {key}: {error['msg']}", key=key) from None


def build_section(flat: Dict[str, str], section: str):
    """Validate a single section (used where no full RunConfig is needed)"""
    values = {key.split('.', 1)[1]: value for key, value in flat.items() if key.startswith(section + '.')}
    try:
        return SECTIONS[section].model_validate(values)
    except ValidationError as e:
        error = e.errors()[0]
        key = '.'.join([section] + [str(part) for part in error['loc']])
        raise ConfigError(f"Invalid value for {key}: {error['msg']}", key=key) from None


def parse_config(mode: str, preset: Optional[str] = None, config_path: Optional[Path] = None,
                 overrides: Iterable[str] = (), output_dir: Optional[Path] = None,
                 echo: bool = True) -> RunConfig:
    """Resolve a RunConfig and echo it to <output.dir>/config.resolved"""
    config = build_config(load_flat(mode, preset, config_path, overrides, output_dir))
    if echo:
        write_resolved(config, Path(config.output.dir))
    return config


def flatten(config: RunConfig) -> Dict[str, str]:
    """Dotted key → text for every set value"""
    flat = {'mode': config.mode}
    for section in SECTIONS:
        for name, value in getattr(config, section).model_dump().items():
            if value is None:
                continue
            flat[f"{section}.{name}"] = format_number(value) if isinstance(value, float) else str(value)
    return flat


def format_config(config: RunConfig) -> str:
    flat = flatten(config)
    return ''.join(f"{key} = {flat[key]}\n" for key in sorted(flat))


def write_resolved(config: RunConfig, output_dir: Path) -> Path:
    path = ensure_output_dir(output_dir) / RESOLVED_FILENAME
    temp_path = path.with_suffix('.tmp')
    temp_path.write_text(format_config(config), encoding='utf-8')
    temp_path.replace(path)
    return path
