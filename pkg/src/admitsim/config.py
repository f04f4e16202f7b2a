"""Flat key-value scenario/suite configuration files (INI sections, SI units).

Scenario schema:

    [scenario]
    task = WW                ; MO | PH | WW | DO
    mode = force_aware       ; force_aware | baseline_low | baseline_mid | baseline_high
    duration = 20.0          ; seconds, within the task time limit
    seed = 0
    wipe_passes = 1          ; WW only: repetitions of the coverage path

    [admittance]             ; optional gain overrides
    mass = 1.0
    stiffness = 50.0
    damping_ratio = 2.0
    rot_mass = 0.1
    rot_stiffness = 10.0
    tangent_scale = 4.0
    target_force = 4.0
    force_deadband = 2.0
    torque_deadband = 1.0

    [noise]                  ; optional oracle-prediction noise
    pos_std = 0.002
    rot_std = 0.01
    normal_cone_std = 0.05
    contact_flip_prob = 0.01

    [environment]            ; optional
    k_e = 1000.0
    latch_force = 15.0

    [safety]                 ; optional
    limit = 25.0
    debounce = 0.02

    [disturbance.<name>]     ; zero or more
    kind = lower             ; raise | lower | shift | tilt | force_pulse | sinusoid
    start = 5.0
    duration = 10.0
    magnitude = 0.03
    direction = 0 0 1
    ramp = 0.5
    omega = 6.283185307179586

Suite schema:

    [suite]
    task = WW
    modes = force_aware baseline_low baseline_mid baseline_high
    seeds = 25
    duration = 20.0
    disturbed = none         ; none | only | both
    base_seed = 0
    plus optional [noise], [admittance], [environment], [disturbance.*]
    sections applied to every episode (disturbances only to disturbed runs).
"""

from __future__ import annotations

import configparser

import numpy as np

from .environments import DisturbanceEvent
from .errors import ConfigParse
from .harness import MODES, ScenarioConfig, default_disturbance
from .policy import NoiseSpec
from .tasks import TASKS

_ADMITTANCE_KEYS = (
    "mass", "stiffness", "damping_ratio", "rot_mass", "rot_stiffness",
    "tangent_scale", "target_force", "force_deadband", "torque_deadband",
)
_ENV_KEYS = ("k_e", "latch_force")


def _read(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigParse(f"{path}: {exc}") from exc
    return parser


def _get_float(parser, section: str, key: str, path: str) -> float:
    try:
        return parser.getfloat(section, key)
    except ValueError as exc:
        raise ConfigParse(f"{path}: [{section}] {key} is not a number") from exc


def _noise_from(parser, path: str) -> NoiseSpec:
    if not parser.has_section("noise"):
        return NoiseSpec()
    kwargs = {}
    for key in ("pos_std", "rot_std", "normal_cone_std", "contact_flip_prob"):
        if parser.has_option("noise", key):
            kwargs[key] = _get_float(parser, "noise", key, path)
    if parser.has_option("noise", "seed"):
        kwargs["seed"] = parser.getint("noise", "seed")
    return NoiseSpec(**kwargs)


def _overrides_from(parser, section: str, keys, path: str) -> dict:
    out = {}
    if parser.has_section(section):
        for key in parser.options(section):
            if key not in keys:
                raise ConfigParse(f"{path}: unknown key {key!r} in [{section}]")
            out[key] = _get_float(parser, section, key, path)
    return out


def _disturbances_from(parser, path: str) -> tuple:
    events = []
    for section in parser.sections():
        if not section.startswith("disturbance"):
            continue
        kind = parser.get(section, "kind", fallback=None)
        if kind is None:
            raise ConfigParse(f"{path}: [{section}] missing 'kind'")
        direction = np.array([0.0, 0.0, 1.0])
        if parser.has_option(section, "direction"):
            parts = parser.get(section, "direction").split()
            if len(parts) != 3:
                raise ConfigParse(f"{path}: [{section}] direction needs 3 components")
            direction = np.array([float(p) for p in parts])
        try:
            events.append(DisturbanceEvent(
                kind=kind,
                start=_get_float(parser, section, "start", path),
                duration=_get_float(parser, section, "duration", path),
                magnitude=_get_float(parser, section, "magnitude", path),
                direction=direction,
                ramp=parser.getfloat(section, "ramp", fallback=0.0),
                omega=parser.getfloat(section, "omega", fallback=2.0 * np.pi),
            ))
        except (ValueError, configparser.NoOptionError) as exc:
            raise ConfigParse(f"{path}: [{section}] {exc}") from exc
    return tuple(events)


def parse_scenario(path: str) -> ScenarioConfig:
    parser = _read(path)
    if not parser.has_section("scenario"):
        raise ConfigParse(f"{path}: missing [scenario] section")
    task = parser.get("scenario", "task", fallback=None)
    if task not in TASKS:
        raise ConfigParse(f"{path}: [scenario] task must be one of {TASKS}, got {task!r}")
    mode = parser.get("scenario", "mode", fallback="force_aware")
    if mode not in MODES:
        raise ConfigParse(f"{path}: [scenario] mode must be one of {MODES}, got {mode!r}")
    kwargs = dict(
        task=task,
        mode=mode,
        duration=parser.getfloat("scenario", "duration", fallback=20.0),
        seed=parser.getint("scenario", "seed", fallback=0),
        wipe_passes=parser.getint("scenario", "wipe_passes", fallback=1),
        noise=_noise_from(parser, path),
        disturbances=_disturbances_from(parser, path),
        admittance_overrides=_admittance_overrides(parser, path),
        env_overrides=_overrides_from(parser, "environment", _ENV_KEYS, path),
    )
    if parser.has_section("safety"):
        if parser.has_option("safety", "limit"):
            kwargs["safety_limit"] = _get_float(parser, "safety", "limit", path)
        if parser.has_option("safety", "debounce"):
            kwargs["safety_debounce"] = _get_float(parser, "safety", "debounce", path)
    try:
        return ScenarioConfig(**kwargs)
    except ValueError as exc:
        raise ConfigParse(f"{path}: {exc}") from exc


def _admittance_overrides(parser, path: str) -> dict:
    raw = _overrides_from(parser, "admittance", _ADMITTANCE_KEYS, path)
    return raw


def parse_verify_params(path: str):
    """Verification grid overrides: [verify] with space-separated value lists.

    Keys: m, k_e, f_H (grid axes) and optional d (explicit damping for every
    point instead of the over-damped rule at stiffness 50).
    """
    import math

    from .verify import CONTROLLER_K, DAMPING_RATIO, NormalDynamicsParams

    parser = _read(path)
    if not parser.has_section("verify"):
        raise ConfigParse(f"{path}: missing [verify] section")

    def floats(key, default):
        if not parser.has_option("verify", key):
            return default
        try:
            return [float(v) for v in parser.get("verify", key).split()]
        except ValueError as exc:
            raise ConfigParse(f"{path}: [verify] {key} must be numbers") from exc

    ms = floats("m", [0.5, 1.0, 2.0])
    kes = floats("k_e", [100.0, 1000.0, 5000.0])
    fhs = floats("f_h", [2.0, 4.0, 8.0])
    d_fixed = parser.getfloat("verify", "d", fallback=None)
    grid = []
    try:
        for m in ms:
            d = d_fixed if d_fixed is not None else \
                2.0 * DAMPING_RATIO * math.sqrt(m * CONTROLLER_K)
            for k_e in kes:
                for f_H in fhs:
                    grid.append(NormalDynamicsParams(m, d, k_e, f_H))
    except ValueError as exc:
        raise ConfigParse(f"{path}: [verify] {exc}") from exc
    return grid


def parse_suite(path: str) -> list[ScenarioConfig]:
    """Expand a suite file into scenario configs (modes x seeds x conditions)."""
    parser = _read(path)
    if not parser.has_section("suite"):
        raise ConfigParse(f"{path}: missing [suite] section")
    task = parser.get("suite", "task", fallback=None)
    if task not in TASKS:
        raise ConfigParse(f"{path}: [suite] task must be one of {TASKS}, got {task!r}")
    modes = parser.get("suite", "modes", fallback="force_aware").split()
    for m in modes:
        if m not in MODES:
            raise ConfigParse(f"{path}: [suite] unknown mode {m!r}")
    seeds = parser.getint("suite", "seeds", fallback=5)
    base_seed = parser.getint("suite", "base_seed", fallback=0)
    duration = parser.getfloat("suite", "duration", fallback=20.0)
    disturbed = parser.get("suite", "disturbed", fallback="none")
    if disturbed not in ("none", "only", "both"):
        raise ConfigParse(f"{path}: [suite] disturbed must be none|only|both")
    wipe_passes = parser.getint("suite", "wipe_passes", fallback=1)
    noise = _noise_from(parser, path)
    adm = _admittance_overrides(parser, path)
    env = _overrides_from(parser, "environment", _ENV_KEYS, path)
    events = _disturbances_from(parser, path) or default_disturbance(task)

    conditions = {"none": (False,), "only": (True,), "both": (False, True)}[disturbed]
    cfgs = []
    for mode in modes:
        for with_dist in conditions:
            for s in range(seeds):
                cfgs.append(ScenarioConfig(
                    task=task, mode=mode, duration=duration, seed=base_seed + s,
                    noise=noise, disturbances=events if with_dist else (),
                    admittance_overrides=adm, env_overrides=env,
                    wipe_passes=wipe_passes,
                ))
    return cfgs
