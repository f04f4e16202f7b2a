"""Closed-loop episode runner: oracle policy at 10 FPS, admittance controller
at 1 kHz, environment wrench and disturbances per tick.

An episode terminates at the configured duration, on a safety stop, or once
the expert plan is exhausted plus a short settle tail; success is judged on
the final task metrics. Identical configs (seed included) produce bit-identical
logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .admittance import (
    AdmittanceConfig,
    ControllerCommand,
    ControllerState,
    WrenchSample,
    controller_tick,
)
from .environments import (
    DisturbanceEvent,
    HingedDoor,
    PlaneBoard,
    apply_disturbances,
    update_ink,
)
from .errors import NonFiniteState
from .geometry import pose10_encode
from .policy import ActionChunk, NoiseSpec, Observation, predict
from .tasks import TASK_FLAGS, TASK_TIME_LIMIT, TASKS, build_environment, generate_demo

MODES = ("force_aware", "baseline_low", "baseline_mid", "baseline_high")
BASELINE_STIFFNESS = {"baseline_low": 50.0, "baseline_mid": 200.0, "baseline_high": 800.0}

CONTROL_HZ = 1000
POLICY_HZ = 10
TICKS_PER_STEP = CONTROL_HZ // POLICY_HZ

DEFAULT_SAFETY_LIMIT = 25.0   # N on the deadbanded force magnitude
DEFAULT_DEBOUNCE = 0.020      # s a violation must persist before stopping


@dataclass(frozen=True)
class ScenarioConfig:
    task: str
    mode: str = "force_aware"
    duration: float = 20.0
    seed: int = 0
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    disturbances: tuple = ()
    admittance_overrides: dict = field(default_factory=dict)
    env_overrides: dict = field(default_factory=dict)
    chunk_horizon: int = 16
    safety_limit: float = DEFAULT_SAFETY_LIMIT
    safety_debounce: float = DEFAULT_DEBOUNCE
    settle_time: float = 1.0
    wipe_passes: int = 1

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown controller mode {self.mode!r}")
        if self.duration < 0.0 or self.duration > TASK_TIME_LIMIT[self.task]:
            raise ValueError(
                f"duration must be within (0, {TASK_TIME_LIMIT[self.task]}] s for {self.task}")
        if self.chunk_horizon < 1:
            raise ValueError("chunk_horizon must be >= 1")

    def build_admittance(self) -> AdmittanceConfig:
        tangent, normal, f_h = TASK_FLAGS[self.task]
        if self.mode == "force_aware":
            base = dict(stiffness=50.0, enable_tangent_stiffening=tangent,
                        enable_normal_regulation=normal, target_force=f_h)
        else:
            # Blind baselines: isotropic stiffness, no force awareness;
            # rotational admittance stays at the low-stiffness setting.
            base = dict(stiffness=BASELINE_STIFFNESS[self.mode],
                        enable_tangent_stiffening=False,
                        enable_normal_regulation=False, target_force=0.0)
        base.update(self.admittance_overrides)
        return AdmittanceConfig(**base)


@dataclass
class RunLog:
    """Per-tick series plus end-of-episode metrics."""

    t: np.ndarray
    x_r: np.ndarray
    v_r: np.ndarray
    f_ext: np.ndarray   # deadbanded force fed to the controller
    f_cmd: np.ndarray
    k_eigs: np.ndarray
    phase: np.ndarray
    contact: np.ndarray
    disturbed: np.ndarray
    metrics: dict
    success: bool
    safety_stopped: bool

    @property
    def n_ticks(self) -> int:
        return len(self.t)


def safety_monitor(force_magnitudes: np.ndarray, limit: float,
                   debounce_ticks: int) -> bool:
    """True (stopped) when |F| exceeds the limit for more than the debounce window."""
    over = 0
    for m in force_magnitudes:
        over = over + 1 if m > limit else 0
        if over > debounce_ticks:
            return True
    return False


def success_check(task: str, log: RunLog) -> bool:
    """Task threshold on final metrics; any safety stop is a failure."""
    if log.safety_stopped:
        return False
    m = log.metrics
    if task == "MO":
        return m["opening_angle_deg"] >= 50.0
    if task == "DO":
        return m["opening_angle_deg"] >= 30.0
    if task == "PH":
        return m["insertion_depth_mm"] >= 10.0
    return m["remaining_ink_cm"] < 5.0


def run_episode(cfg: ScenarioConfig) -> RunLog:
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, TASKS.index(cfg.task)]))
    env = build_environment(cfg.task, rng, cfg.env_overrides)
    demo = generate_demo(cfg.task, env, wipe_passes=cfg.wipe_passes)
    adm = cfg.build_admittance()
    noise = replace(cfg.noise, seed=cfg.noise.seed ^ (cfg.seed * 2654435761 % 2 ** 31))
    dt = 1.0 / CONTROL_HZ
    debounce_ticks = int(round(cfg.safety_debounce * CONTROL_HZ))
    n_demo = len(demo.tuples)
    settle_steps = int(round(cfg.settle_time * POLICY_HZ))
    max_ticks = int(round(cfg.duration * CONTROL_HZ))

    state = ControllerState.at_rest(demo.poses[0])
    buf_t = np.empty(max_ticks)
    buf_x = np.empty((max_ticks, 3))
    buf_v = np.empty((max_ticks, 3))
    buf_fe = np.empty((max_ticks, 3))
    buf_fc = np.empty((max_ticks, 3))
    buf_k = np.empty((max_ticks, 3))
    buf_phase = np.empty(max_ticks, dtype=np.int8)
    buf_c = np.empty(max_ticks, dtype=np.int8)
    buf_dist = np.empty(max_ticks, dtype=np.int8)

    chunk: ActionChunk | None = None
    cmd: ControllerCommand | None = None
    phase_idx = 0
    gripper = demo.grippers[0]
    over = 0
    safety_stopped = False
    end = 0
    peak_force = 0.0
    is_board = isinstance(env, PlaneBoard)
    is_door = isinstance(env, HingedDoor)
    normal_hat = env.spring.surface_normal if is_board else None

    for k in range(max_ticks):
        t = k * dt
        if k % TICKS_PER_STEP == 0:
            p = k // TICKS_PER_STEP
            if p >= n_demo + settle_steps:
                break
            if p < n_demo:
                if p % cfg.chunk_horizon == 0:
                    obs = Observation(pose10_encode(state.pose(), gripper), p)
                    chunk = predict(obs, demo.tuples, noise, cfg.chunk_horizon)
                tup = chunk[p % cfg.chunk_horizon]
                pose_cmd, gripper = tup.decode_pose()
                cmd = ControllerCommand(pose_cmd.position, pose_cmd.orientation,
                                        gripper, tup.normal, tup.contact)
                phase_idx = demo.phases[p].label.value
            # Past the demo: hold the last command through the settle tail.
        extra_force, dist_active = apply_disturbances(env, cfg.disturbances, t)
        if is_board:
            normal_hat = env.spring.surface_normal
        if is_door:
            env.update(state.x_r, cmd.gripper)
        wrench = env.external_wrench(state.pose(), state.v_r)
        raw_force = wrench.force + extra_force
        res = controller_tick(state, cmd, WrenchSample(raw_force, wrench.torque), dt, adm)
        state = res.state
        if is_board:
            fn = float(raw_force @ normal_hat)
            if fn > 0.0:
                update_ink(env, state.pose(), True, fn)
        buf_t[k] = t
        buf_x[k] = state.x_r
        buf_v[k] = state.v_r
        buf_fe[k] = res.f_ext
        buf_fc[k] = res.f_cmd
        buf_k[k] = res.stiffness_eigs
        buf_phase[k] = phase_idx
        buf_c[k] = cmd.c
        buf_dist[k] = 1 if dist_active else 0
        end = k + 1
        f_mag = float(np.linalg.norm(res.f_ext))
        peak_force = max(peak_force, f_mag)
        over = over + 1 if f_mag > cfg.safety_limit else 0
        if over > debounce_ticks:
            safety_stopped = True
            break

    metrics = _final_metrics(cfg.task, env, state, peak_force)
    log = RunLog(buf_t[:end], buf_x[:end], buf_v[:end], buf_fe[:end], buf_fc[:end],
                 buf_k[:end], buf_phase[:end], buf_c[:end], buf_dist[:end],
                 metrics, False, safety_stopped)
    log.success = success_check(cfg.task, log)
    log.metrics["success"] = log.success
    if not np.isfinite(log.x_r).all():
        raise NonFiniteState("episode produced a non-finite trajectory")
    return log


def _final_metrics(task: str, env, state: ControllerState, peak_force: float) -> dict:
    from .environments import insertion_depth, opening_angle, remaining_ink_length
    metrics = {
        "peak_force_n": peak_force,
        "remaining_ink_cm": float("nan"),
        "insertion_depth_mm": float("nan"),
        "opening_angle_deg": float("nan"),
    }
    if task == "WW":
        metrics["remaining_ink_cm"] = remaining_ink_length(env)
    elif task == "PH":
        metrics["insertion_depth_mm"] = insertion_depth(env, state.pose())
    else:
        metrics["opening_angle_deg"] = opening_angle(env)
    return metrics


# --------------------------------------------------------------------------
# Batch evaluation
# --------------------------------------------------------------------------

@dataclass
class SuiteRow:
    mode: str
    disturbed: bool
    episodes: int
    success_rate: float
    safety_stop_rate: float
    mean_remaining_ink_cm: float
    mean_insertion_depth_mm: float
    mean_opening_angle_deg: float
    mean_peak_force_n: float


def run_suite(cfgs: list[ScenarioConfig]) -> list[SuiteRow]:
    """Sequential episode batch aggregated by (mode, disturbed)."""
    groups: dict = {}
    order: list = []
    for cfg in cfgs:
        key = (cfg.mode, bool(cfg.disturbances))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(run_episode(cfg))
    rows = []
    for mode, disturbed in order:
        logs = groups[(mode, disturbed)]
        rows.append(SuiteRow(
            mode=mode,
            disturbed=disturbed,
            episodes=len(logs),
            success_rate=float(np.mean([1.0 if lg.success else 0.0 for lg in logs])),
            safety_stop_rate=float(np.mean([1.0 if lg.safety_stopped else 0.0 for lg in logs])),
            mean_remaining_ink_cm=_nanmean([lg.metrics["remaining_ink_cm"] for lg in logs]),
            mean_insertion_depth_mm=_nanmean([lg.metrics["insertion_depth_mm"] for lg in logs]),
            mean_opening_angle_deg=_nanmean([lg.metrics["opening_angle_deg"] for lg in logs]),
            mean_peak_force_n=_nanmean([lg.metrics["peak_force_n"] for lg in logs]),
        ))
    return rows


def _nanmean(values) -> float:
    arr = np.asarray(values, dtype=float)
    if np.isnan(arr).all():
        return float("nan")
    return float(np.nanmean(arr))


def default_disturbance(task: str) -> tuple:
    """The scripted disturbance used in disturbed suite runs."""
    if task == "WW":
        return (DisturbanceEvent("raise", start=5.0, duration=10.0, magnitude=0.07,
                                 direction=np.array([0.0, 0.0, 1.0]), ramp=0.5),)
    if task == "PH":
        return (DisturbanceEvent("shift", start=3.0, duration=5.0, magnitude=0.01,
                                 direction=np.array([1.0, 0.0, 0.0]), ramp=0.5),)
    return (DisturbanceEvent("force_pulse", start=6.0, duration=2.0, magnitude=10.0,
                             direction=np.array([0.0, 1.0, 0.0]), ramp=0.3),)
