"""Force-aware Cartesian admittance controller.

Translational dynamics per tick:

    M x_r'' + D_eff x_r' + K_eff (x_r - x_cmd) = F_ext - F_cmd

with F_cmd = f*n during contact (normal force regulation), K_eff optionally
stiffened along the commanded tangent direction, and an analogous rotational
admittance with zero commanded torque. Discretized with semi-implicit Euler.

The per-tick evaluation order is fixed for reproducibility:
deadband -> commanded force -> effective gains -> integrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateDirection, NonFiniteState, NonPositiveParameter
from .geometry import (
    Pose,
    quat_conj,
    quat_from_rotvec,
    quat_mul,
    quat_normalize,
    quat_to_rotvec,
    tangent_direction,
)

MAX_DT = 0.01  # controller step ceiling (s); nominal operation is 1 kHz


def compute_damping(mass: float, stiffness: float, damping_ratio: float) -> float:
    """Over-damped gain d = 2*xi*sqrt(m*k)."""
    if mass <= 0.0 or stiffness <= 0.0 or damping_ratio <= 0.0:
        raise NonPositiveParameter(
            f"mass, stiffness, damping_ratio must be > 0 (got {mass}, {stiffness}, {damping_ratio})"
        )
    return 2.0 * damping_ratio * math.sqrt(mass * stiffness)


@dataclass(frozen=True)
class AdmittanceConfig:
    """Controller gains and task flags.

    Defaults follow the nominal setup: unit translational mass, stiffness 50,
    over-damped ratio 2, rotational mass 0.1 with stiffness 10, tangent scale 4,
    force/torque deadbands 2 N / 1 Nm.
    """

    mass: float = 1.0
    stiffness: float = 50.0
    damping_ratio: float = 2.0
    rot_mass: float = 0.1
    rot_stiffness: float = 10.0
    tangent_scale: float = 4.0
    enable_normal_regulation: bool = False
    enable_tangent_stiffening: bool = False
    target_force: float = 0.0  # f_H, desired normal contact force magnitude (N)
    force_deadband: float = 2.0
    torque_deadband: float = 1.0

    def __post_init__(self):
        for name in ("mass", "stiffness", "damping_ratio", "rot_mass", "rot_stiffness"):
            if getattr(self, name) <= 0.0:
                raise NonPositiveParameter(f"{name} must be > 0")
        if self.tangent_scale < 1.0:
            raise ValueError("tangent_scale must be >= 1")
        if self.target_force < 0.0 or self.force_deadband < 0.0 or self.torque_deadband < 0.0:
            raise ValueError("target_force and deadbands must be >= 0")
        object.__setattr__(self, "_damping",
                           compute_damping(self.mass, self.stiffness, self.damping_ratio))
        object.__setattr__(self, "_rot_damping",
                           compute_damping(self.rot_mass, self.rot_stiffness, self.damping_ratio))
        object.__setattr__(self, "_tangent_damping",
                           compute_damping(self.mass, self.tangent_scale * self.stiffness,
                                           self.damping_ratio))

    @property
    def damping(self) -> float:
        return self._damping

    @property
    def rot_damping(self) -> float:
        return self._rot_damping

    @property
    def tangent_damping(self) -> float:
        """Damping paired with the scaled tangent stiffness (same over-damped rule)."""
        return self._tangent_damping

    def with_flags(self, **kwargs) -> "AdmittanceConfig":
        return replace(self, **kwargs)


@dataclass
class ControllerState:
    """Compliant reference state advanced by the admittance law."""

    x_r: np.ndarray
    v_r: np.ndarray
    q_r: np.ndarray
    w_r: np.ndarray

    def __post_init__(self):
        self.x_r = np.asarray(self.x_r, dtype=float)
        self.v_r = np.asarray(self.v_r, dtype=float)
        self.q_r = quat_normalize(self.q_r)
        self.w_r = np.asarray(self.w_r, dtype=float)

    @classmethod
    def at_rest(cls, pose: Pose) -> "ControllerState":
        return cls(pose.position.copy(), np.zeros(3), pose.orientation.copy(), np.zeros(3))

    def pose(self) -> Pose:
        return Pose(self.x_r, self.q_r)


@dataclass(frozen=True)
class ControllerCommand:
    """One policy action: reference pose, gripper, normal direction, contact flag."""

    x_cmd: np.ndarray
    q_cmd: np.ndarray
    gripper: float = 0.0
    n: np.ndarray = None
    c: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x_cmd", np.asarray(self.x_cmd, dtype=float))
        object.__setattr__(self, "q_cmd", quat_normalize(self.q_cmd))
        n = np.zeros(3) if self.n is None else np.asarray(self.n, dtype=float)
        object.__setattr__(self, "n", n)
        if self.c not in (0, 1):
            raise ValueError("contact flag must be 0 or 1")
        if self.c == 1 and abs(float(np.linalg.norm(n)) - 1.0) > 1e-6:
            raise ValueError("normal direction must be unit when c=1")


@dataclass(frozen=True)
class WrenchSample:
    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float))

    @classmethod
    def zero(cls) -> "WrenchSample":
        return cls(np.zeros(3), np.zeros(3))


def _radial_deadband(v: np.ndarray, band: float) -> np.ndarray:
    """Shrink the vector magnitude by the band; zero below it."""
    if band <= 0.0:
        return np.asarray(v, dtype=float).copy()
    mag = math.sqrt(float(v @ v))
    if mag <= band:
        return np.zeros(3)
    return v * ((mag - band) / mag)


def apply_deadband(w: WrenchSample, cfg: AdmittanceConfig) -> WrenchSample:
    """Radial deadband on force and torque (models sensor-noise rejection)."""
    return WrenchSample(
        _radial_deadband(w.force, cfg.force_deadband),
        _radial_deadband(w.torque, cfg.torque_deadband),
    )


def commanded_force(cmd: ControllerCommand, st: ControllerState, cfg: AdmittanceConfig) -> np.ndarray:
    """F_cmd = f*n with f = f_H + n.K(x_cmd - x_r) + n.D x_r'; zero out of contact.

    K and D here are the base isotropic gains: any tangent-stiffening rank-1
    term is orthogonal to n and cannot contribute to the n-projection.
    """
    if cmd.c == 0 or not cfg.enable_normal_regulation:
        return np.zeros(3)
    n = cmd.n
    k = cfg.stiffness
    d = cfg.damping
    f = cfg.target_force + k * float(n @ (cmd.x_cmd - st.x_r)) + d * float(n @ st.v_r)
    return f * n


def _tangent_axis(cmd: ControllerCommand, st: ControllerState, cfg: AdmittanceConfig):
    """Tangent direction for stiffening, or None when disabled/degenerate."""
    if not cfg.enable_tangent_stiffening or cmd.c == 0:
        return None
    try:
        return tangent_direction(cmd.n, cmd.x_cmd, st.x_r)
    except DegenerateDirection:
        return None  # graceful fallback to isotropic gains


def effective_gains(cmd: ControllerCommand, st: ControllerState, cfg: AdmittanceConfig):
    """(K_eff, D_eff, eigenvalues) with the tangent rank-1 update when active.

    Damping mirrors the stiffness structure: along the tangent it is recomputed
    from the scaled stiffness with the same over-damped formulation.
    """
    k = cfg.stiffness
    d = cfg.damping
    t = _tangent_axis(cmd, st, cfg)
    if t is None:
        return k * np.eye(3), d * np.eye(3), np.array([k, k, k])
    k_t = cfg.tangent_scale * k
    d_t = cfg.tangent_damping
    outer = np.outer(t, t)
    K = k * np.eye(3) + (k_t - k) * outer
    D = d * np.eye(3) + (d_t - d) * outer
    return K, D, np.array([k, k, k_t])


def effective_stiffness(cmd: ControllerCommand, st: ControllerState, cfg: AdmittanceConfig) -> np.ndarray:
    K, _, _ = effective_gains(cmd, st, cfg)
    return K


def _check_dt(dt: float):
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt must be in (0, {MAX_DT}] s, got {dt}")


def step_translation(st: ControllerState, cmd: ControllerCommand, f_ext: np.ndarray,
                     dt: float, cfg: AdmittanceConfig) -> ControllerState:
    """One semi-implicit Euler step of the translational admittance law.

    f_ext is expected to be deadbanded already.
    """
    _check_dt(dt)
    f_cmd = commanded_force(cmd, st, cfg)
    K, D, _ = effective_gains(cmd, st, cfg)
    acc = (np.asarray(f_ext, dtype=float) - f_cmd - D @ st.v_r - K @ (st.x_r - cmd.x_cmd)) / cfg.mass
    v_new = st.v_r + dt * acc
    x_new = st.x_r + dt * v_new
    if not (np.isfinite(x_new).all() and np.isfinite(v_new).all()):
        raise NonFiniteState("translational state diverged")
    return ControllerState(x_new, v_new, st.q_r, st.w_r)


def step_rotation(st: ControllerState, cmd: ControllerCommand, torque_ext: np.ndarray,
                  dt: float, cfg: AdmittanceConfig) -> ControllerState:
    """One semi-implicit Euler step of the rotational admittance law.

    Orientation error is the axis-angle of q_r * q_cmd^-1 in the world frame;
    commanded torque is zero by construction.
    """
    _check_dt(dt)
    theta_err = quat_to_rotvec(quat_mul(st.q_r, quat_conj(cmd.q_cmd)))
    d_rot = cfg.rot_damping
    acc = (np.asarray(torque_ext, dtype=float) - d_rot * st.w_r - cfg.rot_stiffness * theta_err) / cfg.rot_mass
    w_new = st.w_r + dt * acc
    q_new = quat_mul(quat_from_rotvec(w_new * dt), st.q_r)
    if not np.isfinite(w_new).all():
        raise NonFiniteState("rotational state diverged")
    return ControllerState(st.x_r, st.v_r, q_new, w_new)


@dataclass(frozen=True)
class TickResult:
    state: ControllerState
    f_ext: np.ndarray           # deadbanded external force fed to the law
    f_cmd: np.ndarray
    stiffness_eigs: np.ndarray  # eigenvalues of K_eff: (k, k, k_t) or (k, k, k)


def controller_tick(st: ControllerState, cmd: ControllerCommand, wrench: WrenchSample,
                    dt: float, cfg: AdmittanceConfig) -> TickResult:
    """One full controller tick in the fixed evaluation order.

    Equivalent to apply_deadband + step_translation + step_rotation but with
    the gains applied algebraically (the rank-1 tangent update never needs a
    materialized matrix), to keep the 1 kHz loop cheap.
    """
    _check_dt(dt)
    f_ext = _radial_deadband(wrench.force, cfg.force_deadband)
    tau_ext = _radial_deadband(wrench.torque, cfg.torque_deadband)
    f_cmd = commanded_force(cmd, st, cfg)
    k = cfg.stiffness
    d = cfg.damping
    dx = st.x_r - cmd.x_cmd
    spring = k * dx
    damp = d * st.v_r
    t_axis = _tangent_axis(cmd, st, cfg)
    if t_axis is None:
        eigs = np.array([k, k, k])
    else:
        k_t = cfg.tangent_scale * k
        d_t = cfg.tangent_damping
        spring = spring + ((k_t - k) * float(t_axis @ dx)) * t_axis
        damp = damp + ((d_t - d) * float(t_axis @ st.v_r)) * t_axis
        eigs = np.array([k, k, k_t])
    v_new = st.v_r + (dt / cfg.mass) * (f_ext - f_cmd - damp - spring)
    x_new = st.x_r + dt * v_new
    # Rotational admittance with zero commanded torque.
    theta_err = quat_to_rotvec(quat_mul(st.q_r, quat_conj(cmd.q_cmd)))
    w_new = st.w_r + (dt / cfg.rot_mass) * (
        tau_ext - cfg.rot_damping * st.w_r - cfg.rot_stiffness * theta_err)
    q_new = quat_mul(quat_from_rotvec(w_new * dt), st.q_r)
    if not (np.isfinite(x_new).all() and np.isfinite(v_new).all() and np.isfinite(w_new).all()):
        raise NonFiniteState("controller state diverged")
    return TickResult(ControllerState(x_new, v_new, q_new, w_new), f_ext, f_cmd, eigs)
