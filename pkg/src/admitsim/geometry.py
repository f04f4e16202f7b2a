"""Vector, quaternion, and trajectory primitives used by the controller and planners.

Conventions:
- Vectors are float64 numpy arrays of shape (3,), SI units.
- Quaternions are wxyz arrays of shape (4,), unit norm, canonical sign w >= 0.
- The 6D rotation encoding is the first two columns of the rotation matrix,
  decoded by Gram-Schmidt orthonormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, DegenerateInput

# Degeneracy thresholds for the tangent projection: below these the commanded
# motion carries no usable tangent information and callers must fall back to
# isotropic stiffness.
EPS_POS = 1e-6
EPS_PROJ = 1e-6


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def normalized(v: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n < eps:
        raise DegenerateInput(f"cannot normalize near-zero vector (norm={n:g})")
    return np.asarray(v, dtype=float) / n


# --------------------------------------------------------------------------
# Quaternions (wxyz)
# --------------------------------------------------------------------------

def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Unit-normalize and pick the canonical sign (w >= 0)."""
    q = np.asarray(q, dtype=float)
    n = math.sqrt(float(q @ q))
    if n < 1e-12:
        raise DegenerateInput("zero quaternion")
    q = q / n
    if q[0] < 0.0:
        q = -q
    return q


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = normalized(axis)
    half = 0.5 * angle
    s = math.sin(half)
    return quat_normalize(np.array([math.cos(half), s * axis[0], s * axis[1], s * axis[2]]))


def quat_from_rotvec(w: np.ndarray) -> np.ndarray:
    """Exponential map: rotation vector (axis * angle) to quaternion."""
    w = np.asarray(w, dtype=float)
    angle = float(np.linalg.norm(w))
    if angle < 1e-12:
        return quat_identity()
    return quat_from_axis_angle(w / angle, angle)


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Log map: quaternion to rotation vector, angle in [0, pi]."""
    q = quat_normalize(q)
    s = float(np.linalg.norm(q[1:]))
    if s < 1e-12:
        return np.zeros(3)
    angle = 2.0 * math.atan2(s, float(q[0]))
    return (q[1:] / s) * angle


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = quat_normalize(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(R: np.ndarray) -> np.ndarray:
    """Rotation matrix to quaternion (Shepperd's branch method)."""
    R = np.asarray(R, dtype=float)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    return quat_normalize(q)


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


def quat_slerp(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    """Shortest-arc spherical interpolation, s in [0, 1]."""
    a = quat_normalize(a)
    b = quat_normalize(b)
    dot = float(a @ b)
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-12:
        # Nearly identical: linear blend keeps the endpoints exact.
        return quat_normalize((1.0 - s) * a + s * b)
    theta = math.acos(min(1.0, dot))
    sin_theta = math.sin(theta)
    wa = math.sin((1.0 - s) * theta) / sin_theta
    wb = math.sin(s * theta) / sin_theta
    return quat_normalize(wa * a + wb * b)


# --------------------------------------------------------------------------
# 6D rotation encoding
# --------------------------------------------------------------------------

def rot6d_encode(q: np.ndarray) -> np.ndarray:
    """First two columns of the rotation matrix, flattened column-first."""
    R = quat_to_matrix(q)
    return np.concatenate([R[:, 0], R[:, 1]])


def rot6d_decode(v6: np.ndarray) -> np.ndarray:
    """Gram-Schmidt the two encoded columns back into a quaternion.

    Raises DegenerateInput when the first column is near zero or the columns
    are parallel within 1e-6.
    """
    v6 = np.asarray(v6, dtype=float)
    a, b = v6[:3], v6[3:6]
    na = float(np.linalg.norm(a))
    if na <= 1e-6:
        raise DegenerateInput("rot6d first column near zero")
    b1 = a / na
    b2 = b - (b1 @ b) * b1
    nb = float(np.linalg.norm(b2))
    if nb <= 1e-6:
        raise DegenerateInput("rot6d columns parallel")
    b2 = b2 / nb
    b3 = np.cross(b1, b2)
    return matrix_to_quat(np.column_stack([b1, b2, b3]))


# --------------------------------------------------------------------------
# Rodrigues rotation about an arbitrary line
# --------------------------------------------------------------------------

def rodrigues_rotate(p: np.ndarray, axis: np.ndarray, pivot: np.ndarray, angle: float) -> np.ndarray:
    """Rotate point p by angle about the line through pivot along unit axis."""
    p = np.asarray(p, dtype=float)
    axis = np.asarray(axis, dtype=float)
    pivot = np.asarray(pivot, dtype=float)
    r = p - pivot
    c, s = math.cos(angle), math.sin(angle)
    rotated = r * c + np.cross(axis, r) * s + axis * float(axis @ r) * (1.0 - c)
    return pivot + rotated


# --------------------------------------------------------------------------
# Tangent projection (the force-direction split)
# --------------------------------------------------------------------------

def tangent_direction(n: np.ndarray, x_cmd: np.ndarray, x_r: np.ndarray) -> np.ndarray:
    """Unit motion direction projected onto the plane orthogonal to n.

    Raises DegenerateDirection when the commanded motion is shorter than
    EPS_POS or (after projection) parallel to n within EPS_PROJ; the caller
    is expected to fall back to isotropic stiffness.
    """
    d = np.asarray(x_cmd, dtype=float) - np.asarray(x_r, dtype=float)
    dist = float(np.linalg.norm(d))
    if dist <= EPS_POS:
        raise DegenerateDirection("commanded motion too short for a tangent")
    v = d / dist
    n = np.asarray(n, dtype=float)
    proj = v - float(n @ v) * n
    pn = float(np.linalg.norm(proj))
    if pn <= EPS_PROJ:
        raise DegenerateDirection("commanded motion parallel to the normal")
    return proj / pn


# --------------------------------------------------------------------------
# Poses and the 10-d pose/gripper encoding
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Pose:
    """End-effector position (m) and orientation (unit quaternion, wxyz)."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "orientation", quat_normalize(self.orientation))


def interpolate_pose(a: Pose, b: Pose, s: float) -> Pose:
    """Linear position blend with shortest-arc orientation slerp."""
    pos = (1.0 - s) * a.position + s * b.position
    return Pose(pos, quat_slerp(a.orientation, b.orientation, s))


POSE10_DIM = 10


def pose10_encode(pose: Pose, gripper: float) -> np.ndarray:
    """Pack (position, 6D rotation, gripper command) into a 10-vector."""
    return np.concatenate([pose.position, rot6d_encode(pose.orientation), [float(gripper)]])


def pose10_decode(v: np.ndarray) -> tuple[Pose, float]:
    v = np.asarray(v, dtype=float)
    return Pose(v[:3], rot6d_decode(v[3:9])), float(v[9])
