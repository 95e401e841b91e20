"""SO(3)/SE(3) math kernel: hat/vex maps, exponentials, adjoints, principal angle.

Conventions: rotations are 3x3 matrices taking body-frame vectors to the
environment frame; a pose (R, b) acts on points as p -> R p + b; twists stack
angular velocity first, xi = (omega, nu), both expressed in the body frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSkew

# Below this rotation-vector norm the sin/cos coefficient ratios switch to
# 4th-order Taylor series to avoid 0/0.
SMALL_ANGLE = 1e-6

# Absolute skew-symmetry tolerance for vex(); inputs come from differences of
# products of unit-scale matrices.
VEX_TOL = 1e-8


def hat(v: np.ndarray) -> np.ndarray:
    """Skew matrix of a 3-vector, hat(v) @ w == cross(v, w)."""
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product of 3-vectors (faster than np.cross for single vectors)."""
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def vex(S: np.ndarray, tol: float = VEX_TOL) -> np.ndarray:
    """Inverse of hat(); raises NotSkew if S is not skew within tol."""
    S = np.asarray(S, dtype=float)
    residual = np.max(np.abs(S + S.T))
    if residual > tol:
        raise NotSkew(f"symmetry residual {residual:.3e} exceeds {tol:.3e}")
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def _rodrigues_coeffs(theta: float) -> tuple[float, float, float]:
    # a = sin(t)/t, b = (1-cos(t))/t^2, c = (t-sin(t))/t^3
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
        c = (theta - np.sin(theta)) / (theta * theta * theta)
    return a, b, c


def exp_so3(v: np.ndarray) -> np.ndarray:
    """Rotation matrix exponential of a rotation vector (Rodrigues formula)."""
    v = np.asarray(v, dtype=float).reshape(3)
    theta = float(np.sqrt(v @ v))
    a, b, _ = _rodrigues_coeffs(theta)
    K = hat(v)
    return np.eye(3) + a * K + b * (K @ K)


def left_jacobian_so3(v: np.ndarray) -> np.ndarray:
    """Left Jacobian of SO(3): d/dt exp((v + t*d)^) = hat(J_l(v) d) exp(v^)."""
    v = np.asarray(v, dtype=float).reshape(3)
    theta = float(np.sqrt(v @ v))
    _, b, c = _rodrigues_coeffs(theta)
    K = hat(v)
    return np.eye(3) + b * K + c * (K @ K)


def log_so3(R: np.ndarray) -> np.ndarray:
    """Rotation vector of a rotation matrix; angle in [0, pi]."""
    R = np.asarray(R, dtype=float)
    cos_theta = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = float(np.arccos(cos_theta))
    if theta < SMALL_ANGLE:
        return vex((R - R.T) / 2.0, tol=np.inf)
    if np.pi - theta < 1e-6:
        # Axis from the dominant column of R + I (antisymmetric part vanishes).
        B = R + np.eye(3)
        col = int(np.argmax(np.diag(B)))
        axis = B[:, col] / np.linalg.norm(B[:, col])
        # Fix the sign using the off-diagonal antisymmetric remnant.
        w = vex((R - R.T) / 2.0, tol=np.inf)
        if np.dot(w, axis) < 0.0:
            axis = -axis
        return theta * axis
    return theta / (2.0 * np.sin(theta)) * vex(R - R.T, tol=np.inf)


def principal_angle(R: np.ndarray) -> float:
    """Rotation angle of R in [0, pi]."""
    return float(np.arccos(np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)))


def is_rotation(R: np.ndarray, tol: float = 1e-10) -> bool:
    """True if R is orthogonal with determinant +1 within tol."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return (
        np.max(np.abs(R.T @ R - np.eye(3))) <= tol
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


@dataclass(frozen=True)
class Twist:
    """Body-frame velocity pair (omega rad/s, nu m/s)."""

    omega: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float).reshape(3))
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float).reshape(3))

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))

    @staticmethod
    def from_array(xi: np.ndarray) -> "Twist":
        xi = np.asarray(xi, dtype=float).reshape(6)
        return Twist(xi[:3], xi[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.omega, self.nu])


@dataclass(frozen=True)
class Pose:
    """Rigid transform (rotation, position) from body frame to environment frame."""

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def compose(self, other: "Pose") -> "Pose":
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.position + self.position)

    def inverse(self) -> "Pose":
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.position)

    def apply(self, point: np.ndarray) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float).reshape(3) + self.position

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous form."""
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.position
        return M


def exp_se3(xi: Twist, dt: float = 1.0) -> Pose:
    """Closed-form SE(3) exponential of dt * xi."""
    w = dt * xi.omega
    theta = float(np.sqrt(w @ w))
    a, b, c = _rodrigues_coeffs(theta)
    K = hat(w)
    K2 = K @ K
    I = np.eye(3)
    R = I + a * K + b * K2
    V = I + b * K + c * K2
    return Pose(R, V @ (dt * xi.nu))


def adjoint(g: Pose) -> np.ndarray:
    """6x6 adjoint of a pose: [[R, 0], [hat(b) R, R]]."""
    A = np.zeros((6, 6))
    A[:3, :3] = g.rotation
    A[3:, :3] = hat(g.position) @ g.rotation
    A[3:, 3:] = g.rotation
    return A


def ad(zeta: Twist) -> np.ndarray:
    """Infinitesimal adjoint: [[hat(w), 0], [hat(v), hat(w)]]."""
    A = np.zeros((6, 6))
    W = hat(zeta.omega)
    A[:3, :3] = W
    A[3:, :3] = hat(zeta.nu)
    A[3:, 3:] = W
    return A


def ad_star(zeta: Twist) -> np.ndarray:
    """Co-adjoint, the transpose of ad()."""
    return ad(zeta).T


def dexpinv_se3(eta: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Chart velocity of eta for a body twist xi when the pose is g0 * exp(eta).

    Inverse differential of the exponential for right-multiplicative kinematics
    d/dt g = g xi^vee, truncated at the degree-2 bracket term, which is enough
    to keep 4th-order integrators built on it at full order.
    """
    A = ad(Twist.from_array(eta))
    Ax = A @ xi
    return xi + 0.5 * Ax + (1.0 / 12.0) * (A @ Ax)
