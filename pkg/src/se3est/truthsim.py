"""Ground-truth rigid-body simulator.

Integrates body-frame Newton-Euler dynamics under an open-loop wrench profile
and keeps the pose exactly on SE(3). The applied force is expressed in the
environment frame (rotated into the body frame for the dynamics); the applied
torque is expressed in the body frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .integrate import rkmk4_step
from .liegroups import Pose, Twist, cross3

ForceFn = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class BodyParams:
    """Mass (kg) and inertia matrix (kg m^2) of the simulated body."""

    mass: float
    inertia: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float).reshape(3, 3))
        if self.mass <= 0.0:
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if np.max(np.abs(self.inertia - self.inertia.T)) > 1e-12 or np.any(
            np.linalg.eigvalsh(self.inertia) <= 0.0
        ):
            raise ConfigError("inertia must be symmetric positive definite")
        object.__setattr__(self, "inertia_inv", np.linalg.inv(self.inertia))


@dataclass(frozen=True)
class TrueState:
    pose: Pose
    twist: Twist


@dataclass(frozen=True)
class WrenchProfile:
    """Time-dependent applied force (N, environment frame) and torque (N m, body frame)."""

    force_fn: ForceFn
    torque_fn: ForceFn


def zero_wrench() -> WrenchProfile:
    zero = np.zeros(3)
    return WrenchProfile(lambda t: zero, lambda t: zero)


def oscillating_wrench() -> WrenchProfile:
    """Slowly varying force/torque profile of the default experiment."""

    def force(t: float) -> np.ndarray:
        return 1e-3 * np.array([10.0 * np.cos(0.1 * t),
                                2.0 * np.sin(0.2 * t),
                                -2.0 * np.sin(0.5 * t)])

    return WrenchProfile(force, lambda t: 1e-6 * force(t))


WRENCH_PROFILES = {"zero": zero_wrench, "oscillating": oscillating_wrench}


def make_wrench(name: str) -> WrenchProfile:
    try:
        return WRENCH_PROFILES[name]()
    except KeyError:
        raise ConfigError(f"unknown wrench profile {name!r}; "
                          f"choices: {sorted(WRENCH_PROFILES)}") from None


def step_truth(state: TrueState, params: BodyParams, wrench: WrenchProfile,
               t: float, dt: float) -> TrueState:
    """One RK4 step of the Newton-Euler dynamics with exponential pose update."""
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    J = params.inertia
    Jinv = params.inertia_inv
    m = params.mass

    def rhs(tau: float, pose: Pose, w: np.ndarray):
        omega, nu = w[:3], w[3:]
        torque = np.asarray(wrench.torque_fn(tau), dtype=float)
        force = np.asarray(wrench.force_fn(tau), dtype=float)
        omega_dot = Jinv @ (cross3(J @ omega, omega) + torque)
        nu_dot = cross3(nu, omega) + pose.rotation.T @ force / m
        return Twist(omega, nu), np.concatenate([omega_dot, nu_dot])

    pose, w = rkmk4_step(state.pose, state.twist.as_array(), rhs, t, dt)
    return TrueState(pose, Twist.from_array(w))


@dataclass(frozen=True)
class SimConfig:
    """Truth-simulation settings: step size, horizon, body, wrench, initial state."""

    dt: float
    duration: float
    body: BodyParams
    wrench: WrenchProfile
    initial: TrueState
    wrench_name: str = "oscillating"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.duration <= 0.0:
            raise ConfigError(f"duration must be positive, got {self.duration}")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


def generate_trajectory(config: SimConfig) -> list[TrueState]:
    """States at t_i = i * dt for i = 0..N, N = round(duration / dt)."""
    states = [config.initial]
    state = config.initial
    for i in range(config.n_steps):
        state = step_truth(state, config.body, config.wrench, i * config.dt, config.dt)
        states.append(state)
    return states
