"""4th-order Runge-Kutta stepping for states with an SE(3) pose component.

The pose is advanced in an exponential chart anchored at the step's initial
pose, so the result stays exactly on the group while retaining the classical
RK4 order. The remaining state components are integrated flat.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .liegroups import Pose, Twist, dexpinv_se3, exp_se3

# rhs(t, pose, aux) -> (body twist of the pose, time derivative of aux)
RhsFn = Callable[[float, Pose, np.ndarray], tuple[Twist, np.ndarray]]


def rkmk4_step(pose: Pose, aux: np.ndarray, rhs: RhsFn, t: float, dt: float) -> tuple[Pose, np.ndarray]:
    """Advance (pose, aux) by one step of length dt."""
    aux = np.asarray(aux, dtype=float)

    def stage(tau: float, eta: np.ndarray, aux_s: np.ndarray):
        g = pose.compose(exp_se3(Twist.from_array(eta)))
        xi, aux_dot = rhs(tau, g, aux_s)
        return dexpinv_se3(eta, xi.as_array()), np.asarray(aux_dot, dtype=float)

    zero = np.zeros(6)
    k1e, k1a = stage(t, zero, aux)
    k2e, k2a = stage(t + 0.5 * dt, 0.5 * dt * k1e, aux + 0.5 * dt * k1a)
    k3e, k3a = stage(t + 0.5 * dt, 0.5 * dt * k2e, aux + 0.5 * dt * k2a)
    k4e, k4a = stage(t + dt, dt * k3e, aux + dt * k3a)

    eta = (dt / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
    aux_next = aux + (dt / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
    return pose.compose(exp_se3(Twist.from_array(eta))), aux_next
