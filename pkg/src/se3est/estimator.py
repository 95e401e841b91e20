"""Variational pose-and-velocity filter on SE(3).

The filter treats estimation as a dissipative mechanical system: a weighted
vector-alignment cost (Wahba's problem) plus a quadratic position residual act
as potential energy, a quadratic form in the velocity estimation error acts as
kinetic energy, and linear dissipation drives the error to zero. Both the
continuous-time form and its first-order Lie group variational integrator
(LGVI) discretization are provided; the continuous form doubles as a reference
oracle for the discrete one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, NoConvergence
from .integrate import rkmk4_step
from .liegroups import (Pose, Twist, ad_star, adjoint, cross3, exp_se3,
                        exp_so3, hat, left_jacobian_so3, principal_angle, vex)
from .measproc import MeanPair, VectorSet
from .truthsim import TrueState


def _identity(x: float) -> float:
    return x


def _one(x: float) -> float:
    return 1.0


def _check_spd(name: str, A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float).reshape(3, 3)
    if np.max(np.abs(A - A.T)) > 1e-12 or np.any(np.linalg.eigvalsh(A) <= 0.0):
        raise ConfigError(f"{name} must be symmetric positive definite")
    return A


@dataclass(frozen=True)
class EstimatorGains:
    """Filter gains: rotational/translational kernels J and M, dissipation
    Dr and Dt, position-residual weight kappa, and the shaping function phi
    applied to the alignment cost (supplied with its derivative)."""

    J: np.ndarray
    M: np.ndarray
    Dr: np.ndarray
    Dt: np.ndarray
    kappa: float = 1.0
    phi: Callable[[float], float] = _identity
    phi_prime: Callable[[float], float] = _one

    def __post_init__(self):
        for name in ("J", "M", "Dr", "Dt"):
            object.__setattr__(self, name, _check_spd(name, getattr(self, name)))
        if self.kappa <= 0.0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")

    @property
    def Jc(self) -> np.ndarray:
        """Trace complement of J used by the implicit rotation update."""
        return 0.5 * np.trace(self.J) * np.eye(3) - self.J

    @property
    def kernel(self) -> np.ndarray:
        """Block-diagonal 6x6 kernel acting on the velocity error."""
        K = np.zeros((6, 6))
        K[:3, :3] = self.J
        K[3:, 3:] = self.M
        return K

    @property
    def dissipation(self) -> np.ndarray:
        D = np.zeros((6, 6))
        D[:3, :3] = self.Dr
        D[3:, 3:] = self.Dt
        return D


@dataclass(frozen=True)
class EstimatorState:
    """Pose estimate and velocities-estimation-error vector (omega, upsilon)."""

    g_hat: Pose
    phi_err: Twist


@dataclass(frozen=True)
class EstimatorInput:
    """Per-instant measurements: direction sets, beacon means, measured twist."""

    vecset: VectorSet
    means: MeanPair
    xi_m: Twist


def wahba_cost(R_hat: np.ndarray, vs: VectorSet) -> float:
    """Weighted alignment cost 0.5 <D - R L_m, (D - R L_m) W>, nonnegative."""
    E = vs.D - R_hat @ vs.L_m
    return 0.5 * float(np.trace(E @ vs.W @ E.T))


def wahba_gradient(R_hat: np.ndarray, vs: VectorSet) -> np.ndarray:
    """Gradient direction of the alignment cost under left perturbations.

    For every 3-vector eta, d/de wahba_cost(exp_so3(e*eta) R_hat) at e=0 equals
    -eta . wahba_gradient(R_hat).
    """
    A = vs.D @ vs.W @ vs.L_m.T @ R_hat.T
    return vex(A - A.T, tol=np.inf)


def translational_residual(g_hat: Pose, means: MeanPair) -> np.ndarray:
    """Position residual y = p_bar - R_hat a_bar_m - b_hat."""
    return means.p_bar - g_hat.rotation @ means.a_bar_m - g_hat.position


def potential_gradient(g_hat: Pose, vs: VectorSet, means: MeanPair,
                       gains: EstimatorGains) -> np.ndarray:
    """Forcing 6-vector of the total potential (rotational block on top)."""
    y = translational_residual(g_hat, means)
    top = (gains.phi_prime(wahba_cost(g_hat.rotation, vs))
           * wahba_gradient(g_hat.rotation, vs)
           + gains.kappa * hat(means.p_bar) @ y)
    return np.concatenate([top, gains.kappa * y])


def continuous_rhs(state: EstimatorState, inp: EstimatorInput,
                   gains: EstimatorGains) -> tuple[np.ndarray, Twist]:
    """Continuous-time filter: error dynamics and the pose-update twist.

    Returns (phi_dot, xi_hat) where the pose estimate evolves by
    d/dt g_hat = g_hat * xi_hat^vee.
    """
    phi = state.phi_err.as_array()
    K = gains.kernel
    Z = potential_gradient(state.g_hat, inp.vecset, inp.means, gains)
    phi_dot = np.linalg.solve(
        K, ad_star(state.phi_err) @ (K @ phi) - Z - gains.dissipation @ phi)
    xi_hat = Twist.from_array(
        inp.xi_m.as_array() - adjoint(state.g_hat.inverse()) @ phi)
    return phi_dot, xi_hat


def continuous_step(state: EstimatorState, measure: Callable[[float], EstimatorInput],
                    gains: EstimatorGains, t: float, dt: float) -> EstimatorState:
    """One RK4 step of the continuous filter, pose kept on SE(3).

    measure(t) must provide inputs at the stage times t, t + dt/2 and t + dt;
    used as the reference oracle for the discrete filter's order of accuracy.
    """

    def rhs(tau: float, g: Pose, phi: np.ndarray):
        s = EstimatorState(g, Twist.from_array(phi))
        phi_dot, xi_hat = continuous_rhs(s, measure(tau), gains)
        return xi_hat, phi_dot

    g, phi = rkmk4_step(state.g_hat, state.phi_err.as_array(), rhs, t, dt)
    return EstimatorState(g, Twist.from_array(phi))


def solve_incremental_rotation(omega: np.ndarray, gains: EstimatorGains, dt: float,
                               tol: float = 1e-10, max_iter: int = 50,
                               ) -> tuple[np.ndarray, int]:
    """Rotation F solving dt * hat(J omega) = F Jc - Jc F^T, with iteration count.

    Newton-Raphson on the rotation vector f with F = exp_so3(f), starting from
    f = dt * omega (exact to first order because hat(x) Jc + Jc hat(x) =
    hat(J x)). The Jacobian uses the identity hat(u) A + A^T hat(u) =
    hat((trace(A) I - A) u) with A = F Jc, composed with the exponential's left
    Jacobian. Jc may be singular (it is for the default gains), so the Newton
    system carries a tiny Tikhonov term. Raises NoConvergence when the residual
    stays above tol for max_iter iterations, which signals dt * omega too large
    for the gain J.
    """
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    omega = np.asarray(omega, dtype=float).reshape(3)
    Jc = gains.Jc
    target = dt * hat(gains.J @ omega)

    def residual(F: np.ndarray) -> np.ndarray:
        return target - (F @ Jc - Jc @ F.T)

    f = dt * omega
    F = exp_so3(f)
    R = residual(F)
    rnorm = np.linalg.norm(R)
    for it in range(max_iter):
        if rnorm <= tol:
            return F, it
        A = F @ Jc
        jac = -(np.trace(A) * np.eye(3) - A) @ left_jacobian_so3(f)
        rho = vex(R, tol=np.inf)
        step = np.linalg.solve(jac.T @ jac + 1e-12 * np.eye(3), -jac.T @ rho)
        # Damped update: halve the step while the residual grows.
        scale = 1.0
        for _ in range(30):
            f_new = f + scale * step
            F_new = exp_so3(f_new)
            R_new = residual(F_new)
            if np.linalg.norm(R_new) < rnorm:
                break
            scale *= 0.5
        f, F, R = f_new, F_new, R_new
        rnorm = np.linalg.norm(R)
    if rnorm <= tol:
        return F, max_iter
    raise NoConvergence(
        f"rotation update solve stalled at residual {rnorm:.3e} "
        f"(dt |omega| = {dt * np.linalg.norm(omega):.3e})")


def solve_F(omega: np.ndarray, gains: EstimatorGains, dt: float,
            tol: float = 1e-10, max_iter: int = 50) -> np.ndarray:
    """Like solve_incremental_rotation but returns only the rotation."""
    return solve_incremental_rotation(omega, gains, dt, tol, max_iter)[0]


def lgvi_step_full(state: EstimatorState, inp_i: EstimatorInput,
                   inp_ip1: EstimatorInput, gains: EstimatorGains, dt: float,
                   ) -> tuple[EstimatorState, int]:
    """One step of the discrete variational filter; also returns Newton iterations.

    Update order: the incremental rotation F from the current omega error, the
    pose-update twist and the new pose from the instant-i measurements, then
    the translational and rotational velocity errors from the instant-i+1
    measurements. The two linear solves involve M + dt Dt and J + dt Dr, which
    are positive definite for any dt > 0.
    """
    omega_i = state.phi_err.omega
    ups_i = state.phi_err.nu

    F, iters = solve_incremental_rotation(omega_i, gains, dt)
    xi_hat = Twist.from_array(
        inp_i.xi_m.as_array() - adjoint(state.g_hat.inverse()) @ state.phi_err.as_array())
    g_next = state.g_hat.compose(exp_se3(xi_hat, dt))

    R_next, b_next = g_next.rotation, g_next.position
    means, vs = inp_ip1.means, inp_ip1.vecset
    residual = b_next + R_next @ means.a_bar_m - means.p_bar  # equals -y

    ups_next = np.linalg.solve(
        gains.M + dt * gains.Dt,
        F.T @ gains.M @ ups_i + dt * gains.kappa * residual)
    omega_next = np.linalg.solve(
        gains.J + dt * gains.Dr,
        F.T @ gains.J @ omega_i
        + dt * cross3(gains.M @ ups_next, ups_next)
        + dt * gains.kappa * hat(means.p_bar) @ (b_next + R_next @ means.a_bar_m)
        - dt * gains.phi_prime(wahba_cost(R_next, vs)) * wahba_gradient(R_next, vs))
    return EstimatorState(g_next, Twist(omega_next, ups_next)), iters


def lgvi_step(state: EstimatorState, inp_i: EstimatorInput, inp_ip1: EstimatorInput,
              gains: EstimatorGains, dt: float) -> EstimatorState:
    """One step of the discrete variational filter."""
    return lgvi_step_full(state, inp_i, inp_ip1, gains, dt)[0]


def xi_hat_of(state: EstimatorState, xi_m: Twist) -> Twist:
    """Velocity estimate implied by the error state and the measured twist."""
    return Twist.from_array(
        xi_m.as_array() - adjoint(state.g_hat.inverse()) @ state.phi_err.as_array())


def total_energy(state: EstimatorState, inp: EstimatorInput,
                 gains: EstimatorGains) -> float:
    """Kinetic-plus-potential energy of the error state; the filter's Lyapunov
    candidate under perfect measurements."""
    w, u = state.phi_err.omega, state.phi_err.nu
    y = translational_residual(state.g_hat, inp.means)
    return (0.5 * float(w @ gains.J @ w) + 0.5 * float(u @ gains.M @ u)
            + gains.phi(wahba_cost(state.g_hat.rotation, inp.vecset))
            + 0.5 * gains.kappa * float(y @ y))


def error_metrics(truth: TrueState, est: EstimatorState, xi_hat: Twist,
                  ) -> tuple[float, float, float, float]:
    """(principal angle rad, position error m, omega error rad/s, nu error m/s)."""
    Q = truth.pose.rotation @ est.g_hat.rotation.T
    angle = principal_angle(Q)
    pos = float(np.linalg.norm(truth.pose.position - Q @ est.g_hat.position))
    d_omega = float(np.linalg.norm(truth.twist.omega - xi_hat.omega))
    d_nu = float(np.linalg.norm(truth.twist.nu - xi_hat.nu))
    return angle, pos, d_omega, d_nu
