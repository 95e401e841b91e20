"""Turns raw measurement frames into estimator inputs.

Produces the paired direction matrices (environment frame vs body frame) with
their weight matrix, the beacon position means, and the reconstructed body
twist for the three sensing cases (direct, gyro-aided, optical-only).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, InsufficientVectors, RankDeficient
from .liegroups import Twist, hat
from .sensors import BeaconMap, MeasurementFrame

G_RANK_TOL = 1e-6  # relative singular-value cutoff for the stacked velocity system


@dataclass(frozen=True)
class VectorSet:
    """Matched 3xn direction sets: D in the environment frame, L_m measured in
    the body frame, with an n x n positive-definite weight matrix."""

    D: np.ndarray
    L_m: np.ndarray
    W: np.ndarray


@dataclass(frozen=True)
class MeanPair:
    """Mean beacon position in the environment frame and its measured
    body-frame counterpart."""

    p_bar: np.ndarray
    a_bar_m: np.ndarray


def assemble_vector_set(frame: MeasurementFrame, bmap: BeaconMap,
                        weights: np.ndarray | None = None) -> VectorSet:
    """Builds (D, L_m, W) from beacon pair differences and inertial vectors.

    Beacon pairs are enumerated with ascending id pairs so columns are
    reproducible. When exactly two vectors are available the cross product of
    the pair is appended as a third, which keeps attitude determination
    well-posed. Raises InsufficientVectors below two vectors.
    """
    ids = [i for i, _, _ in frame.observed]
    a_m = {i: a for i, a, _ in frame.observed}
    n_pairs = len(ids) * (len(ids) - 1) // 2
    total = n_pairs + len(frame.inertial_pairs)
    if total < 2:
        raise InsufficientVectors(
            f"{total} measured vectors (need at least 2 for attitude)")

    d_cols, l_cols = [], []
    ordered = sorted(ids)
    for k, lam in enumerate(ordered):
        for ell in ordered[k + 1:]:
            d_cols.append(bmap.position(lam) - bmap.position(ell))
            l_cols.append(a_m[lam] - a_m[ell])
    for d, l in frame.inertial_pairs:
        d_cols.append(d)
        l_cols.append(l)

    if total == 2:
        d_cols.append(np.cross(d_cols[0], d_cols[1]))
        l_cols.append(np.cross(l_cols[0], l_cols[1]))

    D = np.column_stack(d_cols)
    L_m = np.column_stack(l_cols)
    n = D.shape[1]
    if weights is None:
        W = np.eye(n) / n
    else:
        w = np.asarray(weights, dtype=float)
        W = np.diag(np.full(n, float(w))) if w.ndim == 0 else np.diag(w.reshape(n))
        if np.any(np.diag(W) <= 0.0):
            raise ConfigError("weight entries must be positive")
    return VectorSet(D=D, L_m=L_m, W=W)


def mean_pair(frame: MeasurementFrame, bmap: BeaconMap) -> MeanPair:
    """Arithmetic means over the observed beacons only."""
    if not frame.observed:
        raise InsufficientVectors("no beacon observed; position is unobservable")
    p = np.mean([bmap.position(i) for i, _, _ in frame.observed], axis=0)
    a = np.mean([a_m for _, a_m, _ in frame.observed], axis=0)
    return MeanPair(p_bar=p, a_bar_m=a)


def velocity_from_gyro(omega_f: np.ndarray, points) -> Twist:
    """Twist from a measured angular rate plus observed point velocities.

    Each point gives nu = hat(a) omega - v; averaging over points suppresses
    the per-point measurement error.
    """
    omega_f = np.asarray(omega_f, dtype=float).reshape(3)
    if not points:
        raise InsufficientVectors("need at least one observed point")
    nu = np.mean([hat(a) @ omega_f - v for a, v in points], axis=0)
    return Twist(omega_f, nu)


def velocity_from_points(points, rank_tol: float = G_RANK_TOL) -> Twist:
    """Least-squares twist from observed point positions and velocities.

    Stacks v_j = [hat(a_j) -I] xi over all points and solves by pseudo-inverse.
    Raises RankDeficient when the stacked matrix cannot determine all six
    components (fewer than three points, or collinear points).
    """
    if not points:
        raise InsufficientVectors("need at least one observed point")
    G = np.vstack([np.hstack([hat(a), -np.eye(3)]) for a, _ in points])
    V = np.concatenate([np.asarray(v, dtype=float).reshape(3) for _, v in points])
    U, s, Vt = np.linalg.svd(G, full_matrices=False)
    if s.size < 6 or s[-1] < rank_tol * s[0]:
        raise RankDeficient(
            f"stacked velocity system is rank deficient "
            f"(smallest/largest singular value = {s[-1] / s[0]:.2e})"
            if s.size >= 6 else "fewer than three observed points")
    xi = Vt.T @ ((U.T @ V) / s)
    return Twist.from_array(xi)


@dataclass(frozen=True)
class FilterState:
    """Direct-form-I biquad state; a value threaded through butterworth2_step."""

    b: tuple[float, float, float]
    a: tuple[float, float]
    x1: np.ndarray | None = None
    x2: np.ndarray | None = None
    y1: np.ndarray | None = None
    y2: np.ndarray | None = None


def make_butterworth(cutoff_hz: float, dt: float) -> FilterState:
    """Second-order low-pass Butterworth via the bilinear transform.

    The cutoff is prewarped so the -3 dB point lands exactly at cutoff_hz.
    The state is primed on the first sample so there is no startup transient.
    """
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if not 0.0 < cutoff_hz < 0.5 / dt:
        raise ConfigError(
            f"cutoff {cutoff_hz} Hz must lie in (0, Nyquist = {0.5 / dt} Hz)")
    k = np.tan(np.pi * cutoff_hz * dt)
    q = np.sqrt(2.0)  # 1/Q for the Butterworth pole pair
    norm = 1.0 / (1.0 + q * k + k * k)
    b0 = k * k * norm
    a1 = 2.0 * (k * k - 1.0) * norm
    a2 = (1.0 - q * k + k * k) * norm
    # Stability: both poles of z^2 + a1 z + a2 strictly inside the unit circle.
    poles = np.roots([1.0, a1, a2])
    if np.any(np.abs(poles) >= 1.0):
        raise ConfigError(f"unstable filter for cutoff {cutoff_hz} Hz at dt {dt}")
    return FilterState(b=(b0, 2.0 * b0, b0), a=(a1, a2))


def butterworth2_step(state: FilterState, sample: np.ndarray) -> tuple[FilterState, np.ndarray]:
    """Filter one sample per component; returns the advanced state and output."""
    x = np.asarray(sample, dtype=float)
    if state.x1 is None:
        # Primed at the first sample: steady state for constant input x.
        return replace(state, x1=x, x2=x, y1=x, y2=x), x.copy()
    b0, b1, b2 = state.b
    a1, a2 = state.a
    y = b0 * x + b1 * state.x1 + b2 * state.x2 - a1 * state.y1 - a2 * state.y2
    return replace(state, x1=x, x2=state.x1, y1=y, y2=state.y1), y
