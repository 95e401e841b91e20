"""Measurement synthesis: beacon visibility, relative-position, inertial-vector
and point-velocity measurements with compact-support bump noise.

Noise widths are support half-widths per vector component; every sample lies
strictly inside (-width, width), which is what bounded-noise estimators assume
(camera-style sensors cannot produce unbounded errors).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, UnknownBeacon
from .liegroups import Pose, Twist, cross3, hat


@dataclass(frozen=True)
class BeaconMap:
    """Landmarks with known environment-frame positions, keyed by unique id."""

    entries: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self):
        frozen = tuple((int(i), np.asarray(p, dtype=float).reshape(3)) for i, p in self.entries)
        ids = [i for i, _ in frozen]
        if len(set(ids)) != len(ids):
            raise ConfigError("beacon ids must be unique")
        object.__setattr__(self, "entries", frozen)
        object.__setattr__(self, "_by_id", dict(frozen))
        object.__setattr__(self, "_positions", np.array([p for _, p in frozen]))

    @property
    def ids(self) -> list[int]:
        return [i for i, _ in self.entries]

    def position(self, beacon_id: int) -> np.ndarray:
        try:
            return self._by_id[beacon_id]
        except KeyError:
            raise UnknownBeacon(f"beacon id {beacon_id} not in map") from None


def cube_vertex_map(side: float = 10.0) -> BeaconMap:
    """Eight beacons at the vertices of an origin-centered cube, ids 1..8."""
    h = side / 2.0
    corners = itertools.product((-h, h), repeat=3)
    return BeaconMap(tuple((i + 1, np.array(c)) for i, c in enumerate(corners)))


@dataclass(frozen=True)
class Camera:
    """Conic field of view: mount point and boresight in the body frame."""

    mount: np.ndarray
    boresight: np.ndarray
    half_angle: float

    def __post_init__(self):
        object.__setattr__(self, "mount", np.asarray(self.mount, dtype=float).reshape(3))
        bs = np.asarray(self.boresight, dtype=float).reshape(3)
        n = np.linalg.norm(bs)
        if abs(n - 1.0) > 1e-9:
            raise ConfigError(f"boresight must be unit norm, got |u| = {n}")
        object.__setattr__(self, "boresight", bs)
        if not 0.0 < self.half_angle < np.pi / 2.0:
            raise ConfigError(f"half angle must lie in (0, pi/2), got {self.half_angle}")


@dataclass(frozen=True)
class CameraRig:
    cameras: tuple[Camera, ...]
    # Kept by planar_rig so configs round-trip without trig noise.
    azimuths_deg: tuple[float, ...] | None = None


def planar_rig(half_angle: float, azimuths_deg=(0.0, 120.0, 240.0)) -> CameraRig:
    """Cameras at the body origin with boresights in the body x-y plane."""
    cams = []
    for az in azimuths_deg:
        a = np.radians(az)
        cams.append(Camera(np.zeros(3), np.array([np.cos(a), np.sin(a), 0.0]), half_angle))
    return CameraRig(tuple(cams), azimuths_deg=tuple(float(a) for a in azimuths_deg))


@dataclass(frozen=True)
class NoiseModel:
    """Bump-noise support half-widths (position m, point velocity m/s, gyro rad/s)."""

    bump_width: float = 0.0
    velocity_width: float | None = None
    gyro_width: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.bump_width < 0.0 or self.gyro_width < 0.0:
            raise ConfigError("noise widths must be nonnegative")
        if self.velocity_width is not None and self.velocity_width < 0.0:
            raise ConfigError("noise widths must be nonnegative")

    @property
    def vel_width(self) -> float:
        return self.bump_width if self.velocity_width is None else self.velocity_width

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def sample_bump(width: float, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Samples from the normalized bump density exp(-1/(1-(x/width)^2)) on (-width, width).

    Rejection sampling against a uniform proposal; the acceptance ratio at the
    mode is 1, so roughly 60% of proposals are kept.
    """
    if width == 0.0:
        return np.zeros(size)
    out = np.empty(size)
    filled = 0
    while filled < size:
        n = max(2 * (size - filled), 16)
        u = rng.uniform(-1.0, 1.0, n)
        accept = rng.uniform(0.0, 1.0, n) < np.exp(1.0 - 1.0 / (1.0 - u * u))
        kept = u[accept][: size - filled]
        out[filled : filled + kept.size] = kept
        filled += kept.size
    return width * out


def visible_beacons(pose: Pose, rig: CameraRig, bmap: BeaconMap) -> list[int]:
    """Ids of beacons inside at least one camera cone, ascending."""
    A = (bmap._positions - pose.position) @ pose.rotation  # body frame, one row per beacon
    seen = np.zeros(len(bmap.entries), dtype=bool)
    for cam in rig.cameras:
        rays = A - cam.mount
        norms = np.sqrt(np.sum(rays * rays, axis=1))
        ok = norms > 0.0
        seen |= ok & (rays @ cam.boresight >= norms * np.cos(cam.half_angle))
    return sorted(beacon_id for (beacon_id, _), s in zip(bmap.entries, seen) if s)


def measure_positions(pose: Pose, bmap: BeaconMap, ids, noise: NoiseModel,
                      rng: np.random.Generator) -> list[np.ndarray]:
    """Body-frame beacon positions R^T (p - b) plus componentwise bump noise."""
    out = []
    for beacon_id in ids:
        p = bmap.position(beacon_id)
        a = pose.rotation.T @ (p - pose.position)
        out.append(a + sample_bump(noise.bump_width, rng, 3))
    return out


def measure_inertial(pose: Pose, dirs, noise: NoiseModel,
                     rng: np.random.Generator) -> list[np.ndarray]:
    """Known environment-frame directions observed in the body frame."""
    return [
        pose.rotation.T @ np.asarray(d, dtype=float).reshape(3)
        + sample_bump(noise.bump_width, rng, 3)
        for d in dirs
    ]


def measure_point_velocities(pose: Pose, twist: Twist, bmap: BeaconMap, ids,
                             noise: NoiseModel, rng: np.random.Generator) -> list[np.ndarray]:
    """Apparent body-frame velocity of each observed beacon, hat(a) omega - nu."""
    out = []
    for beacon_id in ids:
        a = pose.rotation.T @ (bmap.position(beacon_id) - pose.position)
        v = cross3(a, twist.omega) - twist.nu
        out.append(v + sample_bump(noise.vel_width, rng, 3))
    return out


def measure_twist(twist: Twist, noise: NoiseModel, rng: np.random.Generator) -> Twist:
    """Directly measured body velocities, bump-noised per component."""
    return Twist(twist.omega + sample_bump(noise.gyro_width, rng, 3),
                 twist.nu + sample_bump(noise.vel_width, rng, 3))


@dataclass(frozen=True)
class MeasurementFrame:
    """All sensor outputs at one time instant.

    observed holds (beacon id, measured body-frame position, measured point
    velocity); inertial_pairs holds (environment-frame direction, its body-frame
    measurement).
    """

    t: float
    observed: tuple[tuple[int, np.ndarray, np.ndarray], ...]
    inertial_pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    gyro: np.ndarray | None = None


def write_frames(frames, path) -> None:
    """JSON-lines serialization of measurement frames for offline replay."""
    with open(path, "w") as fh:
        for f in frames:
            fh.write(json.dumps({
                "t": f.t,
                "observed": [[i, list(a), list(v)] for i, a, v in f.observed],
                "inertial": [[list(d), list(l)] for d, l in f.inertial_pairs],
                "gyro": None if f.gyro is None else list(f.gyro),
            }) + "\n")


def read_frames(path) -> list[MeasurementFrame]:
    """Inverse of write_frames."""
    frames = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        raw = json.loads(line)
        frames.append(MeasurementFrame(
            t=float(raw["t"]),
            observed=tuple((int(i), np.array(a), np.array(v))
                           for i, a, v in raw["observed"]),
            inertial_pairs=tuple((np.array(d), np.array(l))
                                 for d, l in raw["inertial"]),
            gyro=None if raw["gyro"] is None else np.array(raw["gyro"])))
    return frames


def synthesize_frame(t: float, pose: Pose, twist: Twist, bmap: BeaconMap,
                     rig: CameraRig, dirs, noise: NoiseModel,
                     rng: np.random.Generator) -> MeasurementFrame:
    """Frame for one instant; rng draw order is fixed for reproducibility."""
    ids = visible_beacons(pose, rig, bmap)
    positions = measure_positions(pose, bmap, ids, noise, rng)
    inertial = measure_inertial(pose, dirs, noise, rng)
    velocities = measure_point_velocities(pose, twist, bmap, ids, noise, rng)
    gyro = twist.omega + sample_bump(noise.gyro_width, rng, 3)
    observed = tuple(zip(ids, positions, velocities))
    pairs = tuple((np.asarray(d, dtype=float).reshape(3), l) for d, l in zip(dirs, inertial))
    return MeasurementFrame(t=t, observed=observed, inertial_pairs=pairs, gyro=gyro)
