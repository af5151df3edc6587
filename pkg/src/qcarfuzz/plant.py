"""Quarter-car vertical dynamics, road disturbances and RK4 integration.

State vector layout is ``[x1, x2, v1, v2]``: sprung and unsprung
displacement followed by their velocities. An actuator force acts between
the two masses (+F on the body, -F on the wheel).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .errors import NumericDivergence

STEP = 0
SINE = 1
ROAD_KINDS = {"step": STEP, "sine": SINE}


@dataclass(frozen=True)
class SuspensionParams:
    """Physical constants of the quarter car plus the actuator limit.

    Defaults are the laboratory quarter-car values (body 466.5 kg,
    wheel 49.8 kg). ``f_max = 0`` makes the suspension passive.
    """

    m1: float = 466.5
    m2: float = 49.8
    k1: float = 5700.0
    k2: float = 135000.0
    b1: float = 290.0
    b2: float = 1400.0
    f_max: float = 2000.0

    def __post_init__(self):
        for name in ("m1", "m2", "k1", "k2", "b1", "b2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not (math.isfinite(self.f_max) and self.f_max >= 0):
            raise ValueError(f"f_max must be >= 0, got {self.f_max!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.k1, self.k2, self.b1, self.b2, self.f_max])

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PlantState:
    x1: float = 0.0
    x2: float = 0.0
    v1: float = 0.0
    v2: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x1, self.x2, self.v1, self.v2)):
            raise NumericDivergence("numeric divergence: non-finite plant state")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.v1, self.v2])

    @classmethod
    def from_array(cls, arr) -> "PlantState":
        return cls(*(float(v) for v in arr))


@dataclass(frozen=True)
class RoadProfile:
    """Road displacement w(t): a step of ``amplitude`` at ``start_time`` or
    a sine ``amplitude * sin(2 pi frequency t)``."""

    kind: str = "step"
    amplitude: float = 0.1
    frequency: float = 1.0
    start_time: float = 0.0

    def __post_init__(self):
        if self.kind not in ROAD_KINDS:
            raise ValueError(f"road kind must be one of {sorted(ROAD_KINDS)}, got {self.kind!r}")
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude!r}")
        if self.kind == "sine" and not (math.isfinite(self.frequency) and self.frequency > 0):
            raise ValueError(f"frequency must be > 0 for a sine road, got {self.frequency!r}")
        if not (math.isfinite(self.start_time) and self.start_time >= 0):
            raise ValueError(f"start_time must be >= 0, got {self.start_time!r}")

    def as_array(self) -> np.ndarray:
        return np.array([float(ROAD_KINDS[self.kind]), self.amplitude, self.frequency, self.start_time])

    def __call__(self, t: float) -> tuple[float, float]:
        return road_eval(self, t)


@njit(cache=True)
def _road(road, t):
    if road[0] == STEP:
        # the jump enters through w only; w_dot is 0 everywhere, including the edge
        if t >= road[3]:
            return road[1], 0.0
        return 0.0, 0.0
    omega = 2.0 * np.pi * road[2]
    return road[1] * np.sin(omega * t), omega * road[1] * np.cos(omega * t)


@njit(cache=True)
def _derivs(p, x1, x2, v1, v2, w, w_dot, force):
    m1, m2, k1, k2, b1, b2 = p[0], p[1], p[2], p[3], p[4], p[5]
    susp = b1 * (v1 - v2) + k1 * (x1 - x2)
    a1 = (-susp + force) / m1
    a2 = (susp - b2 * (v2 - w_dot) - k2 * (x2 - w) - force) / m2
    return v1, v2, a1, a2


@njit(cache=True)
def _rk4(p, s, t, dt, force, road, out):
    """One RK4 step of ``s`` into ``out`` with the force held constant.
    Returns False if the result is not finite."""
    x1, x2, v1, v2 = s[0], s[1], s[2], s[3]
    h = 0.5 * dt
    w, wd = _road(road, t)
    k1a, k1b, k1c, k1d = _derivs(p, x1, x2, v1, v2, w, wd, force)
    w, wd = _road(road, t + h)
    k2a, k2b, k2c, k2d = _derivs(p, x1 + h * k1a, x2 + h * k1b, v1 + h * k1c, v2 + h * k1d, w, wd, force)
    k3a, k3b, k3c, k3d = _derivs(p, x1 + h * k2a, x2 + h * k2b, v1 + h * k2c, v2 + h * k2d, w, wd, force)
    w, wd = _road(road, t + dt)
    k4a, k4b, k4c, k4d = _derivs(p, x1 + dt * k3a, x2 + dt * k3b, v1 + dt * k3c, v2 + dt * k3d, w, wd, force)
    c = dt / 6.0
    out[0] = x1 + c * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
    out[1] = x2 + c * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
    out[2] = v1 + c * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
    out[3] = v2 + c * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
    return np.isfinite(out[0]) and np.isfinite(out[1]) and np.isfinite(out[2]) and np.isfinite(out[3])


def road_eval(profile: RoadProfile, t: float) -> tuple[float, float]:
    """Road displacement and velocity at time ``t >= 0``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    w, w_dot = _road(profile.as_array(), float(t))
    return float(w), float(w_dot)


def derivatives(p: SuspensionParams, s: PlantState, w: float, w_dot: float, force: float) -> np.ndarray:
    """Time derivative ``(v1, v2, a1, a2)`` of the plant state.

    ``force`` is expected to be saturated already.
    """
    values = (s.x1, s.x2, s.v1, s.v2, w, w_dot, force)
    if not all(math.isfinite(v) for v in values):
        raise NumericDivergence("numeric divergence: non-finite input to derivatives")
    return np.array(_derivs(p.as_array(), *(float(v) for v in values)))


def rk4_step(p: SuspensionParams, s: PlantState, t: float, dt: float, force: float,
             profile: RoadProfile) -> PlantState:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    out = np.empty(4)
    if not _rk4(p.as_array(), s.as_array(), float(t), float(dt), float(force), profile.as_array(), out):
        raise NumericDivergence("numeric divergence: RK4 step produced a non-finite state")
    return PlantState.from_array(out)


def state_matrix(p: SuspensionParams) -> np.ndarray:
    """Passive system matrix A with ``d/dt [x1, x2, v1, v2] = A x`` for zero road."""
    m1, m2, k1, k2, b1, b2 = p.m1, p.m2, p.k1, p.k2, p.b1, p.b2
    return np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-k1 / m1, k1 / m1, -b1 / m1, b1 / m1],
        [k1 / m2, -(k1 + k2) / m2, b1 / m2, -(b1 + b2) / m2],
    ])


def modal_frequencies(p: SuspensionParams) -> np.ndarray:
    """Natural frequencies [Hz] of the passive modes, ascending (body, wheel)."""
    eig = np.linalg.eigvals(state_matrix(p))
    freqs = np.abs(eig[eig.imag > 0]) / (2.0 * np.pi)
    return np.sort(freqs)


def mechanical_energy(p: SuspensionParams, s: PlantState | np.ndarray) -> float:
    x1, x2, v1, v2 = s.as_array() if isinstance(s, PlantState) else s
    return 0.5 * (p.m1 * v1**2 + p.m2 * v2**2 + p.k1 * (x1 - x2) ** 2 + p.k2 * x2**2)
