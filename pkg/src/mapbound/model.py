"""Problem parametrization, deterministic instance sampling and the BER metric.

Model: y = A x0 + sigma z with A (m x n) iid N(0, 1/n), z iid N(0, 1),
x0 uniform on {+-1}^n and m = round(delta n).

Randomness is counter-based. Every draw comes from a Philox stream keyed by
(seed, trial_index, stream tag), so any trial can be regenerated on any
worker without shared state. Channel columns use separate counter blocks,
which lets a caller materialize one column without drawing the others.
Normals are produced by inverse-CDF through ``q_inv``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ParameterError
from .scalar_math import q_inv

_U53 = 2.0 ** -53


@dataclass(frozen=True)
class ModelParams:
    """Large-system parameters: antenna ratio delta = m/n and noise variance."""

    delta: float
    sigma2: float

    def __post_init__(self):
        for name in ("delta", "sigma2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {v!r}")
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @classmethod
    def from_snr(cls, delta: float, snr: float) -> "ModelParams":
        return cls(delta, 1.0 / snr)

    @classmethod
    def from_snr_db(cls, delta: float, snr_db: float) -> "ModelParams":
        return cls(delta, 10.0 ** (-snr_db / 10.0))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def snr(self) -> float:
        return 1.0 / self.sigma2

    def snr_db(self) -> float:
        return 10.0 * math.log10(1.0 / self.sigma2)

    def rows(self, n: int) -> int:
        """m = round(delta * n), ties to even."""
        return int(round(self.delta * n))


class Stream(IntEnum):
    X0 = 0
    CHANNEL = 1
    NOISE = 2
    AO_G = 3
    AO_H = 4
    ORDER_STAT = 5


def stream_key(seed: int, trial_index: int, tag: Stream) -> np.ndarray:
    if trial_index < 0:
        raise ParameterError("trial_index must be nonnegative")
    ss = np.random.SeedSequence(int(seed) % 2**64, spawn_key=(int(trial_index), int(tag)))
    return ss.generate_state(2, np.uint64)


def _raw(key: np.ndarray, block: int, size: int) -> np.ndarray:
    # counter word 1 selects a block of 2**64 Philox counters, word 0 walks it
    return np.random.Philox(key=key, counter=[0, block, 0, 0]).random_raw(size)


def uniform_open(key: np.ndarray, size: int, block: int = 0) -> np.ndarray:
    """Uniforms on the open interval (0, 1) from 53-bit mantissas."""
    raw = _raw(key, block, size)
    return ((raw >> np.uint64(11)).astype(float) + 0.5) * _U53


def standard_normal(key: np.ndarray, size: int, block: int = 0) -> np.ndarray:
    if size == 0:
        return np.zeros(0)
    return q_inv(uniform_open(key, size, block))


def sample_x0(n: int, seed: int, trial_index: int) -> np.ndarray:
    raw = _raw(stream_key(seed, trial_index, Stream.X0), 0, n)
    return np.where(raw >> np.uint64(63), -1.0, 1.0)


def sample_noise(m: int, seed: int, trial_index: int) -> np.ndarray:
    return standard_normal(stream_key(seed, trial_index, Stream.NOISE), m)


def channel_column(m: int, n: int, seed: int, trial_index: int, j: int) -> np.ndarray:
    """Column j of the channel matrix, identical to ``gen_instance(...).channel[:, j]``."""
    key = stream_key(seed, trial_index, Stream.CHANNEL)
    return standard_normal(key, m, block=j) * (1.0 / math.sqrt(n))


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    m: int
    channel: np.ndarray
    x0: np.ndarray
    noise: np.ndarray
    y: np.ndarray
    sigma2: float
    seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        for name in ("channel", "x0", "noise", "y"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.channel.shape != (self.m, self.n):
            raise ParameterError("channel shape does not match (m, n)")
        if self.x0.shape != (self.n,) or self.noise.shape != (self.m,) or self.y.shape != (self.m,):
            raise ParameterError("vector lengths do not match (m, n)")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def residual_norm(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.y - self.channel @ np.asarray(x, dtype=float)))

    def to_json(self) -> str:
        """Row-major JSON layout for replaying an instance while debugging."""
        return json.dumps({
            "schema": 1,
            "n": self.n,
            "m": self.m,
            "sigma2": self.sigma2,
            "seed": self.seed,
            "trial_index": self.trial_index,
            "channel": self.channel.tolist(),
            "x0": self.x0.tolist(),
            "noise": self.noise.tolist(),
            "y": self.y.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        d = json.loads(text)
        if d.get("schema") != 1:
            raise ParameterError(f"unsupported instance schema {d.get('schema')!r}")
        channel = np.asarray(d["channel"], dtype=float).reshape(d["m"], d["n"])
        return cls(n=d["n"], m=d["m"], channel=channel, x0=d["x0"], noise=d["noise"],
                   y=d["y"], sigma2=d["sigma2"], seed=d["seed"], trial_index=d["trial_index"])


def gen_instance(params: ModelParams, n: int, seed: int, trial_index: int) -> Instance:
    """Deterministic instance for (params, n, seed, trial_index)."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    m = params.rows(n)
    if m < 1:
        raise ParameterError(f"m = round({params.delta} * {n}) is zero")
    key = stream_key(seed, trial_index, Stream.CHANNEL)
    scale = 1.0 / math.sqrt(n)
    channel = np.empty((m, n))
    for j in range(n):
        channel[:, j] = standard_normal(key, m, block=j) * scale
    x0 = sample_x0(n, seed, trial_index)
    noise = sample_noise(m, seed, trial_index)
    y = channel @ x0 + params.sigma * noise
    return Instance(n=n, m=m, channel=channel, x0=x0, noise=noise, y=y,
                    sigma2=params.sigma2, seed=int(seed), trial_index=int(trial_index))


@dataclass(frozen=True, eq=False)
class DetectionResult:
    x_hat: np.ndarray
    errors: int
    n: int

    @property
    def ber(self) -> float:
        return self.errors / self.n


def _check_pm1(x, name):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or not np.all(np.abs(arr) == 1.0):
        raise ParameterError(f"{name} must be a 1-D vector with entries +-1")
    return arr


def ber_of(x_hat, x0) -> DetectionResult:
    x_hat = _check_pm1(x_hat, "x_hat")
    x0 = _check_pm1(x0, "x0")
    if x_hat.shape != x0.shape:
        raise ParameterError(f"length mismatch: {x_hat.size} vs {x0.size}")
    return DetectionResult(x_hat=x_hat, errors=int(np.count_nonzero(x_hat != x0)), n=x0.size)
