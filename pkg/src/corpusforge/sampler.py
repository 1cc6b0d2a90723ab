"""Euler-method flow sampling with classifier-free guidance.

The vector field is injected, not learned: any callable
``field(t, x, conditioned)`` returning a velocity of the same dimension
works, so the kernel can be validated on analytic fields and later drive a
model plug-in unchanged. Integration is sequential in the step index by
definition; independent integrations may run concurrently when the field
declares itself safe for it (attribute ``concurrency_safe``, assumed True).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, NonFiniteStateError

VectorField = Callable[[float, np.ndarray, bool], np.ndarray]


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 10
    guidance_scale: float = 1.0
    t_start: float = 0.0
    t_end: float = 1.0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must be > t_start")


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    t: float
    state: np.ndarray


def cfg_combine(v_cond: np.ndarray, v_uncond: np.ndarray, guidance_scale: float) -> np.ndarray:
    """Classifier-free guidance: v_uncond + scale * (v_cond - v_uncond).

    scale 1 and 0 return the conditional / unconditional branch unchanged,
    not just to save a field evaluation: the arithmetic identity does not
    hold bitwise in floating point, and downstream contracts require exact
    branch equivalence at those scales.
    """
    v_cond = np.asarray(v_cond, dtype=np.float64)
    v_uncond = np.asarray(v_uncond, dtype=np.float64)
    if v_cond.shape != v_uncond.shape:
        raise DimensionMismatchError(f"{v_cond.shape} vs {v_uncond.shape}")
    if guidance_scale == 1.0:
        return v_cond
    if guidance_scale == 0.0:
        return v_uncond
    return v_uncond + guidance_scale * (v_cond - v_uncond)


def euler_trajectory(field: VectorField, x0: Sequence[float] | np.ndarray,
                     cfg: SamplerConfig | None = None) -> list[TrajectoryPoint]:
    """Fixed-grid Euler integration, returning all states x_0 .. x_N.

    dt = (t_end - t_start) / steps; at each step the conditional and
    unconditional field evaluations are blended by cfg_combine. A non-finite
    state aborts with the offending step index.
    """
    cfg = cfg or SamplerConfig()
    x = np.asarray(x0, dtype=np.float64).copy()
    if not np.isfinite(x).all():
        raise NonFiniteStateError(0)
    dt = (cfg.t_end - cfg.t_start) / cfg.steps
    points = [TrajectoryPoint(0, cfg.t_start, x.copy())]
    for k in range(cfg.steps):
        t = cfg.t_start + k * dt
        v_cond = np.asarray(field(t, x, True), dtype=np.float64)
        if v_cond.shape != x.shape:
            raise DimensionMismatchError(
                f"field returned {v_cond.shape} for state {x.shape}")
        v_uncond = np.asarray(field(t, x, False), dtype=np.float64)
        v = cfg_combine(v_cond, v_uncond, cfg.guidance_scale)
        x = x + dt * v
        if not np.isfinite(x).all():
            raise NonFiniteStateError(k + 1)
        points.append(TrajectoryPoint(k + 1, cfg.t_start + (k + 1) * dt, x.copy()))
    return points


def euler_integrate(field: VectorField, x0: Sequence[float] | np.ndarray,
                    cfg: SamplerConfig | None = None) -> np.ndarray:
    """Final state of euler_trajectory."""
    return euler_trajectory(field, x0, cfg)[-1].state


def integrate_many(field: VectorField, starts: Iterable[Sequence[float]],
                   cfg: SamplerConfig | None = None, workers: int = 4) -> list[np.ndarray]:
    """Run independent integrations, concurrently when the field allows it.

    A field declaring ``concurrency_safe = False`` is integrated serially.
    Results keep the input order either way.
    """
    starts = list(starts)
    if workers > 1 and getattr(field, "concurrency_safe", True):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda x0: euler_integrate(field, x0, cfg), starts))
    return [euler_integrate(field, x0, cfg) for x0 in starts]


def trajectory_to_jsonl(points: Iterable[TrajectoryPoint]) -> str:
    lines = [
        json.dumps({"step": p.step, "t": p.t, "state": p.state.tolist()})
        for p in points
    ]
    return "\n".join(lines) + "\n"


# Analytic demo fields. Each takes (t, x, conditioned) like any plug-in
# field would; `conditioned` is unused because both branches coincide.

def decay_field(t: float, x: np.ndarray, conditioned: bool) -> np.ndarray:
    """v = -x; Euler on [0,1] with N steps gives (1 - 1/N)^N * x0."""
    return -x


def constant_field(t: float, x: np.ndarray, conditioned: bool) -> np.ndarray:
    """v = 1 in every component; integrates exactly regardless of step count."""
    return np.ones_like(x)


def rotation_field(t: float, x: np.ndarray, conditioned: bool) -> np.ndarray:
    """Planar rotation of the first two components; the rest decay."""
    v = -x.copy()
    if len(x) >= 2:
        v[0] = -x[1]
        v[1] = x[0]
    return v


DEMO_FIELDS: dict[str, VectorField] = {
    "decay": decay_field,
    "constant": constant_field,
    "rotation": rotation_field,
}
