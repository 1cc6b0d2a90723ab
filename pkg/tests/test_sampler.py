from __future__ import annotations

import json
import math

import numpy as np
import pytest

from corpusforge.errors import DimensionMismatchError, NonFiniteStateError
from corpusforge.sampler import (
    SamplerConfig,
    cfg_combine,
    constant_field,
    decay_field,
    euler_integrate,
    euler_trajectory,
    integrate_many,
    trajectory_to_jsonl,
)


# --- cfg_combine ---

def test_scale_one_returns_conditional_exactly():
    # values chosen so v_u + (v_c - v_u) would NOT round back to v_c
    v_c = np.array([1.0])
    v_u = np.array([1e16])
    out = cfg_combine(v_c, v_u, 1.0)
    assert out[0] == v_c[0]


def test_scale_zero_returns_unconditional_exactly():
    v_c = np.array([1e16])
    v_u = np.array([1.0])
    assert cfg_combine(v_c, v_u, 0.0)[0] == v_u[0]


def test_scale_interpolates_and_extrapolates():
    np.testing.assert_array_equal(
        cfg_combine(np.array([2.0]), np.array([0.0]), 1.5), np.array([3.0]))
    np.testing.assert_array_equal(
        cfg_combine(np.array([2.0]), np.array([0.0]), 0.5), np.array([1.0]))


def test_cfg_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        cfg_combine(np.zeros(2), np.zeros(3), 1.0)


# --- Euler integration ---

def test_decay_field_matches_closed_form():
    out = euler_integrate(decay_field, [1.0], SamplerConfig(steps=10))
    assert out[0] == pytest.approx(0.9 ** 10, abs=1e-12)
    assert out[0] == pytest.approx(0.34867844, abs=1e-9)


def test_zero_field_is_fixed_point():
    def zero_field(t, x, conditioned):
        return np.zeros_like(x)

    for steps in (1, 7, 50):
        out = euler_integrate(zero_field, [2.5, -1.0], SamplerConfig(steps=steps))
        np.testing.assert_array_equal(out, [2.5, -1.0])


def test_constant_field_integrates_exactly():
    out = euler_integrate(constant_field, [0.0], SamplerConfig(steps=10))
    assert out[0] == pytest.approx(1.0, abs=1e-12)


def test_first_order_convergence_ratio():
    exact = math.exp(-1)
    err10 = abs(euler_integrate(decay_field, [1.0], SamplerConfig(steps=10))[0] - exact)
    err100 = abs(euler_integrate(decay_field, [1.0], SamplerConfig(steps=100))[0] - exact)
    assert 8.0 <= err10 / err100 <= 12.0


def test_error_decreases_with_step_count():
    exact = math.exp(-1)
    errors = [
        abs(euler_integrate(decay_field, [1.0], SamplerConfig(steps=n))[0] - exact)
        for n in (5, 10, 100)
    ]
    assert errors[0] > errors[1] > errors[2]


def test_scale_one_trajectory_bitwise_equals_conditional_only():
    def split_field(t, x, conditioned):
        return -x if conditioned else np.full_like(x, 123.0)

    def conditional_only(t, x, conditioned):
        return -x

    cfg = SamplerConfig(steps=10, guidance_scale=1.0)
    guided = euler_trajectory(split_field, [1.0, -0.5], cfg)
    plain = euler_trajectory(conditional_only, [1.0, -0.5], cfg)
    for g, p in zip(guided, plain):
        assert g.state.tobytes() == p.state.tobytes()


def test_scale_zero_trajectory_bitwise_equals_unconditional_only():
    def split_field(t, x, conditioned):
        return np.full_like(x, 123.0) if conditioned else -x

    def unconditional_only(t, x, conditioned):
        return -x

    cfg = SamplerConfig(steps=10, guidance_scale=0.0)
    guided = euler_trajectory(split_field, [1.0], cfg)
    plain = euler_trajectory(unconditional_only, [1.0], cfg)
    for g, p in zip(guided, plain):
        assert g.state.tobytes() == p.state.tobytes()


def test_linearity_in_state_for_linear_field():
    matrix = np.array([[0.0, -1.0], [1.0, 0.0]])

    def linear_field(t, x, conditioned):
        return matrix @ x

    cfg = SamplerConfig(steps=20)
    base = euler_integrate(linear_field, [1.0, 0.5], cfg)
    scaled = euler_integrate(linear_field, [3.0, 1.5], cfg)
    np.testing.assert_allclose(scaled, 3.0 * base, atol=1e-12)


def test_non_finite_state_names_step():
    def exploding(t, x, conditioned):
        with np.errstate(over="ignore"):
            return x * 1e308

    with pytest.raises(NonFiniteStateError) as err:
        euler_integrate(exploding, [1.0], SamplerConfig(steps=5))
    assert err.value.step >= 1
    with pytest.raises(NonFiniteStateError) as err:
        euler_trajectory(decay_field, [math.nan], SamplerConfig(steps=5))
    assert err.value.step == 0


def test_field_dimension_checked():
    def wrong_dim(t, x, conditioned):
        return np.zeros(len(x) + 1)

    with pytest.raises(DimensionMismatchError):
        euler_integrate(wrong_dim, [1.0], SamplerConfig(steps=2))


def test_guidance_blends_velocities():
    def split_field(t, x, conditioned):
        return np.full_like(x, 2.0) if conditioned else np.zeros_like(x)

    # gamma 0.5 -> effective v = 1.0 -> x goes 0 to 1 on [0, 1]
    out = euler_integrate(split_field, [0.0],
                          SamplerConfig(steps=10, guidance_scale=0.5))
    assert out[0] == pytest.approx(1.0, abs=1e-12)


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(steps=0)
    with pytest.raises(ValueError):
        SamplerConfig(t_start=1.0, t_end=1.0)


# --- batches and serialization ---

def test_integrate_many_matches_serial_and_orders_results():
    starts = [[float(i)] for i in range(8)]
    cfg = SamplerConfig(steps=10)
    parallel = integrate_many(decay_field, starts, cfg, workers=4)
    serial = integrate_many(decay_field, starts, cfg, workers=1)
    for p, s in zip(parallel, serial):
        assert p.tobytes() == s.tobytes()


def test_integrate_many_honors_exclusive_fields():
    calls = []

    class ExclusiveField:
        concurrency_safe = False

        def __call__(self, t, x, conditioned):
            calls.append(t)
            return -x

    outs = integrate_many(ExclusiveField(), [[1.0], [2.0]],
                          SamplerConfig(steps=3), workers=8)
    assert len(outs) == 2
    assert len(calls) == 2 * 3 * 2  # two runs, three steps, two branches


def test_trajectory_jsonl_round_trips():
    points = euler_trajectory(decay_field, [1.0], SamplerConfig(steps=3))
    lines = trajectory_to_jsonl(points).splitlines()
    assert len(lines) == 4
    first, last = json.loads(lines[0]), json.loads(lines[-1])
    assert first == {"step": 0, "t": 0.0, "state": [1.0]}
    assert last["step"] == 3
    assert last["t"] == 1.0
    assert last["state"][0] == pytest.approx((1 - 1 / 3) ** 3)
