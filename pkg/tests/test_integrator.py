import math

import numpy as np
import pytest

from rabisim.core import ModelParams
from rabisim.errors import IntegrationError, ParameterError
from rabisim.integrator import DEFAULT_ATOL, DEFAULT_RTOL, OdeProblem, integrate
from rabisim.srm import exact_rhs


def decay(t, y):
    return -y


def test_exponential():
    states, stats = integrate(OdeProblem(decay, [1.0], 0.0, 1.0, rtol=1e-10, atol=1e-12))
    assert abs(states[-1, 0] - math.exp(-1)) < 1e-8
    assert stats.accepted_steps >= 1
    # first-same-as-last: eight new evaluations per step
    assert stats.rhs_evaluations >= 8 * stats.accepted_steps


def test_rotation_returns():
    states, _ = integrate(OdeProblem(lambda t, y: 1j * y, [1.0 + 0j], 0.0, 2 * math.pi,
                                     dense_output_times=np.linspace(0, 2 * math.pi, 50)))
    assert abs(states[-1, 0] - 1.0) < 1e-8
    assert np.max(np.abs(np.abs(states[:, 0]) - 1.0)) < 1e-9


def test_rwa_two_level():
    G = math.pi / 50

    # eigenbasis (|g> +- |e>)/sqrt 2 with energies +-G/2: a_+-' = -+i (G/2) a_+-
    def rhs(t, a):
        return np.array([-0.5j * G * a[0], 0.5j * G * a[1]])

    t = np.linspace(0, 300, 121)
    states, _ = integrate(OdeProblem(rhs, np.array([1, 1]) / math.sqrt(2), 0.0, 300.0, dense_output_times=t))
    pe = 0.5 * np.abs(states[:, 0] - states[:, 1]) ** 2
    np.testing.assert_allclose(pe, np.sin(G * t / 2) ** 2, atol=1e-8, rtol=0)


def fixed_step_error(h):
    # rtol = atol = 1 disables step rejection; max_step pins the step
    problem = OdeProblem(decay, [1.0], 0.0, 1.0, rtol=1.0, atol=1.0, max_step=h, first_step=h)
    states, stats = integrate(problem)
    assert stats.rejected_steps == 0
    return abs(states[-1, 0] - math.exp(-1))


def test_convergence_order():
    errors = [fixed_step_error(h) for h in (0.2, 0.1, 0.05)]
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine >= 4.0
        assert math.log2(coarse / fine) > 5.0


def test_tolerance_controls_error():
    errs = []
    for rtol in (1e-6, 1e-8, 1e-10):
        states, _ = integrate(OdeProblem(decay, [1.0], 0.0, 5.0, rtol=rtol, atol=rtol * 1e-2))
        errs.append(abs(states[-1, 0] - math.exp(-5)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-10


def test_unitary_norm_drift_long_run():
    params = ModelParams.from_pi_pulse(50.0)
    rhs, _ = exact_rhs(params)
    t = np.linspace(0, 1e4, 201)
    states, _ = integrate(OdeProblem(rhs, np.array([1, 1]) / math.sqrt(2), 0.0, 1e4, dense_output_times=t))
    drift = np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1.0)
    assert DEFAULT_RTOL == 1e-10 and DEFAULT_ATOL == 1e-12
    assert drift.max() < 1e-8


def test_sample_times_exact():
    requested = np.array([0.0, 0.1, 0.1, 1 / 3, 0.7, 2.0 ** -0.5, math.pi / 3, 1.9999999999, 2.0])
    seen = []
    out, _ = integrate(OdeProblem(decay, [1.0], 0.0, 2.0, dense_output_times=requested),
                       observer=lambda t, y: seen.append(t) or complex(y[0]))
    assert len(out) == requested.size
    assert np.array_equal(np.array(seen), requested)
    assert seen == sorted(seen)
    assert out[0] == 1.0


def test_observer_values():
    values, _ = integrate(OdeProblem(decay, [2.0], 0.0, 1.0, dense_output_times=[0.5, 1.0]),
                          observer=lambda t, y: float(y[0].real) * 10)
    assert values == pytest.approx([20 * math.exp(-0.5), 20 * math.exp(-1)], rel=1e-9)


def test_matrix_state_shape():
    a = np.array([[0.0, 1.0], [-1.0, 0.0]])
    states, _ = integrate(OdeProblem(lambda t, y: a @ y, np.eye(2), 0.0, 1.0))
    assert states.shape == (1, 2, 2)
    expected = np.array([[math.cos(1), math.sin(1)], [-math.sin(1), math.cos(1)]])
    np.testing.assert_allclose(states[0].real, expected, atol=1e-9)


def test_post_step_applied():
    calls = []

    def post(y):
        calls.append(1)
        return y

    integrate(OdeProblem(decay, [1.0], 0.0, 1.0, post_step=post))
    assert calls


def test_underflow_raises_with_stats():
    with pytest.raises(IntegrationError) as info:
        integrate(OdeProblem(lambda t, y: y * y, [1.0], 0.0, 2.0))
    assert info.value.stats is not None
    assert info.value.stats.accepted_steps > 0


@pytest.mark.parametrize("kwargs", [
    {"t1": 0.0},
    {"rtol": 0.0},
    {"atol": -1.0},
    {"dense_output_times": [0.5, 0.2]},
    {"dense_output_times": [1.5]},
    {"max_step": 0.0},
])
def test_problem_validation(kwargs):
    base = {"rhs": decay, "y0": [1.0], "t0": 0.0, "t1": 1.0}
    base.update(kwargs)
    with pytest.raises(ParameterError):
        OdeProblem(**base)


def test_deterministic():
    a, _ = integrate(OdeProblem(lambda t, y: 1j * math.cos(t) * y, [1.0], 0.0, 50.0,
                                dense_output_times=np.linspace(0, 50, 11)))
    b, _ = integrate(OdeProblem(lambda t, y: 1j * math.cos(t) * y, [1.0], 0.0, 50.0,
                                dense_output_times=np.linspace(0, 50, 11)))
    assert np.array_equal(a, b)
