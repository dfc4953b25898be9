import numpy as np
import pytest

from rabisim.analysis import Envelope, collapse_time, extract_envelope, photon_delta, photon_delta_at
from rabisim.core import TimeSeries
from rabisim.errors import InputError


def damped_rabi(t, rate=1e-3, period=10.0):
    return 0.5 + 0.5 * np.exp(-rate * t) * np.cos(2 * np.pi * t / period + np.pi)


def test_envelope_finds_each_maximum():
    t = np.linspace(0, 100, 801)
    env = extract_envelope((t, damped_rabi(t)))
    np.testing.assert_allclose(env.times, np.arange(5, 100, 10), atol=0.2)
    assert np.all(np.diff(env.values) < 0)
    assert len(env) == 10


def test_envelope_ignores_small_ripple():
    t = np.linspace(0, 100, 4001)
    y = damped_rabi(t) + 1e-4 * np.sin(2 * np.pi * t / 0.5)
    assert len(extract_envelope((t, y))) == 10
    # with a distance cut the ripple is gone even at zero prominence
    assert len(extract_envelope((t, y), min_prominence=0.0, min_distance=7.5)) == 10


def test_envelope_from_time_series():
    t = np.linspace(0, 50, 401)
    series = TimeSeries(t=t, columns={"p_e": damped_rabi(t), "s_q": np.zeros_like(t)})
    assert len(extract_envelope(series)) == 5
    assert len(extract_envelope(series, column="s_q")) == 0


def test_envelope_needs_three_samples():
    with pytest.raises(InputError):
        extract_envelope((np.array([0.0, 1.0]), np.array([0.0, 1.0])))


def test_collapse_time_interpolates():
    env = Envelope(times=np.array([10.0, 20.0, 30.0]), values=np.array([0.9, 0.7, 0.5]))
    assert collapse_time(env) == pytest.approx(25.0)
    assert collapse_time(env, threshold=0.7) == pytest.approx(20.0)
    assert collapse_time(env, threshold=0.95) == 10.0


def test_collapse_time_none_when_not_collapsed():
    env = Envelope(times=np.array([10.0, 20.0]), values=np.array([0.99, 0.98]))
    assert collapse_time(env) is None
    assert collapse_time(Envelope(times=np.array([]), values=np.array([]))) is None


def test_photon_delta():
    ref = np.array([0.25, 0.5, 0.25])
    cur = np.array([0.5, 0.25, 0.25])
    d = photon_delta(ref, cur)
    np.testing.assert_array_equal(d.delta, [0.25, -0.25, 0.0])
    assert d.delta.sum() == 0.0
    with pytest.raises(InputError):
        photon_delta(ref, cur[:2])


def test_photon_delta_at():
    t = np.array([0.0, 1.0, 2.0])
    dist = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]])
    series = TimeSeries(t=t, columns={}, photon_dist=dist)
    np.testing.assert_array_equal(photon_delta_at(series, 1.9).delta, [-1.0, 1.0])
    with pytest.raises(InputError):
        photon_delta_at(TimeSeries(t=t, columns={}), 1.0)
