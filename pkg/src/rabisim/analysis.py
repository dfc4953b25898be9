"""Post-processing of sampled trajectories: envelopes, collapse times, photon-distribution changes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .core import TimeSeries
from .errors import InputError

DEFAULT_PROMINENCE = 1e-3


@dataclass(frozen=True)
class Envelope:
    """Successive local maxima of a sampled series."""

    times: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class PhotonDelta:
    reference_dist: np.ndarray
    current_dist: np.ndarray
    delta: np.ndarray


def _series(series, column):
    if isinstance(series, TimeSeries):
        return np.asarray(series.t, dtype=float), np.asarray(series[column], dtype=float)
    t, y = series
    return np.asarray(t, dtype=float), np.asarray(y, dtype=float)


def extract_envelope(series, min_prominence: float = DEFAULT_PROMINENCE, column: str = "p_e",
                     min_distance: float | None = None) -> Envelope:
    """Local maxima whose prominence exceeds ``min_prominence``.

    Parameters
    ----------
    series : TimeSeries or (t, values)
        Sampled at eight or more points per Rabi period.
    min_prominence : float
        Peaks rising less than this above their surroundings are dropped,
        which removes the small counter-rotating ripples.
    column : str
        Column used when ``series`` is a :class:`TimeSeries`.
    min_distance : float, optional
        Minimum separation in time between retained maxima (the larger one
        wins).  Uniform sampling is assumed when this is used.

    Returns
    -------
    Envelope
        Endpoints of the series are never reported.
    """
    t, y = _series(series, column)
    if t.size < 3:
        raise InputError(f"envelope extraction needs at least 3 samples, got {t.size}")
    kwargs = {"prominence": min_prominence}
    if min_distance is not None:
        dt = float(np.median(np.diff(t)))
        kwargs["distance"] = max(1, int(round(min_distance / dt)))
    idx, _ = find_peaks(y, **kwargs)
    return Envelope(times=t[idx], values=y[idx])


def collapse_time(env: Envelope, threshold: float = 0.6) -> float | None:
    """First time the envelope falls to ``threshold``, linearly interpolated.

    Returns ``None`` (not collapsed) when no envelope point reaches the
    threshold.
    """
    values, times = env.values, env.times
    below = np.nonzero(values <= threshold)[0]
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(times[0])
    v0, v1 = values[i - 1], values[i]
    t0, t1 = times[i - 1], times[i]
    return float(t0 + (v0 - threshold) / (v0 - v1) * (t1 - t0))


def photon_delta(ref, cur) -> PhotonDelta:
    """Elementwise change ``cur - ref`` of two photon distributions on the same window."""
    ref = np.asarray(ref, dtype=float)
    cur = np.asarray(cur, dtype=float)
    if ref.shape != cur.shape:
        raise InputError(f"photon distributions live on different windows: {ref.shape} vs {cur.shape}")
    return PhotonDelta(reference_dist=ref, current_dist=cur, delta=cur - ref)


def photon_delta_at(series: TimeSeries, time: float) -> PhotonDelta:
    """Change of ``p_n`` between the first sample and the sample nearest ``time``."""
    if series.photon_dist is None:
        raise InputError("the series carries no photon distributions")
    return photon_delta(series.photon_dist[0], series.photon_dist[series.at(time)])
