"""Revival timescale and collapse/revival detection on amplitude series.

Detection thresholds are relative to the t = 0 modulus so that reports are
comparable across initial amplitudes: a revival is a local maximum of
|amplitude(t)| with prominence >= ``prominence_frac`` of the initial modulus
and separation >= ``min_separation_frac`` of half the predicted revival
period; a collapse window is a contiguous region where the modulus sits
below ``collapse_frac`` of the initial value.

Classification of a trajectory:

* ``perfect_revival``   -- the modulus never drops below the collapse
                           threshold (harmonic-like storage; retrieval works
                           at any time);
* ``revivals_disappeared`` -- the state collapses and no revival peak is
                           ever detected;
* ``regular``           -- some detected peak lies within 10% of the
                           predicted half revival period;
* ``irregular``         -- peaks exist but none near the predicted time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

DEFAULT_PROMINENCE_FRAC = 0.1
DEFAULT_COLLAPSE_FRAC = 0.15
DEFAULT_MIN_SEPARATION_FRAC = 0.3
REGULARITY_WINDOW_FRAC = 0.1
MIN_SAMPLES_PER_HALF_PERIOD = 20


class SamplingError(ValueError):
    """The trajectory is sampled too coarsely for reliable peak detection."""


def revival_time(k_c: float, k_m: float) -> float:
    """Coherence revival period 2 pi / (k_c + k_m)."""
    total = k_c + k_m
    if total <= 0:
        raise ValueError(
            "no revival in the harmonic limit: k_c + k_m must be positive"
        )
    return 2.0 * math.pi / total


@dataclass
class RevivalReport:
    t_rev_predicted: float | None
    peaks: list[tuple[float, float]]
    collapse_windows: list[tuple[float, float]]
    first_revival_ratio: float
    classification: str
    prominence_threshold: float
    collapse_threshold: float
    n_peaks: int = field(init=False)

    def __post_init__(self) -> None:
        times = [t for t, _ in self.peaks]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("peak times must be strictly increasing")
        self.n_peaks = len(self.peaks)

    def to_dict(self) -> dict:
        return {
            "t_rev_predicted": self.t_rev_predicted,
            "peaks": [[t, m] for t, m in self.peaks],
            "collapse_windows": [[a, b] for a, b in self.collapse_windows],
            "first_revival_ratio": self.first_revival_ratio,
            "classification": self.classification,
            "n_peaks": self.n_peaks,
            "prominence_threshold": self.prominence_threshold,
            "collapse_threshold": self.collapse_threshold,
        }


def detect_revival_series(
    times: np.ndarray,
    modulus: np.ndarray,
    t_rev: float | None,
    prominence_frac: float = DEFAULT_PROMINENCE_FRAC,
    collapse_frac: float = DEFAULT_COLLAPSE_FRAC,
    min_separation_frac: float = DEFAULT_MIN_SEPARATION_FRAC,
) -> RevivalReport:
    """Detect collapse/revival structure in a |amplitude(t)| series.

    ``t_rev`` is the predicted revival period; pass None in the harmonic
    limit, which disables the sampling and regularity checks.
    """
    times = np.asarray(times, dtype=float)
    modulus = np.asarray(modulus, dtype=float)
    if times.shape != modulus.shape or times.ndim != 1 or times.size < 3:
        raise ValueError("times and modulus must be matching 1-d arrays (>= 3 samples)")
    dt = float(np.median(np.diff(times)))
    reference = float(modulus[0])
    prominence = prominence_frac * reference
    collapse_level = collapse_frac * reference

    distance = 1
    if t_rev is not None:
        half = 0.5 * t_rev
        if dt > half / MIN_SAMPLES_PER_HALF_PERIOD:
            raise SamplingError(
                f"sample spacing {dt:.4g} too coarse for predicted half period "
                f"{half:.4g}: need >= {MIN_SAMPLES_PER_HALF_PERIOD} samples per interval"
            )
        distance = max(1, int(round(min_separation_frac * half / dt)))

    if reference > 0:
        idx, _ = find_peaks(modulus, prominence=prominence, distance=distance)
    else:
        idx = np.array([], dtype=int)
    peaks = [(float(times[i]), float(modulus[i])) for i in idx]

    below = modulus < collapse_level
    windows: list[tuple[float, float]] = []
    start = None
    for i, flag in enumerate(below):
        if flag and start is None:
            start = times[i]
        elif not flag and start is not None:
            windows.append((float(start), float(times[i - 1])))
            start = None
    if start is not None:
        windows.append((float(start), float(times[-1])))

    ratio = peaks[0][1] / reference if peaks and reference > 0 else 0.0

    if not windows:
        classification = "perfect_revival"
    elif not peaks:
        classification = "revivals_disappeared"
    elif t_rev is not None and any(
        abs(t - 0.5 * t_rev) <= REGULARITY_WINDOW_FRAC * 0.5 * t_rev for t, _ in peaks
    ):
        classification = "regular"
    else:
        classification = "irregular"

    return RevivalReport(
        t_rev_predicted=t_rev,
        peaks=peaks,
        collapse_windows=windows,
        first_revival_ratio=float(ratio),
        classification=classification,
        prominence_threshold=float(prominence),
        collapse_threshold=float(collapse_level),
    )


def detect_revivals(traj, mode: int, t_rev: float | None, **thresholds) -> RevivalReport:
    """Run :func:`detect_revival_series` on one mode of a trajectory."""
    return detect_revival_series(
        traj.times, np.abs(traj.amplitude(mode)), t_rev, **thresholds
    )


def sweep_summary(points: list[tuple[float, RevivalReport]]) -> list[dict]:
    """Summarise per-parameter reports, ordered by parameter value."""
    rows = []
    for value, report in sorted(points, key=lambda item: item[0]):
        rows.append(
            {
                "parameter": value,
                "first_revival_ratio": report.first_revival_ratio,
                "n_peaks": report.n_peaks,
                "classification": report.classification,
            }
        )
    return rows
