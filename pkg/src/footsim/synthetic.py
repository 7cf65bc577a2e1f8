"""Synthetic pedal subjects.

A synthetic subject is a ground-truth 8x4 mixing from DOF activations to
sensor channels. It generates calibration recordings (trapezoid pushes,
three per direction) and converts desired activations into force frames,
standing in for a human foot in headless runs and recovery tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import (
    CalibrationDataset,
    CalibrationMap,
    CalibrationSegment,
    DirectionLabel,
    IcaConfig,
    derive_deadzones_gains,
    solve_ica,
)
from .core import N_CHANNELS, N_DOF, ForceFrame

LABEL_ROUND = (
    DirectionLabel.F,
    DirectionLabel.B,
    DirectionLabel.L,
    DirectionLabel.R,
    DirectionLabel.TU,
    DirectionLabel.TD,
    DirectionLabel.LT,
    DirectionLabel.RT,
)


def random_mixing(rng: np.random.Generator, cond_max: float = 10.0) -> np.ndarray:
    """Random well-conditioned 8x4 mixing (condition number <= cond_max)."""
    u, _ = np.linalg.qr(rng.standard_normal((N_CHANNELS, N_DOF)))
    v, _ = np.linalg.qr(rng.standard_normal((N_DOF, N_DOF)))
    lo = 1.0 / cond_max
    svals = rng.uniform(lo * 1.2, 1.0, size=N_DOF)
    svals[0] = 1.0  # pin the largest so the condition number is controlled
    return u @ np.diag(svals) @ v


def selection_mixing() -> np.ndarray:
    """Each DOF drives its own antagonistic sensor pair: channels (2i, 2i+1)."""
    a = np.zeros((N_CHANNELS, N_DOF))
    for i in range(N_DOF):
        a[2 * i, i] = 1.0
        a[2 * i + 1, i] = -1.0
    return a


def trapezoid_profile(fs: float, rise_s: float, hold_s: float, fall_s: float) -> np.ndarray:
    """Smooth push-hold-return profile peaking at 1.0 (cosine ramps)."""
    n_rise = max(2, round(rise_s * fs))
    n_hold = max(2, round(hold_s * fs))
    n_fall = max(2, round(fall_s * fs))
    rise = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n_rise)))
    fall = 0.5 * (1.0 + np.cos(np.linspace(0.0, np.pi, n_fall)))
    return np.concatenate([rise, np.ones(n_hold), fall])


def make_calibration_dataset(
    mixing: np.ndarray,
    fs: float = 60.0,
    noise_sigma: float = 0.0,
    rng: np.random.Generator | None = None,
    reps: int = 3,
    rise_s: float = 0.4,
    hold_s: float = 1.2,
    fall_s: float = 0.4,
    gap_s: float = 0.3,
) -> CalibrationDataset:
    """Generate a full centre-out calibration recording: reps x 8 pushes.

    Directions rotate round-robin, as in the live protocol. Forces are
    ``mixing @ s(t)`` plus optional white channel noise.
    """
    rng = rng or np.random.default_rng(0)
    mixing = np.asarray(mixing, dtype=float)
    profile = trapezoid_profile(fs, rise_s, hold_s, fall_s)
    dt = 1.0 / fs
    gap_n = max(1, round(gap_s * fs))
    segments: list[CalibrationSegment] = []
    t0 = 0.0
    for _ in range(reps):
        for label in LABEL_ROUND:
            s = np.zeros((len(profile), N_DOF))
            s[:, label.axis] = label.sign * profile
            f = s @ mixing.T
            if noise_sigma > 0:
                f = f + rng.normal(0.0, noise_sigma, size=f.shape)
            t = t0 + dt * np.arange(len(profile))
            segments.append(CalibrationSegment(label, t, f))
            t0 = t[-1] + dt * (gap_n + 1)
    return CalibrationDataset(segments=segments, sample_rate=fs)


@dataclass
class SyntheticSubject:
    """Ground-truth mixing plus the seed that generated it."""

    mixing: np.ndarray
    seed: int

    @classmethod
    def create(cls, seed: int, cond_max: float = 10.0) -> "SyntheticSubject":
        rng = np.random.default_rng(seed)
        return cls(mixing=random_mixing(rng, cond_max), seed=seed)

    def force_frame(self, t: float, activation) -> ForceFrame:
        """Force frame realising the desired activation vector (4,)."""
        f = self.mixing @ np.asarray(activation, dtype=float)
        return ForceFrame(t=t, f=tuple(float(v) for v in f))

    def dataset(self, fs: float = 60.0, noise_sigma: float = 0.01) -> CalibrationDataset:
        rng = np.random.default_rng(self.seed + 1)
        return make_calibration_dataset(self.mixing, fs=fs, noise_sigma=noise_sigma, rng=rng)

    def calibrated_map(
        self,
        v_max: tuple[float, float, float, float] = (6.0, 6.0, 6.0, 10.0),
        noise_sigma: float = 0.01,
        ica_seed: int | None = None,
    ) -> CalibrationMap:
        ds = self.dataset(noise_sigma=noise_sigma)
        cmap = solve_ica(ds, IcaConfig(rng_seed=self.seed if ica_seed is None else ica_seed))
        return derive_deadzones_gains(ds, cmap, v_max)
