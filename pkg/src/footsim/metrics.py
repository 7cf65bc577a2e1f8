"""Performance measures computed from trial traces.

Implements the evaluation battery: tracking error rate (share of buzzer
time), completion time, spectral arc length smoothness for translation
and rotation speed separately, first-vs-last-trials learning summaries,
and the significance tests used to compare interfaces (Welch t-test,
one-way ANOVA).

Speed series are taken from the filtered velocity channels of the trace
rather than differentiated pose, avoiding differentiation noise; the
simulator's 10 Hz command filter bandlimits them below the spectral
cut-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import fdtrc, stdtr

from .core import TrialTrace


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class SmoothnessConfig:
    """Spectral arc length parameters.

    omega_c:
        Arc-length integration band in Hz (matches the command filter).
    zero_pad_factor:
        FFT length multiplier over the next power of two.
    amplitude_floor:
        Magnitude threshold below which spectrum points would be
        dropped; 0 keeps every point (the plain definition).
    """

    omega_c: float = 10.0
    zero_pad_factor: int = 16
    amplitude_floor: float = 0.0

    def __post_init__(self):
        if self.omega_c <= 0:
            raise MetricsError("omega_c must be positive")
        if self.zero_pad_factor < 1:
            raise MetricsError("zero_pad_factor must be at least 1")


def spectral_arc_length(speed, fs: float, cfg: SmoothnessConfig | None = None) -> float:
    """Spectral arc length of a speed profile; always <= 0.

    The magnitude spectrum (zero-padded FFT) is normalised by its value
    at zero frequency and the arc length of the curve
    (omega / omega_c, Vhat(omega)) is accumulated over [0, omega_c].
    Larger |SAL| means jerkier movement.

    Parameters
    ----------
    speed : array-like
        Non-negative speed samples, at least 2 s long.
    fs : float
        Sample rate in Hz. ``cfg.omega_c`` must not exceed fs/2.
    """
    cfg = cfg or SmoothnessConfig()
    v = np.asarray(speed, dtype=float)
    if v.ndim != 1 or len(v) < 2:
        raise MetricsError("speed must be a 1-D series")
    if len(v) / fs < 2.0:
        raise MetricsError("speed series must cover at least 2 s")
    if np.any(v < -1e-9):
        raise MetricsError("speed must be non-negative")
    if cfg.omega_c > fs / 2:
        raise MetricsError("omega_c exceeds the Nyquist rate")

    nfft = int(2 ** math.ceil(math.log2(len(v)))) * cfg.zero_pad_factor
    spectrum = np.abs(np.fft.rfft(v, nfft))
    if spectrum[0] <= 0.0:
        raise MetricsError("all-zero speed profile: spectrum normalisation undefined")
    vhat = spectrum / spectrum[0]
    freqs = np.fft.rfftfreq(nfft, 1.0 / fs)
    sel = freqs <= cfg.omega_c
    vhat = vhat[sel]
    f = freqs[sel]
    if cfg.amplitude_floor > 0.0:
        keep = vhat >= cfg.amplitude_floor
        if keep.any():
            last = np.nonzero(keep)[0][-1]
            vhat, f = vhat[: last + 1], f[: last + 1]
    return -float(np.sum(np.sqrt((np.diff(f) / cfg.omega_c) ** 2 + np.diff(vhat) ** 2)))


@dataclass(frozen=True)
class MetricsReport:
    """Per-trial measures; sal values are <= 0, jerkiness their magnitude."""

    trial_id: str
    error_rate: float
    completion_time: float
    sal_trans: float
    sal_rot: float | None

    @property
    def jerk_trans(self) -> float:
        return abs(self.sal_trans)

    @property
    def jerk_rot(self) -> float | None:
        return None if self.sal_rot is None else abs(self.sal_rot)

    def to_dict(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "error_rate": self.error_rate,
            "completion_time": self.completion_time,
            "sal_trans": self.sal_trans,
            "sal_rot": self.sal_rot,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            trial_id=d["trial_id"],
            error_rate=d["error_rate"],
            completion_time=d["completion_time"],
            sal_trans=d["sal_trans"],
            sal_rot=d["sal_rot"],
        )


def completion_time(trace: TrialTrace) -> float:
    """Seconds between leaving the start plate and reaching the end plate."""
    if not trace.completed():
        raise MetricsError("trial has no start-exit/end-entry events")
    dt = trace.t_end - trace.t_start
    if dt <= 0:
        raise MetricsError("zero-length trial rejected")
    return dt


def error_rate(trace: TrialTrace) -> float:
    """Touch time as a percentage of completion time (20 Hz buzzer record)."""
    duration = completion_time(trace)
    touch_time = sum(1 for f in trace.touch_flags if f) / trace.touch_rate
    return min(100.0, 100.0 * touch_time / duration)


def _running_samples(trace: TrialTrace):
    return [
        s for s in trace.samples
        if trace.t_start <= s.t and (trace.t_end is None or s.t <= trace.t_end)
    ]


def smoothness_pair(
    trace: TrialTrace, cfg: SmoothnessConfig | None = None
) -> tuple[float, float | None]:
    """(sal_trans, sal_rot) from the filtered velocity channels.

    Translation uses the Euclidean speed of (v_x, v_y, v_z); rotation
    uses |w_z|. A trial with no rotation at all reports sal_rot as None.
    """
    if not trace.completed():
        raise MetricsError("trial not completed")
    samples = _running_samples(trace)
    filt = np.array([s.filtered for s in samples])
    trans_speed = np.linalg.norm(filt[:, :3], axis=1)
    rot_speed = np.abs(filt[:, 3])
    sal_trans = spectral_arc_length(trans_speed, trace.sample_rate, cfg)
    sal_rot = None
    if rot_speed.max(initial=0.0) > 0.0:
        sal_rot = spectral_arc_length(rot_speed, trace.sample_rate, cfg)
    return sal_trans, sal_rot


def compute_metrics(trace: TrialTrace, cfg: SmoothnessConfig | None = None) -> MetricsReport:
    sal_trans, sal_rot = smoothness_pair(trace, cfg)
    return MetricsReport(
        trial_id=trace.trial_id,
        error_rate=error_rate(trace),
        completion_time=completion_time(trace),
        sal_trans=sal_trans,
        sal_rot=sal_rot,
    )


@dataclass(frozen=True)
class LearningEntry:
    first3: float
    last3: float
    reduction_pct: float


def learning_summary(trials: list[MetricsReport]) -> dict[str, LearningEntry]:
    """First-three vs last-three means per metric, with percent reduction."""
    if len(trials) < 6:
        raise MetricsError("learning summary needs at least 6 trials")

    def entry(values: list[float | None]) -> LearningEntry | None:
        if any(v is None for v in values):
            return None
        first = float(np.mean(values[:3]))
        last = float(np.mean(values[-3:]))
        reduction = 0.0 if first == 0 else (first - last) / first * 100.0
        return LearningEntry(first, last, reduction)

    out: dict[str, LearningEntry] = {}
    fields = {
        "error_rate": [t.error_rate for t in trials],
        "completion_time": [t.completion_time for t in trials],
        "jerk_trans": [t.jerk_trans for t in trials],
        "jerk_rot": [t.jerk_rot for t in trials],
    }
    for name, values in fields.items():
        e = entry(values)
        if e is not None:
            out[name] = e
    return out


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float


def welch_t_test(a, b) -> TTestResult:
    """Welch's unequal-variance t-test, two-sided p.

    Degenerate case: zero variance in both groups with equal means
    reports t = 0, p = 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise MetricsError("each group needs at least 2 values")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise MetricsError("groups must be finite")
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    se2 = va + vb
    if se2 == 0.0:
        if a.mean() == b.mean():
            return TTestResult(0.0, float(len(a) + len(b) - 2), 1.0)
        t = math.inf if a.mean() > b.mean() else -math.inf
        return TTestResult(t, float(len(a) + len(b) - 2), 0.0)
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    df = float(se2**2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1)))
    p = float(2.0 * stdtr(df, -abs(t)))
    return TTestResult(t, df, p)


@dataclass(frozen=True)
class AnovaResult:
    f: float
    df1: int
    df2: int
    p: float


def one_way_anova(groups) -> AnovaResult:
    """Standard between/within variance decomposition.

    All-identical data reports F = 0, p = 1.
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2 or any(len(g) < 2 for g in arrays):
        raise MetricsError("need at least 2 groups of at least 2 values")
    n_total = sum(len(g) for g in arrays)
    grand = float(np.concatenate(arrays).mean())
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in arrays)
    ss_within = sum(float(((g - g.mean()) ** 2).sum()) for g in arrays)
    df1 = len(arrays) - 1
    df2 = n_total - len(arrays)
    if ss_between == 0.0:
        return AnovaResult(0.0, df1, df2, 1.0)
    if ss_within == 0.0:
        return AnovaResult(math.inf, df1, df2, 0.0)
    f = float((ss_between / df1) / (ss_within / df2))
    return AnovaResult(f, df1, df2, float(fdtrc(df1, df2, f)))
