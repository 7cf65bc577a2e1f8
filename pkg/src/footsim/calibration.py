"""Subject-specific pedal calibration.

A calibration recording consists of labelled centre-out-and-back pushes:
three repetitions in each of eight directions. From the concatenated
force channels we derive a 4x8 unmixing matrix with fixed-point ICA on
whitened data, identify each independent component with a DOF axis from
the segment labels, resolve sign and scale, and finally attach per-DOF
dead zones and velocity gains.

The resulting :class:`CalibrationMap` applies as ``u = W @ f`` on raw
(uncentred) force frames; the calibration profiles are symmetric per
axis, so the channel means are negligible at run time and small
residual offsets are absorbed by the dead zone.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import N_CHANNELS, N_DOF, ForceFrame

AXIS_NAMES = ("x", "y", "z", "theta")


class CalibrationError(Exception):
    """Raised for invalid datasets or a failed ICA solve."""


class DirectionLabel(str, enum.Enum):
    """The eight calibration push directions.

    Axis table: F/B -> +/-x, L/R -> +/-y, TD/TU -> +/-z (toe down is +z),
    LT/RT -> +/-theta (left torsion is anticlockwise, hence positive).
    """

    F = "F"
    B = "B"
    L = "L"
    R = "R"
    TU = "TU"
    TD = "TD"
    LT = "LT"
    RT = "RT"

    @property
    def axis(self) -> int:
        return _LABEL_AXIS[self][0]

    @property
    def sign(self) -> float:
        return _LABEL_AXIS[self][1]


_LABEL_AXIS: dict[DirectionLabel, tuple[int, float]] = {
    DirectionLabel.F: (0, 1.0),
    DirectionLabel.B: (0, -1.0),
    DirectionLabel.L: (1, 1.0),
    DirectionLabel.R: (1, -1.0),
    DirectionLabel.TD: (2, 1.0),
    DirectionLabel.TU: (2, -1.0),
    DirectionLabel.LT: (3, 1.0),
    DirectionLabel.RT: (3, -1.0),
}

POSITIVE_LABELS = (DirectionLabel.F, DirectionLabel.L, DirectionLabel.TD, DirectionLabel.LT)
NEGATIVE_LABELS = (DirectionLabel.B, DirectionLabel.R, DirectionLabel.TU, DirectionLabel.RT)

#: Dataset completeness thresholds: repetitions per direction, plateau
#: level relative to segment peak, and minimum plateau duration.
MIN_SEGMENTS_PER_LABEL = 3
PLATEAU_LEVEL = 0.60
PLATEAU_MIN_S = 0.80


@dataclass
class CalibrationSegment:
    """One labelled push: sample times and an (n, 8) force array."""

    label: DirectionLabel
    t: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        self.label = DirectionLabel(self.label)
        self.t = np.asarray(self.t, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        if self.f.ndim != 2 or self.f.shape[1] != N_CHANNELS:
            raise CalibrationError(f"segment force array must be (n, {N_CHANNELS})")
        if self.t.shape != (self.f.shape[0],):
            raise CalibrationError("segment t and f lengths differ")
        if not np.all(np.isfinite(self.f)) or not np.all(np.isfinite(self.t)):
            raise CalibrationError("segment contains non-finite values")
        if np.any(np.diff(self.t) <= 0):
            raise CalibrationError("segment timestamps must be strictly increasing")

    @classmethod
    def from_frames(cls, label: DirectionLabel, frames: list[ForceFrame]) -> "CalibrationSegment":
        return cls(label, np.array([fr.t for fr in frames]), np.array([fr.f for fr in frames]))

    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.f, axis=1)

    def plateau_seconds(self) -> float:
        """Longest contiguous stretch above PLATEAU_LEVEL of the segment peak."""
        mag = self.magnitude()
        peak = float(mag.max(initial=0.0))
        if peak <= 0.0 or len(mag) < 2:
            return 0.0
        dt = float(np.median(np.diff(self.t)))
        above = mag >= PLATEAU_LEVEL * peak
        best = run = 0
        for flag in above:
            run = run + 1 if flag else 0
            best = max(best, run)
        return best * dt


@dataclass
class CalibrationDataset:
    segments: list[CalibrationSegment]
    sample_rate: float

    def __post_init__(self):
        if not self.segments:
            raise CalibrationError("calibration dataset is empty")
        if self.sample_rate <= 0:
            raise CalibrationError("sample_rate must be positive")

    def by_label(self) -> dict[DirectionLabel, list[CalibrationSegment]]:
        out: dict[DirectionLabel, list[CalibrationSegment]] = {lab: [] for lab in DirectionLabel}
        for seg in self.segments:
            out[seg.label].append(seg)
        return out


@dataclass
class ValidationReport:
    """Per-label completeness check of a calibration dataset."""

    complete: bool
    counts: dict[str, int]
    missing: list[str]
    short_hold: list[dict]

    def summary(self) -> str:
        if self.complete:
            return "dataset complete: 3+ well-held segments per direction"
        parts = []
        if self.missing:
            parts.append("missing/underfilled: " + ", ".join(self.missing))
        if self.short_hold:
            labels = ", ".join(f"{d['label']}#{d['index']}" for d in self.short_hold)
            parts.append("short hold: " + labels)
        return "dataset incomplete: " + "; ".join(parts)


def validate_dataset(ds: CalibrationDataset) -> ValidationReport:
    """Check the dataset covers every direction with well-held pushes.

    A segment counts as well-held when its force magnitude stays above
    60% of the segment peak for at least 0.8 s. The dataset is complete
    when every one of the eight directions has at least three such
    segments.
    """
    counts: dict[str, int] = {}
    short_hold: list[dict] = []
    for label, segs in ds.by_label().items():
        ok = 0
        for idx, seg in enumerate(segs):
            plateau = seg.plateau_seconds()
            if plateau >= PLATEAU_MIN_S:
                ok += 1
            else:
                short_hold.append(
                    {"label": label.value, "index": idx, "plateau_s": round(plateau, 3)}
                )
        counts[label.value] = ok
    missing = [lab.value for lab in DirectionLabel if counts[lab.value] < MIN_SEGMENTS_PER_LABEL]
    return ValidationReport(
        complete=not missing, counts=counts, missing=missing, short_hold=short_hold
    )


@dataclass(frozen=True)
class IcaConfig:
    """Fixed-point ICA settings. tanh contrast, symmetric decorrelation.

    One-direction-at-a-time calibration data admits a spurious fixed
    point (the balanced rotation of all four pushes), so the solver
    draws up to ``max_restarts`` initialisations from ``rng_seed`` and
    keeps the first solution whose component-axis assignment is
    bijective with per-axis |correlation| >= ``assignment_min_corr``.
    """

    n_components: int = N_DOF
    nonlinearity: str = "tanh"
    tolerance: float = 1e-6
    max_iterations: int = 500
    rng_seed: int = 0
    max_restarts: int = 16
    assignment_min_corr: float = 0.6

    def __post_init__(self):
        if self.n_components != N_DOF:
            raise CalibrationError(f"n_components must be {N_DOF}")
        if self.nonlinearity != "tanh":
            raise CalibrationError("only the tanh contrast is supported")
        if self.tolerance <= 0:
            raise CalibrationError("tolerance must be positive")
        if self.max_restarts < 1:
            raise CalibrationError("max_restarts must be at least 1")


@dataclass
class CalibrationMap:
    """4x8 force-to-activation map with per-DOF dead zones and gains.

    Row i of ``w`` maps a raw force frame to the unscaled activation of
    axis i; rows are scaled so the median calibration peak activation
    is 1.0. ``dead_zone`` is in activation units, ``gain`` in (mm/s or
    deg/s) per activation unit.
    """

    w: np.ndarray
    dead_zone: np.ndarray
    gain: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.dead_zone = np.asarray(self.dead_zone, dtype=float)
        self.gain = np.asarray(self.gain, dtype=float)
        if self.w.shape != (N_DOF, N_CHANNELS):
            raise CalibrationError(f"w must be {N_DOF}x{N_CHANNELS}")
        if self.dead_zone.shape != (N_DOF,) or self.gain.shape != (N_DOF,):
            raise CalibrationError("dead_zone and gain must have one entry per DOF")
        if not np.all(np.isfinite(self.w)):
            raise CalibrationError("w must be finite")
        if np.any(self.dead_zone < 0):
            raise CalibrationError("dead zones must be non-negative")
        if np.any(self.gain <= 0):
            raise CalibrationError("gains must be positive")
        if np.any(np.all(self.w == 0.0, axis=1)):
            raise CalibrationError("w has an all-zero row")

    def activation(self, f) -> np.ndarray:
        return self.w @ np.asarray(f, dtype=float)

    def to_dict(self) -> dict:
        return {
            "w": self.w.tolist(),
            "dead_zone": self.dead_zone.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationMap":
        return cls(np.array(d["w"]), np.array(d["dead_zone"]), np.array(d["gain"]))

    def checksum(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _sym_decorrelate(w: np.ndarray) -> np.ndarray:
    # W <- (W W^T)^(-1/2) W, via eigendecomposition of the (sym, PD) Gram matrix
    vals, vecs = np.linalg.eigh(w @ w.T)
    if vals.min() <= 0:
        raise CalibrationError("degenerate weight matrix during decorrelation")
    return (vecs * (1.0 / np.sqrt(vals))) @ vecs.T @ w


def _fixed_point_ica(
    z: np.ndarray, cfg: IcaConfig, rng: np.random.Generator
) -> tuple[np.ndarray, int, float]:
    """One symmetric fixed-point ICA run on whitened data ``z`` (4, n)."""
    n_comp, n = z.shape
    w = _sym_decorrelate(rng.standard_normal((n_comp, n_comp)))
    delta = math.inf
    for iteration in range(1, cfg.max_iterations + 1):
        y = w @ z
        g = np.tanh(y)
        g_prime = 1.0 - g * g
        w_new = (g @ z.T) / n - np.diag(g_prime.mean(axis=1)) @ w
        w_new = _sym_decorrelate(w_new)
        delta = float(np.max(np.abs(np.abs(np.sum(w_new * w, axis=1)) - 1.0)))
        w = w_new
        if delta < cfg.tolerance:
            return w, iteration, delta
    raise CalibrationError(
        f"ICA did not converge after {cfg.max_iterations} iterations "
        f"(last delta {delta:.3e}, tolerance {cfg.tolerance:.1e})"
    )


def _correlation_matrix(refs: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Pearson correlation of each axis reference with each component."""
    corr = np.zeros((N_DOF, N_DOF))
    ref_c = refs - refs.mean(axis=1, keepdims=True)
    src_c = sources - sources.mean(axis=1, keepdims=True)
    ref_sd = refs.std(axis=1)
    src_sd = sources.std(axis=1)
    for a in range(N_DOF):
        for c in range(N_DOF):
            denom = ref_sd[a] * src_sd[c]
            corr[a, c] = 0.0 if denom == 0 else float(np.mean(ref_c[a] * src_c[c]) / denom)
    return corr


def _axis_references(ds: CalibrationDataset) -> np.ndarray:
    """Per-axis reference signals over the concatenated sample timeline.

    +1 during positive-direction segments of the axis, -1 during
    negative ones, 0 elsewhere.
    """
    lengths = [seg.f.shape[0] for seg in ds.segments]
    total = sum(lengths)
    refs = np.zeros((N_DOF, total))
    offset = 0
    for seg, n in zip(ds.segments, lengths):
        refs[seg.label.axis, offset : offset + n] = seg.label.sign
        offset += n
    return refs


def solve_ica(ds: CalibrationDataset, cfg: IcaConfig | None = None) -> CalibrationMap:
    """Derive the 4x8 unmixing matrix from a complete calibration dataset.

    Pipeline: concatenate segments, centre channels, whiten to four
    principal components, run symmetric fixed-point ICA (tanh contrast,
    seeded initialisation), assign components to DOF axes by maximal
    |correlation| with the labelled reference signals, flip signs so the
    correlations are positive, and scale each row so the median peak
    activation over that axis's segments is 1.0.

    Returns a map with zero dead zones and unit gains; see
    :func:`derive_deadzones_gains`.
    """
    cfg = cfg or IcaConfig()
    report = validate_dataset(ds)
    if not report.complete:
        raise CalibrationError(report.summary())

    x = np.concatenate([seg.f for seg in ds.segments], axis=0)
    mean = x.mean(axis=0)
    xc = x - mean
    n = xc.shape[0]

    cov = (xc.T @ xc) / n
    vals, vecs = np.linalg.eigh(cov)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    kept = vals[:N_DOF]
    if kept.min() <= 1e-12 * max(kept.max(), 1e-30):
        raise CalibrationError("calibration data spans fewer than 4 directions")
    whiten = (vecs[:, :N_DOF] / np.sqrt(kept)).T  # (4, 8)
    z = whiten @ xc.T

    refs = _axis_references(ds)
    rng = np.random.default_rng(cfg.rng_seed)
    attempts: list[str] = []
    w_full = None
    best = axis_corr = corr = None
    iterations = 0
    delta = math.nan
    for attempt in range(cfg.max_restarts):
        try:
            w_ica, iterations, delta = _fixed_point_ica(z, cfg, rng)
        except CalibrationError as exc:
            attempts.append(f"restart {attempt}: {exc}")
            continue
        cand = w_ica @ whiten  # (4, 8), applies to centred data
        sources = cand @ xc.T
        corr = _correlation_matrix(refs, sources)
        cand_best = np.argmax(np.abs(corr), axis=1)
        quality = float(np.min(np.abs(corr[np.arange(N_DOF), cand_best])))
        if len(set(cand_best.tolist())) != N_DOF:
            dupes = [
                (AXIS_NAMES[a1], AXIS_NAMES[a2])
                for a1 in range(N_DOF)
                for a2 in range(a1 + 1, N_DOF)
                if cand_best[a1] == cand_best[a2]
            ]
            names = "; ".join(f"{a} and {b}" for a, b in dupes)
            attempts.append(f"restart {attempt}: assignment not bijective: {names} share a component")
            continue
        if quality < cfg.assignment_min_corr:
            attempts.append(
                f"restart {attempt}: weakest axis correlation {quality:.3f} "
                f"below {cfg.assignment_min_corr}"
            )
            continue
        w_full, best = cand, cand_best
        axis_corr = np.abs(corr[np.arange(N_DOF), best])
        break
    if w_full is None:
        raise CalibrationError(
            "no acceptable ICA solution after "
            f"{cfg.max_restarts} restarts: " + "; ".join(attempts[-3:])
        )

    w_assigned = np.empty_like(w_full)
    for a in range(N_DOF):
        c = int(best[a])
        sign = 1.0 if corr[a, c] >= 0 else -1.0
        w_assigned[a] = sign * w_full[c]

    # Scale each row so the median peak |activation| over that axis's
    # calibration segments (raw, uncentred frames) equals 1.0.
    by_label = ds.by_label()
    for a in range(N_DOF):
        peaks = []
        for label in (POSITIVE_LABELS[a], NEGATIVE_LABELS[a]):
            for seg in by_label[label]:
                peaks.append(float(np.max(np.abs(seg.f @ w_assigned[a]))))
        med = float(np.median(peaks))
        if med <= 0:
            raise CalibrationError(f"axis {AXIS_NAMES[a]} shows no calibration activation")
        w_assigned[a] /= med

    info = {
        "iterations": iterations,
        "delta": delta,
        "axis_correlation": axis_corr.tolist(),
        "channel_mean": mean.tolist(),
        "rng_seed": cfg.rng_seed,
    }
    return CalibrationMap(
        w=w_assigned, dead_zone=np.zeros(N_DOF), gain=np.ones(N_DOF), info=info
    )


DEFAULT_DEAD_ZONE = 0.10


def derive_deadzones_gains(
    ds: CalibrationDataset,
    cmap: CalibrationMap,
    v_max: tuple[float, float, float, float] = (6.0, 6.0, 6.0, 10.0),
) -> CalibrationMap:
    """Attach dead zones and gains to a solved map.

    Dead zone is 10% of the normalised calibration peak. Gains are set
    so an activation at 90% of the calibration peak commands the axis
    speed limit: g = v_max / (0.9 - 0.1).
    """
    if len(v_max) != N_DOF or any(v <= 0 for v in v_max):
        raise CalibrationError("v_max must hold 4 positive limits")
    # Guard the precondition: rows scaled to unit median calibration peak.
    by_label = ds.by_label()
    for a in range(N_DOF):
        peaks = [
            float(np.max(np.abs(seg.f @ cmap.w[a])))
            for label in (POSITIVE_LABELS[a], NEGATIVE_LABELS[a])
            for seg in by_label[label]
        ]
        med = float(np.median(peaks))
        if not math.isclose(med, 1.0, rel_tol=1e-6):
            raise CalibrationError(
                f"axis {AXIS_NAMES[a]} median calibration peak is {med:.4f}, expected 1.0; "
                "run solve_ica on this dataset first"
            )
    dead = np.full(N_DOF, DEFAULT_DEAD_ZONE)
    gain = np.array(v_max, dtype=float) / (0.9 - DEFAULT_DEAD_ZONE)
    return CalibrationMap(w=cmap.w.copy(), dead_zone=dead, gain=gain, info=dict(cmap.info))


# --- dataset file I/O -------------------------------------------------------
#
# Calibration recordings are line-delimited JSON. Each sample line is
#   {"t": <seconds>, "label": "F"|...|"RT"|null, "f": [8 floats]}
# Lines starting with '#' and blank lines are ignored. Samples with a
# null/absent label are rest samples between pushes and are skipped.
# Consecutive samples sharing a label form one segment.


def read_dataset(path) -> CalibrationDataset:
    segments: list[CalibrationSegment] = []
    cur_label: DirectionLabel | None = None
    cur_t: list[float] = []
    cur_f: list[list[float]] = []

    def flush():
        nonlocal cur_label, cur_t, cur_f
        if cur_label is not None and cur_t:
            segments.append(CalibrationSegment(cur_label, np.array(cur_t), np.array(cur_f)))
        cur_label, cur_t, cur_f = None, [], []

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
                t = float(rec["t"])
                f = [float(v) for v in rec["f"]]
                raw_label = rec.get("label")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CalibrationError(f"{path}: line {lineno}: bad record ({exc})") from exc
            if raw_label is None:
                flush()
                continue
            label = DirectionLabel(raw_label)
            if label is not cur_label:
                flush()
                cur_label = label
            cur_t.append(t)
            cur_f.append(f)
    flush()
    if not segments:
        raise CalibrationError(f"{path}: no labelled samples")
    steps = np.concatenate([np.diff(seg.t) for seg in segments if len(seg.t) > 1])
    if steps.size == 0:
        raise CalibrationError(f"{path}: segments too short to infer sample rate")
    return CalibrationDataset(segments=segments, sample_rate=1.0 / float(np.median(steps)))


def write_dataset(ds: CalibrationDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# footsim calibration dataset (JSON lines: t, label, f[8])\n")
        for seg in ds.segments:
            for t, f in zip(seg.t, seg.f):
                rec = {"t": float(t), "label": seg.label.value, "f": [float(v) for v in f]}
                fh.write(json.dumps(rec) + "\n")
