"""Rate-curve post-processing: scans over z, smoothing, modulation analysis.

A scan evaluates Gamma(z) with either engine at fixed Keldysh factor (the
thresholds z_k = k/(1+2*gamma^2) are then equally spaced by 1/(1+2*gamma^2))
or at fixed ionization photon number n_io (gamma varies with z and the
threshold spacing becomes exactly 1).  Smoothing uses a Savitzky-Golay
filter; peaks are detected on the curve normalized by the WKB background so
that the prominence threshold is meaningful despite the exponential decay
of the rate across the scan.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.signal import find_peaks

from .adiabatic import rate_cycle_averaged
from .errors import InsufficientDataError, NumericError
from .model import from_dimensionless
from .oracle import rate_from_oracle
from .semiclassical import branched_sqrt, ionization_rate

__all__ = [
    "RateScan",
    "scan_rate",
    "savitzky_golay",
    "modulation_period",
    "wkb_background",
    "windowed_background_mean",
    "barrier_traversal_time",
    "appendix_c_demo",
    "write_scan_csv",
    "write_scan_json",
    "SCAN_SCHEMA_VERSION",
]

SCAN_SCHEMA_VERSION = 1


@dataclass
class RateScan:
    """Sampled rate curve Gamma(z) with smoothing and peak metadata."""

    mode: str                       # "fixed_gamma" | "fixed_n_io"
    fixed_value: float
    engine: str
    n_cycles: int
    z_values: np.ndarray
    gamma_param: np.ndarray         # Keldysh factor at each sample
    gamma_raw: np.ndarray           # rate samples
    gamma_smooth: np.ndarray | None
    peaks: np.ndarray               # refined peak positions in z
    peak_indices: np.ndarray
    thresholds: np.ndarray
    missing_indices: list = field(default_factory=list)
    filter_settings: dict = field(default_factory=dict)


def wkb_background(gamma, z):
    """Cycle-averaged WKB rate background 2*pi*D_avg at (gamma, z)."""
    return 2.0 * math.pi * rate_cycle_averaged(from_dimensionless(gamma, z))


def _gamma_at(mode, fixed_value, z):
    if mode == "fixed_gamma":
        return fixed_value
    return math.sqrt(fixed_value / (2.0 * z))


def _thresholds_in_range(mode, fixed_value, z_lo, z_hi):
    if mode == "fixed_gamma":
        spacing = 1.0 / (1.0 + 2.0 * fixed_value**2)
        k_lo = max(1, math.ceil(z_lo / spacing - 1e-9))
        k_hi = math.floor(z_hi / spacing + 1e-9)
        return np.array([k * spacing for k in range(k_lo, k_hi + 1)])
    # fixed n_io: k = n_io + z at threshold, so z_k = k - n_io with unit spacing
    k_lo = max(1, math.ceil(fixed_value + z_lo - 1e-9))
    k_hi = math.floor(fixed_value + z_hi + 1e-9)
    return np.array([k - fixed_value for k in range(k_lo, k_hi + 1)])


def nearest_threshold_k(mode, fixed_value, z, gamma):
    if mode == "fixed_gamma":
        return max(1, int(round(z * (1.0 + 2.0 * gamma**2))))
    return max(1, int(round(z + fixed_value)))


def scan_rate(engine, mode, fixed_value, z_values, n_cycles=1,
              include_odd=False, oracle_dt=None, smooth=True,
              sg_window=31, sg_order=3, prominence_frac=0.05):
    """Evaluate Gamma over a z grid and post-process the curve.

    Engine failures at single points are recorded as missing samples and
    linearly interpolated before smoothing; the scan continues.

    Parameters
    ----------
    engine : "semiclassical" | "oracle"
    mode : "fixed_gamma" | "fixed_n_io"
    fixed_value : float
        The fixed Keldysh factor or the fixed ionization photon number.
    z_values : array, strictly increasing
    """
    if engine not in ("semiclassical", "oracle"):
        raise ValueError(f"unknown engine {engine!r}")
    if mode not in ("fixed_gamma", "fixed_n_io"):
        raise ValueError(f"unknown mode {mode!r}")
    z_values = np.asarray(z_values, dtype=float)
    if z_values.size < 1 or np.any(np.diff(z_values) <= 0.0):
        raise ValueError("z_values must be non-empty and strictly increasing")

    gamma_param = np.array([_gamma_at(mode, fixed_value, z) for z in z_values])
    raw = np.empty_like(z_values)
    missing = []
    for i, z in enumerate(z_values):
        try:
            params = from_dimensionless(gamma_param[i], z)
            if engine == "semiclassical":
                raw[i] = ionization_rate(params, n_cycles, include_odd=include_odd)
            else:
                raw[i] = rate_from_oracle(params, n_cycles, dt=oracle_dt)
        except Exception:
            raw[i] = np.nan
            missing.append(i)

    filled = _fill_missing(z_values, raw, missing)
    smoothed = None
    fset = {}
    if smooth:
        window = min(sg_window, _largest_odd(z_values.size))
        order = min(sg_order, max(window - 1, 0))
        smoothed = savitzky_golay(filled, window, order) if window >= 3 else filled.copy()
        fset = {"sg_window": window, "sg_order": order,
                "prominence_frac": prominence_frac}

    series = smoothed if smoothed is not None else filled
    peak_idx, peak_z = _detect_peaks(z_values, series, gamma_param,
                                     prominence_frac)
    thresholds = _thresholds_in_range(mode, fixed_value,
                                      z_values[0], z_values[-1])
    return RateScan(mode=mode, fixed_value=fixed_value, engine=engine,
                    n_cycles=n_cycles, z_values=z_values,
                    gamma_param=gamma_param, gamma_raw=raw,
                    gamma_smooth=smoothed, peaks=peak_z,
                    peak_indices=peak_idx, thresholds=thresholds,
                    missing_indices=missing, filter_settings=fset)


def _largest_odd(n):
    return n if n % 2 else n - 1


def _fill_missing(z, raw, missing):
    filled = raw.copy()
    if missing:
        good = np.isfinite(raw)
        if good.sum() < 2:
            raise NumericError("too many engine failures to interpolate scan")
        filled[~good] = np.interp(z[~good], z[good], raw[good])
    return filled


def _detect_peaks(z, series, gamma_param, prominence_frac):
    if z.size < 3:
        return np.array([], dtype=int), np.array([])
    background = np.array([wkb_background(g, zz)
                           for g, zz in zip(gamma_param, z)])
    normalized = series / background
    span = float(np.nanmax(normalized) - np.nanmin(normalized))
    if span <= 0.0 or not np.isfinite(span):
        return np.array([], dtype=int), np.array([])
    idx, _ = find_peaks(normalized, prominence=prominence_frac * span)
    refined = np.array([_parabolic_refine(z, normalized, i) for i in idx])
    return idx, refined


def _parabolic_refine(z, y, i):
    if i == 0 or i == len(y) - 1:
        return z[i]
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom == 0.0:
        return z[i]
    shift = 0.5 * (y[i - 1] - y[i + 1]) / denom
    shift = min(max(shift, -1.0), 1.0)
    return z[i] + shift * 0.5 * (z[i + 1] - z[i - 1])


def savitzky_golay(series, window, poly_order):
    """Least-squares local polynomial smoothing.

    Interior points use the classic fixed convolution kernel; within half a
    window of either end the fit is redone on the truncated window so no
    samples are invented beyond the data.
    """
    series = np.asarray(series, dtype=float)
    if window % 2 == 0 or window < 3:
        raise ValueError(f"window must be an odd count >= 3, got {window!r}")
    if not 0 <= poly_order < window:
        raise ValueError(
            f"poly_order must satisfy 0 <= order < window, got {poly_order!r}")
    n = series.size
    half = window // 2
    out = np.empty_like(series)

    if n >= window:
        offsets = np.arange(-half, half + 1, dtype=float)
        vand = np.vander(offsets, poly_order + 1, increasing=True)
        kernel = np.linalg.pinv(vand)[0]
        core = np.convolve(series, kernel[::-1], mode="valid")
        out[half:n - half] = core
        edge = range(half)
    else:
        edge = range(n)

    for i in list(edge) + [n - 1 - i for i in edge]:
        lo, hi = max(0, i - half), min(n, i + half + 1)
        offs = np.arange(lo, hi, dtype=float) - i
        order = min(poly_order, hi - lo - 1)
        vand = np.vander(offs, order + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(vand, series[lo:hi], rcond=None)
        out[i] = coef[0]
    return out


def modulation_period(scan: RateScan):
    """Mean and standard deviation of consecutive peak spacings in z."""
    if scan.peaks.size < 4:
        raise InsufficientDataError(
            f"need at least 4 detected peaks, found {scan.peaks.size}")
    spacings = np.diff(scan.peaks)
    return float(spacings.mean()), float(spacings.std())


def windowed_background_mean(z_values, series, period, halfwidth_periods=1.0):
    """Local mean of the non-oscillatory part, one modulation window at a time.

    The modulation period is known, so the window average is taken by local
    harmonic regression: within each window of +-``halfwidth_periods``
    periods the series is fit with a constant, a linear trend, and the
    fundamental oscillation (with linearly drifting quadrature amplitudes);
    the constant is the background mean.  This cancels the fundamental far
    more completely than a boxcar when the modulation amplitude varies
    exponentially across the window.  Entries where the window does not fit
    are NaN.
    """
    z_values = np.asarray(z_values, dtype=float)
    series = np.asarray(series, dtype=float)
    step = z_values[1] - z_values[0]
    hw = int(round(halfwidth_periods * period / step))
    out = np.full_like(series, np.nan)
    for i in range(hw, z_values.size - hw):
        sl = slice(i - hw, i + hw + 1)
        x = z_values[sl] - z_values[i]
        ph = 2.0 * np.pi * x / period
        design = np.column_stack([np.ones_like(x), x,
                                  np.cos(ph), np.sin(ph),
                                  x * np.cos(ph), x * np.sin(ph)])
        coef, *_ = np.linalg.lstsq(design, series[sl], rcond=None)
        out[i] = coef[0]
    return out


def barrier_traversal_time(x_start, x_end, energy=-0.5):
    """Complex traversal time integral dx / sqrt(2E + x^2) along the barrier.

    The square root uses the decaying-solution sheet (branched_sqrt), which
    maps the classically forbidden stretch |x| < sqrt(-2E) to a positive
    imaginary time increment.
    """
    def f_re(x):
        return (1.0 / branched_sqrt(2.0 * energy + x * x)).real

    def f_im(x):
        return (1.0 / branched_sqrt(2.0 * energy + x * x)).imag

    re, re_err = quad(f_re, x_start, x_end, limit=400, epsabs=1e-13, epsrel=1e-13)
    im, im_err = quad(f_im, x_start, x_end, limit=400, epsabs=1e-13, epsrel=1e-13)
    if re_err + im_err > 1e-10 * max(1.0, abs(re) + abs(im)):
        raise NumericError("barrier traversal quadrature did not converge")
    return re + 1j * im


def appendix_c_demo():
    """Tunneling duration through the inverted parabola at E = -1/2 (= i*pi)."""
    return barrier_traversal_time(-1.0, 1.0, energy=-0.5)


# ----------------------------------------------------------------------
# emission
# ----------------------------------------------------------------------

def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.12g}"


def write_scan_csv(scan: RateScan, path):
    """Columns: z, gamma_param, Gamma_raw, Gamma_smooth, is_peak, nearest_threshold_k."""
    peak_set = set(int(i) for i in scan.peak_indices)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z", "gamma_param", "Gamma_raw", "Gamma_smooth",
                         "is_peak", "nearest_threshold_k"])
        for i, z in enumerate(scan.z_values):
            smooth = scan.gamma_smooth[i] if scan.gamma_smooth is not None else None
            writer.writerow([
                _fmt(z), _fmt(scan.gamma_param[i]), _fmt(scan.gamma_raw[i]),
                _fmt(smooth) if smooth is not None else "",
                1 if i in peak_set else 0,
                nearest_threshold_k(scan.mode, scan.fixed_value, z,
                                    scan.gamma_param[i]),
            ])


def write_scan_json(scan: RateScan, path, extra_metadata=None):
    """Full scan dump with metadata; schema_version marks the layout."""
    try:
        period_mean, period_std = modulation_period(scan)
        period = {"mean": period_mean, "std": period_std}
    except InsufficientDataError:
        period = None
    doc = {
        "schema_version": SCAN_SCHEMA_VERSION,
        "engine": scan.engine,
        "mode": scan.mode,
        "fixed_value": scan.fixed_value,
        "n_cycles": scan.n_cycles,
        "filter_settings": scan.filter_settings,
        "missing_indices": list(scan.missing_indices),
        "detected_period": period,
        "thresholds": [float(t) for t in scan.thresholds],
        "z": [float(z) for z in scan.z_values],
        "gamma_param": [float(g) for g in scan.gamma_param],
        "Gamma_raw": [None if math.isnan(v) else float(v) for v in scan.gamma_raw],
        "Gamma_smooth": (None if scan.gamma_smooth is None
                         else [float(v) for v in scan.gamma_smooth]),
        "peaks": [float(p) for p in scan.peaks],
    }
    if extra_metadata:
        doc.update(extra_metadata)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
