"""Rate fitting, growth detection, critical-exponent scans, consistency residual."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (InsufficientSamples, InsufficientSpan, NonPositiveValues,
                     ScheduleMismatch)
from .grid import Grid
from .elliptic import EllipticSolution, ShiftedEllipticSolver
from .norms import NormReport
from .profiles import CoefficientPair


@dataclass
class RateFit:
    model: str                   # "power": v ~ A t^alpha; "log": v ~ alpha log t + beta
    alpha: float
    r2: float
    window: tuple[float, float]
    amplitude: float             # A for power fits, beta for log fits
    alpha_stderr: float

    def __post_init__(self):
        t0, t1 = self.window
        if t1 < 10.0 * t0:
            raise InsufficientSpan(f"fit window [{t0:.3g}, {t1:.3g}] spans < 1 decade")
        self.r2 = float(min(max(self.r2, 0.0), 1.0))


def _least_squares(x: np.ndarray, y: np.ndarray):
    n = len(x)
    xb, yb = x.mean(), y.mean()
    sxx = np.sum((x - xb) ** 2)
    slope = np.sum((x - xb) * (y - yb)) / sxx
    intercept = yb - slope * xb
    resid = y - slope * x - intercept
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - yb) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - ss_res / ss_tot
    stderr = np.sqrt(ss_res / max(n - 2, 1) / sxx)
    return slope, intercept, r2, stderr


def _window_mask(times, window):
    times = np.asarray(times, dtype=float)
    if window is None:
        window = (float(times.min()), float(times.max()))
    mask = (times >= window[0]) & (times <= window[1]) & (times > 0)
    return mask, window


def fit_power_law(times, values, window=None) -> RateFit:
    """Least squares on (log t, log v); v must be strictly positive in the window."""
    mask, window = _window_mask(times, window)
    t = np.asarray(times, dtype=float)[mask]
    v = np.asarray(values, dtype=float)[mask]
    if len(t) < 8:
        raise InsufficientSamples(f"{len(t)} samples in window, need >= 8")
    if np.any(v <= 0):
        raise NonPositiveValues("power-law fit requires positive values")
    slope, intercept, r2, stderr = _least_squares(np.log(t), np.log(v))
    return RateFit("power", float(slope), r2, window, float(np.exp(intercept)),
                   float(stderr))


def fit_log_growth(times, values, window=None) -> RateFit:
    """Least squares on (log t, v): v ~ alpha log t + beta."""
    mask, window = _window_mask(times, window)
    t = np.asarray(times, dtype=float)[mask]
    v = np.asarray(values, dtype=float)[mask]
    if len(t) < 8:
        raise InsufficientSamples(f"{len(t)} samples in window, need >= 8")
    slope, intercept, r2, stderr = _least_squares(np.log(t), v)
    return RateFit("log", float(slope), r2, window, float(intercept), float(stderr))


def velocity_norms(solution: EllipticSolution, coeffs: CoefficientPair,
                   grid: Grid) -> tuple[float, float]:
    """(||v - <v>_x||_L2, ||v2||_L2) for this mode.

    With the k^{-2} stream-function scaling, |v2_hat| = |Phi|/|k| and
    |v1_hat| = |g (d_y/k + it) Phi| / |k| (the shifted derivative is exactly
    the moving-frame image of d_y phi_hat).
    """
    qw = grid.quad_weights
    k = abs(solution.k)
    v2 = np.sqrt(np.sum(qw * np.abs(solution.phi) ** 2)) / k
    v1 = np.sqrt(np.sum(qw * np.abs(coeffs.g_samples * solution.shifted_d) ** 2)) / k
    return float(np.hypot(v1, v2)), float(v2)


@dataclass
class ScanVerdict:
    s: float
    verdict: str                 # "bounded" | "growing" | "inconclusive"
    growth_fit: RateFit | None
    last_decade_ratio: float
    series_max: float


def critical_scan(times, reports: list[NormReport], s_list, k: float,
                  n_uniform: int) -> dict[float, ScanVerdict]:
    """Bounded/growing verdicts for ||W||_{H^s} across scan exponents.

    Growth is fitted on the resolution-trusted window t <= n_uniform/(2|k|)
    (the wall layer narrows like 1/(kt) and falls below the uniform sampling
    beyond it): growing when the log-slope exceeds 3 standard errors with
    r^2 >= 0.9; bounded when the last-decade max/median ratio is <= 1.1.
    Verdicts are forced monotone: a "bounded" above the smallest "growing"
    becomes "inconclusive".
    """
    times = np.asarray(times, dtype=float)
    pos = times > 0
    if times[pos].max() / times[pos].min() < 10**2.5:
        raise InsufficientSpan("critical_scan needs >= 2.5 decades of samples")
    t_end = times.max()
    t_trust = min(t_end, n_uniform / (2.0 * abs(k)))
    out: dict[float, ScanVerdict] = {}
    for s in s_list:
        series = np.array([r.scan_norms[s] for r in reports])
        fit = None
        growing = False
        try:
            fit = fit_log_growth(times, series, window=(1.0, t_trust))
            growing = fit.alpha > 3.0 * fit.alpha_stderr and fit.r2 >= 0.9
        except (InsufficientSamples, InsufficientSpan):
            pass
        last = series[times >= t_end / 10.0]
        ratio = float(last.max() / np.median(last))
        if growing:
            verdict = "growing"
        elif ratio <= 1.1:
            verdict = "bounded"
        else:
            verdict = "inconclusive"
        out[s] = ScanVerdict(float(s), verdict, fit, ratio, float(series.max()))
    growing_s = [s for s, v in out.items() if v.verdict == "growing"]
    if growing_s:
        s_star = min(growing_s)
        for s, v in out.items():
            if s > s_star and v.verdict == "bounded":
                v.verdict = "inconclusive"
    return out


def consistency_residual(times, mode_snapshots: dict[float, list[np.ndarray]],
                         coeffs: CoefficientPair, grid: Grid,
                         fit_window=None) -> dict:
    """|| grad^perp Phi . grad W ||_L2 series from a bundle of linear mode runs.

    mode_snapshots maps positive wavenumbers to snapshot lists on the shared
    schedule; negative modes are implied by conjugation (real fields). The
    nonlinearity is assembled in physical space from the moving-frame fields
    (the frame-shift terms cancel in the skew product), with the measure factor
    g from the y -> z change of variables. Outputs are labeled as linear-solution
    diagnostics: no nonlinear feedback is simulated.
    """
    times = np.asarray(times, dtype=float)
    for k, snaps in mode_snapshots.items():
        if k <= 0:
            raise ScheduleMismatch("provide positive wavenumbers; -k is implied")
        if len(snaps) != len(times):
            raise ScheduleMismatch(f"mode k={k} has {len(snaps)} snapshots, "
                                   f"schedule has {len(times)}")
        if len(snaps) and len(snaps[0]) != grid.n:
            raise ScheduleMismatch("snapshots do not match the grid")
    ks = sorted(mode_snapshots)
    solvers = {k: ShiftedEllipticSolver(coeffs, grid, k) for k in ks}
    g = coeffs.g_samples
    qw = grid.quad_weights
    series = np.empty(len(times))
    for it, t in enumerate(times):
        fields = {}
        for k in ks:
            w = mode_snapshots[k][it]
            phi = solvers[k].solve(w, t).phi / k**2
            fields[k] = (w, phi)
            fields[-k] = (np.conj(w), np.conj(phi))
        total = 0.0
        kappas = sorted({ka + kb for ka in fields for kb in fields})
        for kap in kappas:
            acc = np.zeros(grid.n, dtype=complex)
            for ka, (wa, pa) in fields.items():
                kb = kap - ka
                if kb not in fields:
                    continue
                wb = fields[kb][0]
                acc += -(grid.D1 @ pa) * (1j * kb * wb) + (1j * ka * pa) * (grid.D1 @ wb)
            total += float(np.sum(qw * np.abs(g * acc) ** 2))
        series[it] = np.sqrt(total)
    fit = None
    if np.all(series > 0):
        try:
            fit = fit_power_law(times, series, window=fit_window)
        except (InsufficientSamples, NonPositiveValues, InsufficientSpan):
            fit = None
    return {"times": times, "series": series, "fit": fit, "label": "linear-solution"}


@dataclass
class WallMonitor:
    dw0: np.ndarray
    dw1: np.ndarray
    d2w0: np.ndarray
    d2w1: np.ndarray
    dw_logfit0: RateFit | None
    dw_logfit1: RateFit | None
    d2w_logfit0: RateFit | None
    d2w_logfit1: RateFit | None
    predicted_slope0: float
    predicted_slope1: float
    zero_dirichlet: bool
    c_limits: tuple[complex, complex] | None


def boundary_singularity_monitor(times, reports: list[NormReport],
                                 coeffs: CoefficientPair,
                                 fit_window=(10.0, None)) -> WallMonitor:
    """Wall traces of d_y W and d_y^2 W with log-growth fits.

    The predicted first-derivative log slope is |f w_0 / g^2| at each wall
    (the k-factors in the boundary integrand cancel). For zero-Dirichlet data
    the d_y W traces converge; their terminal values estimate the limits c0, c1.
    """
    times = np.asarray(times, dtype=float)
    dw0 = np.array([r.dtrace0 for r in reports])
    dw1 = np.array([r.dtrace1 for r in reports])
    d2w0 = np.array([r.d2trace0 for r in reports])
    d2w1 = np.array([r.d2trace1 for r in reports])
    w0_init = reports[0].trace0
    w1_init = reports[0].trace1
    f, gsq = coeffs.f_samples, coeffs.g_samples**2
    pred0 = float(abs(f[0] * w0_init / gsq[0]))
    pred1 = float(abs(f[-1] * w1_init / gsq[-1]))
    zero_dirichlet = max(abs(w0_init), abs(w1_init)) < 1e-10

    window = (fit_window[0], fit_window[1] or float(times.max()))

    def _logfit(series):
        try:
            return fit_log_growth(times, np.abs(series), window=window)
        except (InsufficientSamples, InsufficientSpan):
            return None

    c_limits = None
    if zero_dirichlet:
        tail = times >= times.max() / 10.0
        c_limits = (complex(np.mean(dw0[tail])), complex(np.mean(dw1[tail])))
    return WallMonitor(
        dw0=dw0, dw1=dw1, d2w0=d2w0, d2w1=d2w1,
        dw_logfit0=_logfit(dw0), dw_logfit1=_logfit(dw1),
        d2w_logfit0=_logfit(d2w0), d2w_logfit1=_logfit(d2w1),
        predicted_slope0=pred0, predicted_slope1=pred1,
        zero_dirichlet=zero_dirichlet, c_limits=c_limits,
    )
