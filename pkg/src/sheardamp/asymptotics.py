"""Boundary-layer asymptotics: oscillatory time integrals and their envelopes.

The accumulated homogeneous correction near a wall is governed by integrals

    int_1^T t^{s-1} e^{ikty} dt  =  (ky)^{-s} int_{ky}^{kyT} tau^{s-1} e^{i tau} d tau,

whose size is min(log T, -log(ky)) + O(1) at s = 0 and min(T^s, (ky)^{-s}) + O(1)
for 0 < s < 1. All routes reduce to the half-line kernel

    int_a^b tau^{s-1} e^{i tau} d tau,

computed by adaptive quadrature near the origin (weighted for the algebraic
endpoint singularity) and, beyond tau = 30, by repeated integration by parts,
whose boundary terms decay like a^{s-1-j}; the truncation bound enters the
reported error estimate. b may be infinite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .errors import InsufficientTimeResolution
from .grid import Grid
from .elliptic import HomogeneousPair

_IBP_CUT = 30.0
_IBP_TERMS = 14


@dataclass
class OscIntegralResult:
    value: complex
    T: float
    k: float
    y: float
    s: float
    abs_error_estimate: float


def _quad_complex(f, a, b, tol, **kw) -> tuple[complex, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        re, ere = quad(lambda x: np.real(f(x)), a, b, epsabs=tol, epsrel=tol,
                       limit=500, **kw)
        im, eim = quad(lambda x: np.imag(f(x)), a, b, epsabs=tol, epsrel=tol,
                       limit=500, **kw)
    return re + 1j * im, ere + eim


def _ibp_tail(a: float, b: float, s: float) -> tuple[complex, float]:
    """int_a^b tau^{s-1} e^{i tau} d tau by repeated integration by parts, a >= cut."""
    mu = s - 1.0
    total = 0.0 + 0.0j
    coef = 1.0 + 0.0j
    for j in range(_IBP_TERMS):
        power = mu - j
        bterm = -(a**power) * np.exp(1j * a)
        if np.isfinite(b):
            bterm += b**power * np.exp(1j * b)
        total += coef * bterm / 1j
        coef *= -power / 1j
    bound = abs(coef) * a ** (mu - _IBP_TERMS + 1) / (_IBP_TERMS - mu - 1)
    return total, float(bound)


def half_line_kernel(a: float, b: float, s: float, tol: float = 1e-11) -> tuple[complex, float]:
    """int_a^b tau^{s-1} e^{i tau} d tau for 0 <= a < b <= inf, 0 <= s < 1.

    Returns (value, absolute error estimate). a = 0 requires s > 0.
    """
    if a < 0 or b <= a:
        raise ValueError(f"bad integration range [{a}, {b}]")
    if a == 0.0 and s <= 0.0:
        raise ValueError("integral diverges at the origin for s <= 0")
    val = 0.0 + 0.0j
    est = 0.0
    head_end = min(b, 2.0)
    if a < head_end:
        if a == 0.0:
            # algebraic endpoint weight tau^{s-1}
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                re, ere = quad(np.cos, a, head_end, weight="alg", wvar=(s - 1.0, 0.0),
                               epsabs=tol, epsrel=tol, limit=500)
                im, eim = quad(np.sin, a, head_end, weight="alg", wvar=(s - 1.0, 0.0),
                               epsabs=tol, epsrel=tol, limit=500)
            val += re + 1j * im
            est += ere + eim
        else:
            v, e = _quad_complex(lambda x: x ** (s - 1.0) * np.exp(1j * x),
                                 a, head_end, tol)
            val += v
            est += e
    mid_start = max(a, 2.0)
    mid_end = min(b, _IBP_CUT)
    if mid_start < mid_end:
        v, e = _quad_complex(lambda x: x ** (s - 1.0) * np.exp(1j * x),
                             mid_start, mid_end, tol)
        val += v
        est += e
    tail_start = max(a, _IBP_CUT)
    if tail_start < b:
        v, e = _ibp_tail(tail_start, b, s)
        val += v
        est += e
    return val, est


def oscillatory_log_integral(k: float, y: float, T: float,
                             tol: float = 1e-11) -> OscIntegralResult:
    """int_1^T e^{ikty} / t dt; exactly log T at y = 0."""
    if k <= 0 or y < 0 or T <= 1:
        raise ValueError(f"parameters out of range: k={k}, y={y}, T={T}")
    if y == 0.0:
        return OscIntegralResult(complex(np.log(T)), T, k, y, 0.0, 0.0)
    v, e = half_line_kernel(k * y, k * y * T, 0.0, tol)
    return OscIntegralResult(v, T, k, y, 0.0, e)


def cs_integral(k: float, y: float, s: float, T: float,
                tol: float = 1e-11) -> OscIntegralResult:
    """C_s(T, y) = int_1^T t^{s-1} e^{ikty} dt; equals (T^s - 1)/s at y = 0."""
    if k <= 0 or y < 0 or T <= 1:
        raise ValueError(f"parameters out of range: k={k}, y={y}, T={T}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if y == 0.0:
        return OscIntegralResult(complex((T**s - 1.0) / s), T, k, y, s, 0.0)
    ky = k * y
    v, e = half_line_kernel(ky, ky * T, s, tol)
    scale = ky ** (-s)
    return OscIntegralResult(scale * v, T, k, y, s, scale * e)


def cs_limit_constant(s: float, tol: float = 1e-11) -> tuple[complex, complex]:
    """(quadrature value, Gamma-function oracle) for lim int_0^inf tau^{s-1} e^{i tau} d tau.

    The oracle Gamma(s) e^{i pi s / 2} comes from rotating the contour onto the
    positive imaginary axis; both are reported side by side.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    v, _ = half_line_kernel(0.0, np.inf, s, tol)
    oracle = gamma(s) * np.exp(1j * np.pi * s / 2.0)
    return v, complex(oracle)


@dataclass
class LpVerdict:
    verdict: str                 # "convergent" | "divergent"
    partial_sums: np.ndarray     # dyadic partial sums of int y^{-sp} dy
    total: float | None          # extrapolated integral when convergent


def lp_membership(s: float, p: float, n_blocks: int = 40) -> LpVerdict:
    """Does y^{-s} lie in L^p([0,1])? Dyadic quadrature verdict (true iff p < 1/s)."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s}")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    sp = s * p
    blocks = np.empty(n_blocks)
    for j in range(1, n_blocks + 1):
        lo, hi = 2.0 ** (-j), 2.0 ** (-j + 1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            blocks[j - 1], _ = quad(lambda x: x ** (-sp), lo, hi, epsabs=1e-13, epsrel=1e-13)
    sums = np.cumsum(blocks)
    ratio = blocks[-1] / blocks[-2]
    if ratio < 1.0 - 1e-9:
        total = float(sums[-1] + blocks[-1] * ratio / (1.0 - ratio))
        return LpVerdict("convergent", sums, total)
    return LpVerdict("divergent", sums, None)


def boundary_layer_profile(trace_times: np.ndarray, wall0: np.ndarray,
                           wall1: np.ndarray, k: float, pair: HomogeneousPair,
                           grid: Grid, probes: np.ndarray, T: float,
                           t_start: float = 1.0) -> dict:
    """Accumulated homogeneous correction  int_{t0}^{T} H1(t, y) dt  at probe points.

    Uses the stored wall series H1(t,0), H1(t,1) and the expansion
    H1 = H1|_0 e^{-ikty} u1 + H1|_1 e^{-ikt(y-1)} u2, quadrature by trapezoid
    on the stored times. Requires sampling finer than half an oscillation.
    """
    probes = np.atleast_1d(np.asarray(probes, dtype=float))
    mask = (trace_times >= t_start) & (trace_times <= T)
    ts = trace_times[mask]
    if len(ts) < 8:
        raise InsufficientTimeResolution("fewer than 8 trace samples in window")
    max_dt = float(np.max(np.diff(ts)))
    if max_dt > 0.5 / abs(k):
        raise InsufficientTimeResolution(
            f"trace spacing {max_dt:.3g} too coarse for |k|={abs(k)}")
    b0 = wall0[mask]
    b1 = wall1[mask]
    u1p = grid.interpolate(pair.u1, probes)
    u2p = grid.interpolate(pair.u2, probes)
    phase0 = np.exp(-1j * k * np.outer(ts, probes))
    phase1 = np.exp(-1j * k * np.outer(ts, probes - 1.0))
    integrand = b0[:, None] * phase0 * u1p[None, :] + b1[:, None] * phase1 * u2p[None, :]
    profile = np.trapz(integrand, ts, axis=0)
    envelope = np.minimum(np.log(T), -np.log(np.minimum(k * probes, 1.0 - 1e-300)))
    return {
        "probes": probes,
        "profile": profile,
        "envelope": np.maximum(envelope, 0.0) + 1.0,
        "T": T,
    }
