"""Fractional Sobolev norms: Fourier and Gagliardo forms, traces, multipliers.

Torus norms use the Fourier weight (1 + |n|^{2s}) on unit-normalized DFT
coefficients (the n = 0 term carries weight 1, and s = 0 reduces to plain
Parseval, i.e. the squared L2 norm). The torus kernel form and the interval
Gagliardo forms integrate |u(x)-u(y)|^2 / |x-y|^{1+2s} with the diagonal strip
|x-y| < h replaced by the local-derivative approximation |u'(x)|^2 |x-y|^2,
h = 2 grid spacings.

Orders above 1 are composed recursively: u is in H^{1+sigma} when u and u'
are in H^{sigma}, so scan norms combine derivative norms in quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .grid import Grid, dft_coefficients, dft_frequencies


def _check_uniform(u: np.ndarray) -> int:
    N = len(u)
    if N & (N - 1) != 0:
        raise ValueError(f"uniform sample count {N} is not a power of two")
    return N


def hs_torus(u: np.ndarray, s: float) -> float:
    """Squared H^s(T) norm, sum over (1 + |n|^{2s}) |u_hat_n|^2, for 0 <= s < 1."""
    if not 0.0 <= s < 1.0:
        raise ValueError(f"hs_torus needs s in [0, 1), got {s}")
    c2 = np.abs(dft_coefficients(u)) ** 2
    if s == 0.0:
        return float(c2.sum())
    n = np.abs(dft_frequencies(len(u))).astype(float)
    w = np.ones_like(n)
    nz = n > 0
    w[nz] += n[nz] ** (2 * s)
    return float((w * c2).sum())


def hs_torus_inner(u: np.ndarray, v: np.ndarray, s: float) -> complex:
    """H^s(T) inner product matching hs_torus (conjugate-linear in the first slot)."""
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s out of range: {s}")
    cu = dft_coefficients(u)
    cv = dft_coefficients(v)
    n = np.abs(dft_frequencies(len(u))).astype(float)
    w = np.ones_like(n)
    if s > 0.0:
        nz = n > 0
        w[nz] += n[nz] ** (2 * s)
    return complex(np.sum(w * np.conj(cu) * cv))


def torus_fourier_seminorm(u: np.ndarray, s: float) -> float:
    """Homogeneous part, sum over |n|^{2s} |u_hat_n|^2."""
    c2 = np.abs(dft_coefficients(u)) ** 2
    n = np.abs(dft_frequencies(len(u))).astype(float)
    nz = n > 0
    return float((n[nz] ** (2 * s) * c2[nz]).sum())


def torus_kernel_seminorm(u: np.ndarray, s: float) -> float:
    """Gagliardo quasi-norm on the torus from uniform samples.

    Double sum of |u(x+h) - u(x)|^2 / |h|^{1+2s} over lags 2/N <= |h| <= 1/2,
    plus the diagonal-strip correction using the spectral derivative.
    """
    N = _check_uniform(u)
    if not 0.0 < s < 1.0:
        raise ValueError(f"s out of range: {s}")
    dx = 1.0 / N
    total = 0.0
    for ell in range(2, N // 2 + 1):
        h = ell * dx
        diff2 = np.abs(np.roll(u, -ell) - u) ** 2
        total += 2.0 * diff2.mean() / h ** (1 + 2 * s) * dx  # both signs of h
    du = np.fft.ifft(2j * np.pi * dft_frequencies(N) * np.fft.fft(u) / N) * N
    hmin = 2.0 * dx
    total += np.mean(np.abs(du) ** 2) * 2.0 * hmin ** (2 - 2 * s) / (2 - 2 * s)
    return float(total)


def bn_constants(s: float, n_max: int) -> np.ndarray:
    """Kernel-vs-Fourier equivalence constants B_n for the unit torus.

    B_n = |n|^{-2s} * int_{-1/2}^{1/2} 4 sin^2(pi n h) / |h|^{1+2s} dh, defined so
    that the kernel quasi-norm equals sum B_n |n|^{2s} |u_hat_n|^2 exactly for the
    e^{2 pi i n y} convention. Bounded above and below uniformly in n.
    """
    if not 0.0 < s < 0.5:
        raise ValueError(f"bn_constants needs 0 < s < 1/2, got {s}")
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        val, _ = quad(lambda h: 4 * np.sin(np.pi * n * h) ** 2 / h ** (1 + 2 * s),
                      0.0, 0.5, limit=400)
        out[n - 1] = 2.0 * val / n ** (2 * s)
    return out


def _interval_midpoints(grid: Grid, u: np.ndarray, count: int | None = None):
    N = count or grid.n_uniform
    x = (np.arange(N) + 0.5) / N
    ux = grid.interpolate(u, x)
    dux = grid.interpolate(grid.D1 @ u, x)
    return x, ux, dux


def hs_interval(u: np.ndarray, s: float, grid: Grid) -> float:
    """Gagliardo H^s([0,1]) seminorm (squared) from wall-grid samples."""
    if grid.n < 32:
        raise ValueError("hs_interval needs at least 32 nodes")
    if not 0.0 < s < 0.95:
        raise ValueError(f"s={s} out of range (0, 0.95); diagonal treatment degrades")
    x, ux, dux = _interval_midpoints(grid, u)
    return _gagliardo(x, ux, dux, exponent=2.0, singularity=1 + 2 * s)


def wsp_interval(u: np.ndarray, s: float, p: float, grid: Grid) -> float:
    """Gagliardo W^{s,p}([0,1]) seminorm (p-th power) from wall-grid samples."""
    if grid.n < 32:
        raise ValueError("wsp_interval needs at least 32 nodes")
    if not 0.0 < s < 0.95:
        raise ValueError(f"s={s} out of range (0, 0.95)")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    x, ux, dux = _interval_midpoints(grid, u)
    return _gagliardo(x, ux, dux, exponent=p, singularity=1 + s * p)


def _gagliardo(x: np.ndarray, ux: np.ndarray, dux: np.ndarray,
               exponent: float, singularity: float) -> float:
    N = len(x)
    dxw = 1.0 / N
    h = 2.0 * dxw
    diff = np.abs(ux[:, None] - ux[None, :]) ** exponent
    dist = np.abs(x[:, None] - x[None, :])
    mask = dist >= h
    kern = np.zeros_like(dist)
    kern[mask] = dist[mask] ** (-singularity)
    total = float((diff * kern).sum() * dxw * dxw)
    # strip |x-y| < h: |u(x)-u(y)| ~ |u'(x)||x-y|, truncated at the interval ends
    ex = exponent - singularity + 1.0   # integrand |d|^{exponent - singularity}
    dl = np.minimum(h, x)
    dr = np.minimum(h, 1.0 - x)
    total += float(np.sum(np.abs(dux) ** exponent * (dl**ex + dr**ex)) / ex * dxw)
    return total


def traces(u: np.ndarray, grid: Grid):
    """(u(0), u(1), u'(0), u'(1), u''(0), u''(1)) from endpoint nodes and D rows."""
    du = grid.D1 @ u
    d2u = grid.D2 @ u
    return (complex(u[0]), complex(u[-1]), complex(du[0]), complex(du[-1]),
            complex(d2u[0]), complex(d2u[-1]))


def lipschitz_multiplier_check(g: np.ndarray, u: np.ndarray, s: float) -> float:
    """Ratio ||g u||_{H^s} / ||u||_{H^s} on uniform torus samples (g real Lipschitz)."""
    if not 0.0 < s < 0.5:
        raise ValueError(f"s out of range (0, 1/2): {s}")
    num = hs_torus(g * u, s)
    den = hs_torus(u, s)
    return float(np.sqrt(num / den))


def w1inf_norm(g: np.ndarray) -> float:
    """||g||_inf + ||g'||_inf from uniform torus samples, derivative spectral."""
    N = _check_uniform(g)
    dg = np.fft.ifft(2j * np.pi * dft_frequencies(N) * np.fft.fft(g) / N) * N
    return float(np.max(np.abs(g)) + np.max(np.abs(dg)))


def sobolev_scan_norm(w: np.ndarray, dw: np.ndarray, d2w: np.ndarray, s: float) -> float:
    """H^s norm for scan exponents s in [0, 3), composed from derivative norms.

    s in [0,1): ||w||_{H^s}; s in [1,2): (||w||^2 + ||w'||^2)_{H^{s-1}}^{1/2};
    s in [2,3): the same with w'' included. Inputs are uniform torus samples.
    """
    if s < 0 or s >= 3:
        raise ValueError(f"scan exponent {s} outside [0, 3)")
    if s < 1.0:
        return float(np.sqrt(hs_torus(w, s)))
    if s < 2.0:
        sig = s - 1.0
        return float(np.sqrt(hs_torus(w, sig) + hs_torus(dw, sig)))
    sig = s - 2.0
    return float(np.sqrt(hs_torus(w, sig) + hs_torus(dw, sig) + hs_torus(d2w, sig)))


@dataclass
class NormReport:
    """Norm and trace snapshot of one mode at one time."""

    t: float
    l2: float
    hs_torus: dict[float, float]            # squared H^sigma(T) of W
    hs_interval: dict[float, float]
    wsp: dict[tuple[float, float], float]
    trace0: complex
    trace1: complex
    dtrace0: complex
    dtrace1: complex
    d2trace0: complex
    d2trace1: complex
    hs_torus_dw: dict[float, float] = field(default_factory=dict)
    hs_torus_d2w: dict[float, float] = field(default_factory=dict)
    scan_norms: dict[float, float] = field(default_factory=dict)   # composite ||W||_{H^s}

    def __post_init__(self):
        if self.hs_torus:
            vals = [self.hs_torus[s] for s in sorted(self.hs_torus)]
            if any(b < a * (1 - 1e-9) for a, b in zip(vals, vals[1:])):
                raise AssertionError("hs_torus must be nondecreasing in s")


def make_norm_report(t: float, w: np.ndarray, grid: Grid,
                     sigma_grid: tuple[float, ...] = (0.0, 0.25, 0.4),
                     scan_grid: tuple[float, ...] = (),
                     interval_s: tuple[float, ...] = (),
                     wsp_pairs: tuple[tuple[float, float], ...] = ()) -> NormReport:
    """Evaluate the standard norm battery for one vorticity snapshot."""
    dw = grid.D1 @ w
    d2w = grid.D2 @ w
    wu = grid.resample(w)
    dwu = grid.resample(dw)
    d2wu = grid.resample(d2w)
    l2 = float(np.sqrt(np.sum(grid.quad_weights * np.abs(w) ** 2)))
    tr = traces(w, grid)
    return NormReport(
        t=t, l2=l2,
        hs_torus={s: hs_torus(wu, s) for s in sigma_grid},
        hs_interval={s: hs_interval(w, s, grid) for s in interval_s},
        wsp={(s, p): wsp_interval(w, s, p, grid) for (s, p) in wsp_pairs},
        trace0=tr[0], trace1=tr[1], dtrace0=tr[2], dtrace1=tr[3],
        d2trace0=tr[4], d2trace1=tr[5],
        hs_torus_dw={s: hs_torus(dwu, s) for s in sigma_grid},
        hs_torus_d2w={s: hs_torus(d2wu, s) for s in sigma_grid},
        scan_norms={s: sobolev_scan_norm(wu, dwu, d2wu, s) for s in scan_grid},
    )
