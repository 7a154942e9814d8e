"""Monotone shear profiles U and their normalized coefficient functions.

A background flow (U(y), 0) on [a, b] with 0 < c < U' < 1/c enters the per-mode
equations only through
    f(z) = U''(U^{-1}(z)),    g(z) = U'(U^{-1}(z)),
sampled on a wall-clustered grid over the normalized interval [0, 1]. The
normalization maps z_phys = U(a) + lam * z with lam = U(b) - U(a); f and g are
stored as the physical values at the mapped nodes (lam and the Galilean shift
are kept on the pair but not folded into the samples).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import InversionFailure, NonMonotone
from .grid import _cgl_nodes, _bary_weights_cgl, _diff_matrix

_FD_H = 1e-4


def _fd1(U: Callable, h: float = _FD_H) -> Callable:
    return lambda y: (-U(y + 2 * h) + 8 * U(y + h) - 8 * U(y - h) + U(y - 2 * h)) / (12 * h)


def _fd_next(dU: Callable, h: float = _FD_H) -> Callable:
    # 4th-order central difference of an already-known derivative closure
    return lambda y: (-dU(y + 2 * h) + 8 * dU(y + h) - 8 * dU(y - h) + dU(y - 2 * h)) / (12 * h)


@dataclass
class ShearProfile:
    """Monotone velocity profile with derivative closures.

    Derivatives beyond those supplied analytically are filled in by 4th-order
    central differences of the lowest available closure; f = U'' o U^{-1} is
    sensitive to derivative noise, so analytic derivatives are preferred.
    """

    U: Callable[[np.ndarray], np.ndarray]
    dU: Callable[[np.ndarray], np.ndarray]
    d2U: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    monotonicity_bound: float = 0.0
    d3U: Callable[[np.ndarray], np.ndarray] | None = None
    d4U: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        a, b = self.domain
        if not b > a:
            raise ValueError(f"empty domain {self.domain}")
        yy = np.linspace(a, b, 4096)
        dv = np.asarray(self.U(yy + 1e-7) - self.U(yy - 1e-7)) / 2e-7  # guard against bad dU
        slopes = np.asarray(self.dU(yy), dtype=float)
        lo, hi = slopes.min(), slopes.max()
        if lo <= 0:
            raise NonMonotone(f"U' reaches {lo:.3e} on [{a}, {b}]")
        c_max = min(lo, 1.0 / hi) * (1 - 1e-12)
        if self.monotonicity_bound:
            c = self.monotonicity_bound
            if not (lo > c and hi < 1.0 / c):
                raise NonMonotone(
                    f"U' range [{lo:.4g}, {hi:.4g}] violates ({c:.4g}, {1/c:.4g})")
        else:
            self.monotonicity_bound = c_max
        # cross-check the supplied derivative closures against finite differences
        if np.max(np.abs(dv - slopes[:])) > 1e-5 * max(1.0, np.max(np.abs(slopes))):
            raise NonMonotone("dU closure disagrees with finite differences of U")
        if self.d3U is None:
            self.d3U = _fd_next(self.d2U)
        if self.d4U is None:
            self.d4U = _fd_next(self.d3U)

    @property
    def velocity_span(self) -> float:
        a, b = self.domain
        return float(self.U(b) - self.U(a))


@dataclass
class CoefficientPair:
    """f, g and their derivative tables on the normalized wall-clustered grid."""

    f_samples: np.ndarray
    g_samples: np.ndarray
    n_samples: int
    nodes: np.ndarray              # normalized abscissae in [0, 1]
    df: np.ndarray                 # d/dz' tables on the normalized variable
    d2f: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    scale: float                   # lam = U(b) - U(a); not folded into samples
    shift: float                   # Galilean constant U(a); unused downstream
    monotonicity_bound: float
    profile_name: str = "custom"

    def __post_init__(self):
        c = self.monotonicity_bound
        g = self.g_samples
        if g.min() < c * (1 - 1e-9) or g.max() > (1.0 / c) * (1 + 1e-9):
            raise NonMonotone(
                f"g samples [{g.min():.4g}, {g.max():.4g}] leave [{c:.4g}, {1/c:.4g}]")

    @property
    def max_abs_f(self) -> float:
        return float(np.max(np.abs(self.f_samples)))

    @property
    def min_g(self) -> float:
        return float(np.min(np.abs(self.g_samples)))

    def periodic_jump(self) -> float:
        """|g^2(1) - g^2(0)| of the periodic extension."""
        return float(abs(self.g_samples[-1] ** 2 - self.g_samples[0] ** 2))


def build_coefficients(profile: ShearProfile, n_samples: int) -> CoefficientPair:
    """Sample f = U'' o U^{-1} and g = U' o U^{-1} on n_samples CGL nodes over [0, 1].

    U is inverted per node by safeguarded bracketing (brentq) to relative
    tolerance 1e-12; each inverse is round-trip checked to 1e-10.
    """
    if n_samples < 16:
        raise ValueError(f"need n_samples >= 16, got {n_samples}")
    a, b = profile.domain
    za, zb = float(profile.U(a)), float(profile.U(b))
    lam = zb - za
    nodes = _cgl_nodes(n_samples)
    y_inv = np.empty(n_samples)
    for i, zp in enumerate(nodes):
        z_phys = za + lam * zp
        if i == 0:
            y_inv[i] = a
            continue
        if i == n_samples - 1:
            y_inv[i] = b
            continue
        try:
            y_inv[i] = brentq(lambda y: profile.U(y) - z_phys, a, b,
                              xtol=1e-15, rtol=1e-12)
        except ValueError as exc:
            raise InversionFailure(f"inversion failed at z={z_phys:.6g}: {exc}") from exc
        if abs(profile.U(y_inv[i]) - z_phys) > 1e-10 * max(1.0, abs(zb), abs(za)):
            raise InversionFailure(f"round-trip error at z={z_phys:.6g}")

    up = np.asarray(profile.dU(y_inv), dtype=float)
    upp = np.asarray(profile.d2U(y_inv), dtype=float)
    uppp = np.asarray(profile.d3U(y_inv), dtype=float)
    upppp = np.asarray(profile.d4U(y_inv), dtype=float)

    g = up
    f = upp
    # chain rule in the normalized variable: dy/dz' = lam / U'(y)
    dy = lam / up
    dg = upp * dy
    df = uppp * dy
    d2g = (uppp * up - upp**2) * lam**2 / up**3
    d2f = (upppp * up - uppp * upp) * lam**2 / up**3

    return CoefficientPair(
        f_samples=f, g_samples=g, n_samples=n_samples, nodes=nodes,
        df=df, d2f=d2f, dg=dg, d2g=d2g,
        scale=lam, shift=za, monotonicity_bound=profile.monotonicity_bound,
        profile_name=profile.name,
    )


@dataclass
class RegularityReport:
    order: int
    f_bounds: list[float]          # max |f^(j)| for j = 0..order
    g_bounds: list[float]
    periodic_jump: float           # |g^2(1) - g^2(0)|
    jump_flagged: bool             # nonzero jump: periodic-extension hypotheses degraded
    endpoint_mismatches: dict


def validate_regularity(pair: CoefficientPair, order: int) -> RegularityReport:
    """Numerical check of the W^{order,inf} hypotheses on f and g.

    Reports derivative sup-norms up to the requested order and the periodic
    jump of g^2; a nonzero jump is flagged (not an error) since the periodic
    multiplier and commutator estimates then only hold approximately.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be in {{1,2,3}}, got {order}")
    tabs_f = [pair.f_samples, pair.df, pair.d2f]
    tabs_g = [pair.g_samples, pair.dg, pair.d2g]
    if order == 3:
        D = _diff_matrix(pair.nodes, _bary_weights_cgl(pair.n_samples))
        tabs_f.append(D @ pair.d2f)
        tabs_g.append(D @ pair.d2g)
    f_bounds = [float(np.max(np.abs(t))) for t in tabs_f[: order + 1]]
    g_bounds = [float(np.max(np.abs(t))) for t in tabs_g[: order + 1]]
    jump = pair.periodic_jump()
    mismatches = {
        "f": float(abs(pair.f_samples[-1] - pair.f_samples[0])),
        "g": float(abs(pair.g_samples[-1] - pair.g_samples[0])),
        "dg": float(abs(pair.dg[-1] - pair.dg[0])),
    }
    return RegularityReport(
        order=order, f_bounds=f_bounds, g_bounds=g_bounds,
        periodic_jump=jump, jump_flagged=jump > 1e-10,
        endpoint_mismatches=mismatches,
    )


# --- named profiles ---------------------------------------------------------

def couette() -> ShearProfile:
    """U(y) = y on [0, 1]: f = 0, g = 1 (pure transport)."""
    z = lambda y: np.zeros_like(np.asarray(y, dtype=float))
    return ShearProfile(
        U=lambda y: np.asarray(y, dtype=float),
        dU=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        d2U=z, d3U=z, d4U=z,
        domain=(0.0, 1.0), name="couette",
    )


def quadratic() -> ShearProfile:
    """U(y) = y + y^2/4 on [0, 1]: closed-form inverse, f = 1/2, g = sqrt(1+z)."""
    z = lambda y: np.zeros_like(np.asarray(y, dtype=float))
    return ShearProfile(
        U=lambda y: y + y**2 / 4.0,
        dU=lambda y: 1.0 + np.asarray(y, dtype=float) / 2.0,
        d2U=lambda y: np.full_like(np.asarray(y, dtype=float), 0.5),
        d3U=z, d4U=z,
        domain=(0.0, 1.0), name="quadratic",
    )


def sine(eps: float = 0.25) -> ShearProfile:
    """U(y) = y + eps (1 - cos 2 pi y) / (2 pi) on [0, 1].

    U(y+1) = U(y) + 1 exactly, so f and g extend 1-periodically and smoothly,
    with f(0) = f(1) = 2 pi eps nonzero at the walls. This is the flow used for
    the critical-exponent scans: the periodic multiplier hypotheses hold exactly.
    """
    if not 0 < eps < 1:
        raise ValueError(f"need 0 < eps < 1 for monotonicity, got {eps}")
    tp = 2 * np.pi
    return ShearProfile(
        U=lambda y: y + eps * (1 - np.cos(tp * y)) / tp,
        dU=lambda y: 1.0 + eps * np.sin(tp * y),
        d2U=lambda y: eps * tp * np.cos(tp * y),
        d3U=lambda y: -eps * tp**2 * np.sin(tp * y),
        d4U=lambda y: -eps * tp**3 * np.cos(tp * y),
        domain=(0.0, 1.0), name="sine", params={"eps": eps},
    )


def tanh_profile(steepness: float = 1.0) -> ShearProfile:
    """U(y) = tanh(b(y - 1/2)) on [0, 1], a smooth monotone mixing-layer profile."""
    b = steepness
    sech2 = lambda y: 1.0 / np.cosh(b * (y - 0.5)) ** 2
    th = lambda y: np.tanh(b * (y - 0.5))
    return ShearProfile(
        U=th,
        dU=lambda y: b * sech2(y),
        d2U=lambda y: -2 * b**2 * sech2(y) * th(y),
        d3U=lambda y: 2 * b**3 * sech2(y) * (2 - 3 * sech2(y)),
        d4U=lambda y: 8 * b**4 * sech2(y) * th(y) * (3 * sech2(y) - 1),
        domain=(0.0, 1.0), name="tanh", params={"steepness": b},
    )


def from_table(y_values: np.ndarray, U_values: np.ndarray) -> ShearProfile:
    """Profile from tabulated (y, U) pairs via monotone (PCHIP) interpolation."""
    from scipy.interpolate import PchipInterpolator

    y_values = np.asarray(y_values, dtype=float)
    U_values = np.asarray(U_values, dtype=float)
    if len(y_values) < 4:
        raise ValueError("need at least 4 table rows")
    if np.any(np.diff(y_values) <= 0):
        raise ValueError("table abscissae must be strictly increasing")
    if np.any(np.diff(U_values) <= 0):
        raise NonMonotone("tabulated U is not strictly increasing")
    p = PchipInterpolator(y_values, U_values)
    dp = p.derivative()
    d2p = dp.derivative()
    return ShearProfile(
        U=p, dU=dp, d2U=d2p,
        domain=(float(y_values[0]), float(y_values[-1])), name="table",
    )


_REGISTRY = {
    "couette": couette,
    "quadratic": quadratic,
    "sine": sine,
    "tanh": tanh_profile,
}


def make_profile(name: str, **params) -> ShearProfile:
    """Named profile lookup used by the run configuration."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choices: {sorted(_REGISTRY)}") from None
    return factory(**params)
