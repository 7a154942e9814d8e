"""Wall-bounded Chebyshev discretization of [0, 1].

Chebyshev-Gauss-Lobatto collocation supplies spectrally accurate differentiation
and one-sided wall derivatives; Clenshaw-Curtis weights supply quadrature; a
barycentric resampling matrix maps onto 2^m uniform points for torus (DFT) norms.
The oscillatory quadrature ``osc_quadrature`` integrates h(y) e^{i theta y} with the
phase handled exactly (Chebyshev coefficients of h against Jacobi-Anger moments),
so it stays accurate for theta far beyond the collocation resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Grid:
    """Chebyshev-Gauss-Lobatto grid on [0, 1] with dense operators.

    nodes are ascending with nodes[0] = 0 and nodes[-1] = 1, so the boundary rows
    of D1/D2 are the spectrally accurate one-sided wall derivatives.
    """

    nodes: np.ndarray
    n: int
    D1: np.ndarray
    D2: np.ndarray
    quad_weights: np.ndarray
    uniform_nodes: np.ndarray
    uniform_resample: np.ndarray
    m: int
    bary_weights: np.ndarray = field(repr=False, default=None)
    _cheb_transform: np.ndarray = field(repr=False, default=None)

    @property
    def n_uniform(self) -> int:
        return len(self.uniform_nodes)

    def resample(self, u: np.ndarray) -> np.ndarray:
        """Evaluate the interpolant of nodal values u on the uniform grid."""
        return self.uniform_resample @ u

    def interpolate(self, u: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Barycentric evaluation of the interpolant at arbitrary points in [0, 1]."""
        return _bary_matrix(self.nodes, self.bary_weights, np.atleast_1d(targets)) @ u

    def cheb_coefficients(self, u: np.ndarray) -> np.ndarray:
        """Chebyshev coefficients a_m of the interpolant, u(y) = sum a_m T_m(2y-1)."""
        return self._cheb_transform @ u


def _cgl_nodes(n: int) -> np.ndarray:
    j = np.arange(n)
    return (1.0 - np.cos(np.pi * j / (n - 1))) / 2.0


def _bary_weights_cgl(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _diff_matrix(nodes: np.ndarray, w: np.ndarray) -> np.ndarray:
    # barycentric first-derivative matrix with the negative-sum trick
    n = len(nodes)
    dy = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(dy, 1.0)
    D = (w[None, :] / w[:, None]) / dy
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    # polish so the matvec row sums (BLAS order) vanish, not just np.sum's
    for _ in range(2):
        D[np.diag_indices(n)] -= D @ np.ones(n)
    return D


def _clenshaw_curtis(n: int) -> np.ndarray:
    # weights on [0,1] for the ascending CGL nodes; standard FFT-free formula
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    v = np.ones(n - 2)
    if N % 2 == 0:
        w[0] = w[-1] = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[1:-1]) / (4 * k**2 - 1)
        v -= np.cos(N * theta[1:-1]) / (N**2 - 1)
    else:
        w[0] = w[-1] = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[1:-1]) / (4 * k**2 - 1)
    w[1:-1] = 2.0 * v / N
    return w / 2.0


def _bary_matrix(nodes: np.ndarray, w: np.ndarray, targets: np.ndarray) -> np.ndarray:
    diff = targets[:, None] - nodes[None, :]
    exact_row, exact_col = np.nonzero(diff == 0.0)
    diff[exact_row, :] = np.inf  # rows for exact node hits become unit rows below
    B = w[None, :] / diff
    B[exact_row, exact_col] = 1.0
    B /= B.sum(axis=1, keepdims=True)
    return B


def _cheb_transform_matrix(n: int) -> np.ndarray:
    # values at ascending nodes -> Chebyshev coefficients in x = 2y-1.
    # Ascending y-nodes correspond to the reversed standard CGL order.
    N = n - 1
    i = np.arange(n)
    C = np.cos(np.pi * np.outer(i, i) / N)  # C[m, i] = T_m(cos(pi i / N))
    scale = np.full(n, 2.0 / N)
    scale[0] = scale[-1] = 1.0 / N
    inner = np.ones(n)
    inner[0] = inner[-1] = 0.5
    T = (C * inner[None, :]) * scale[:, None]
    return T[:, ::-1]  # reverse: our node j is the standard node N-j


def make_grid(n: int, m: int) -> Grid:
    """Build an n-node CGL grid with a 2^m-point uniform resample target.

    Requires n >= 16 and 2^m >= n. Construction self-checks: D1 annihilates
    constants, the weights integrate 1 exactly, and D1 differentiates a
    degree-(n-2) Chebyshev polynomial to 1e-9 relative accuracy.
    """
    if n < 16:
        raise ValueError(f"need n >= 16 nodes, got {n}")
    n_uniform = 2**m
    if n_uniform < n:
        raise ValueError(f"uniform resolution 2^{m}={n_uniform} must be >= n={n}")

    nodes = _cgl_nodes(n)
    bw = _bary_weights_cgl(n)
    D1 = _diff_matrix(nodes, bw)
    D2 = D1 @ D1
    qw = _clenshaw_curtis(n)
    uniform = np.arange(n_uniform) / n_uniform
    R = _bary_matrix(nodes, bw, uniform)
    grid = Grid(
        nodes=nodes, n=n, D1=D1, D2=D2, quad_weights=qw,
        uniform_nodes=uniform, uniform_resample=R, m=m,
        bary_weights=bw, _cheb_transform=_cheb_transform_matrix(n),
    )

    err_const = np.max(np.abs(D1 @ np.ones(n)))
    if err_const > max(1e-12, 2e-16 * n**2):
        raise AssertionError(f"D1 on constants: {err_const:.2e}")
    err_quad = abs(qw.sum() - 1.0)
    if err_quad > 1e-12:
        raise AssertionError(f"quadrature of 1: {err_quad:.2e}")
    deg = min(n - 2, 256)
    p, dp = _cheb_poly_and_derivative(deg, nodes)
    rel = np.max(np.abs(D1 @ p - dp)) / max(1.0, np.max(np.abs(dp)))
    if rel > 1e-9:
        raise AssertionError(f"D1 on degree-{deg} polynomial: rel err {rel:.2e}")
    return grid


def _cheb_poly_and_derivative(deg: int, y: np.ndarray):
    x = 2.0 * y - 1.0
    theta = np.arccos(np.clip(x, -1.0, 1.0))
    p = np.cos(deg * theta)
    # T_deg'(x) = deg * U_{deg-1}(x); chain rule for y in [0,1] gives factor 2
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.sin(deg * theta) / np.sin(theta)
    u[0] = deg * (-1.0) ** (deg + 1)   # x = -1 endpoint
    u[-1] = float(deg)                 # x = +1 endpoint
    dp = 2.0 * deg * u
    return p, dp


def inner_product(u: np.ndarray, v: np.ndarray, grid: Grid) -> complex:
    """L2 pairing  sum w_i conj(u_i) v_i,  conjugate-linear in the first slot."""
    if len(u) != len(v) or len(u) != grid.n:
        raise ValueError("inner_product: length mismatch")
    return complex(np.sum(grid.quad_weights * np.conj(u) * v))


def dft_coefficients(u: np.ndarray) -> np.ndarray:
    """Fourier coefficients of uniform samples on the unit torus.

    Normalization is u_hat_n ~ int u(y) e^{-2 pi i n y} dy, so Parseval reads
    sum |u_hat_n|^2 = (1/N) sum |u_j|^2. Frequencies are in np.fft.fft order.
    """
    N = len(u)
    if N & (N - 1) != 0:
        raise ValueError(f"dft_coefficients: length {N} is not a power of two")
    return np.fft.fft(u) / N


def dft_frequencies(N: int) -> np.ndarray:
    """Integer frequencies matching dft_coefficients order."""
    return np.fft.fftfreq(N, d=1.0 / N).astype(int)


def _bessel_sequence(R: int, omega: float) -> np.ndarray:
    """J_r(omega) for r = 0..R via the FFT of e^{i omega sin(phi)}.

    The Jacobi-Anger series is the Fourier series of e^{i omega sin(phi)}; with
    M >= 2R + margin sample points the aliasing error is below J_{M-R}(omega),
    which is negligible once M - R exceeds omega.
    """
    M = 1 << int(np.ceil(np.log2(max(2 * R + 64, 2.5 * omega + 64))))
    phi = 2 * np.pi * np.arange(M) / M
    coeff = np.fft.fft(np.exp(1j * omega * np.sin(phi))) / M
    return np.real(coeff[: R + 1])  # J_r real for real omega


def cheb_osc_moments(n_coeff: int, omega: float) -> np.ndarray:
    """Moments M_m = int_{-1}^{1} T_m(x) e^{i omega x} dx for m < n_coeff.

    Jacobi-Anger expansion e^{i omega x} = J_0 + 2 sum i^r J_r(omega) T_r(x),
    combined with the exact values of int T_a T_b dx. Accurate uniformly in omega.
    """
    if omega < 0:
        return np.conj(cheb_osc_moments(n_coeff, -omega))
    R = int(omega + 12 * max(1.0, omega ** (1.0 / 3.0)) + 20)
    r = np.arange(R + 1)
    coeff = _bessel_sequence(R, omega) * (1j**r)
    coeff[1:] *= 2.0
    qmax = n_coeff - 1 + R
    q = np.arange(qmax + 1)
    Ivec = np.zeros(qmax + 1)
    even = q % 2 == 0
    Ivec[even] = 2.0 / (1.0 - q[even].astype(float) ** 2)
    mm = np.arange(n_coeff)[:, None]
    rr = r[None, :]
    M = 0.5 * ((Ivec[mm + rr] + Ivec[np.abs(mm - rr)]) @ coeff)
    return M


def osc_quadrature(h: np.ndarray, theta: float, grid: Grid,
                   moments: np.ndarray | None = None) -> complex:
    """int_0^1 h(y) e^{i theta y} dy from nodal samples of a smooth amplitude h.

    The phase is treated exactly, so only h must be resolved by the grid;
    accuracy does not degrade for |theta| beyond the collocation limit.
    """
    a = grid.cheb_coefficients(np.asarray(h, dtype=complex))
    omega = theta / 2.0
    if moments is None:
        moments = cheb_osc_moments(grid.n, omega)
    return complex(0.5 * np.exp(1j * omega) * (a @ moments))
