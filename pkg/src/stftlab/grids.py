"""Uniform periodic grids, sampled signals, and their exact symmetries.

Conventions used by every module downstream:

    x_k  = (k - N/2) dx,   dx  = L / N        sample points, k = 0 .. N-1
    xi_m = (m - N/2) dxi,  dxi = 1 / L        frequency points
    F(xi) = dx * sum_k f(x_k) exp(-2 pi i x_k xi)

The model is circular: the grid samples one period of an L-periodic function,
translations and modulations are restricted to grid multiples and are then exact
permutations / unimodular multiplications. All norms are Riemann sums, so the
discrete quantities converge to their continuum counterparts under refinement.
Claims about continuum objects are only meaningful for signals whose mass at the
boundary is negligible; the constructors enforce a 1e-10 decay guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

BOUNDARY_DECAY_TOL = 1e-10

__all__ = [
    "Grid1D",
    "Signal",
    "TFGrid",
    "TFField",
    "make_grid",
    "tf_grid_of",
    "gaussian",
    "hermite",
    "translate",
    "modulate",
    "fourier",
    "inverse_fourier",
    "cdft",
    "icdft",
    "cdft2",
    "icdft2",
    "boundary_decay",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-L/2, L/2) with N samples."""

    length: float
    count: int

    @property
    def dx(self) -> float:
        return self.length / self.count

    @property
    def dxi(self) -> float:
        return 1.0 / self.length

    def points(self) -> np.ndarray:
        return (np.arange(self.count) - self.count // 2) * self.dx

    def frequencies(self) -> np.ndarray:
        return (np.arange(self.count) - self.count // 2) * self.dxi

    def dual(self) -> "Grid1D":
        # extent N * dxi = N / L, same count; dual of the dual is the original grid
        return Grid1D(self.count / self.length, self.count)

    @property
    def is_self_dual(self) -> bool:
        return abs(self.length * self.length - self.count) <= 1e-9 * self.count

    def index_of(self, x: float, what: str = "point") -> int:
        """Index of an on-grid coordinate; raises if x is off-grid."""
        s = x / self.dx
        k = round(s)
        if abs(s - k) > 1e-9 * max(1.0, abs(s)):
            raise ValueError(
                f"{what} {x!r} is not a grid multiple of dx={self.dx!r}; "
                "only on-grid values are supported"
            )
        return int(k) + self.count // 2

    @property
    def nyquist(self) -> float:
        return (self.count // 2) * self.dxi


def make_grid(length: float, count: int) -> Grid1D:
    """Validated Grid1D constructor: L > 0, N even and at least 8."""
    if not np.isfinite(length) or length <= 0:
        raise ValueError(f"grid length must be positive, got {length!r}")
    if int(count) != count or count < 8 or count % 2 != 0:
        raise ValueError(f"grid count must be an even integer >= 8, got {count!r}")
    return Grid1D(float(length), int(count))


@dataclass
class Signal:
    """Complex samples on a Grid1D."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.count,):
            raise ValueError(
                f"signal shape {v.shape} does not match grid count {self.grid.count}"
            )
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("signal contains non-finite values")
        self.values = v

    def copy(self) -> "Signal":
        return Signal(self.grid, self.values.copy())


@dataclass(frozen=True)
class TFGrid:
    """Product grid for time-frequency fields: x-axis times omega-axis."""

    xgrid: Grid1D
    wgrid: Grid1D

    @property
    def cell(self) -> float:
        return self.xgrid.dx * self.wgrid.dx

    def xmesh(self) -> np.ndarray:
        return self.xgrid.points()[:, None]

    def wmesh(self) -> np.ndarray:
        return self.wgrid.points()[None, :]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.xgrid.count, self.wgrid.count)


@dataclass
class TFField:
    """Samples on a TFGrid; values[i, j] lives at (x_i, omega_j).

    Real dtype is allowed (phaseless measurements, weights); complex otherwise.
    """

    tfgrid: TFGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(np.complex128)
        elif v.dtype.kind == "f" and v.dtype != np.float64:
            v = v.astype(np.float64)
        elif v.dtype.kind == "c" and v.dtype != np.complex128:
            v = v.astype(np.complex128)
        if v.shape != self.tfgrid.shape:
            raise ValueError(
                f"field shape {v.shape} does not match tf grid shape {self.tfgrid.shape}"
            )
        if not np.all(np.isfinite(v if v.dtype.kind == "f" else v.view(np.float64))):
            raise ValueError("field contains non-finite values")
        self.values = v


def tf_grid_of(grid: Grid1D) -> TFGrid:
    """Canonical TF grid of a signal grid: x-axis itself, omega-axis its dual."""
    return TFGrid(grid, grid.dual())


def cdft(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Centered DFT along one axis (index k - N/2 <-> frequency index m - N/2).

    Exactly sum_k a_k exp(-2 pi i (k - N/2)(m - N/2) / N) for even N.
    """
    return np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis
    )


def icdft(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Inverse of cdft (includes the 1/N factor)."""
    return np.fft.fftshift(
        np.fft.ifft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis
    )


def cdft2(a: np.ndarray) -> np.ndarray:
    """Centered DFT over both axes of a 2D array."""
    return cdft(cdft(a, axis=0), axis=1)


def icdft2(a: np.ndarray) -> np.ndarray:
    """Inverse of cdft2."""
    return icdft(icdft(a, axis=0), axis=1)


def fourier(f: Signal) -> Signal:
    """Forward transform onto the dual grid; unitary for Riemann-sum L2 norms."""
    return Signal(f.grid.dual(), cdft(f.values) * f.grid.dx)


def inverse_fourier(F: Signal) -> Signal:
    """Inverse of fourier; takes a spectrum on the dual grid back to the primal."""
    primal = F.grid.dual()
    return Signal(primal, icdft(F.values) / primal.dx)


def boundary_decay(f: Signal) -> float:
    """Edge magnitude relative to the peak; small means periodization is harmless."""
    v = np.abs(f.values)
    peak = v.max()
    if peak == 0:
        return 0.0
    return float(max(v[0], v[-1]) / peak)


def gaussian(grid: Grid1D, center: float = 0.0, modulation: float = 0.0) -> Signal:
    """Unit L2-norm Gaussian 2^{1/4} exp(-pi (x-c)^2) exp(2 pi i eta x).

    The center must sit at least 4 units inside the boundary so the periodized
    tails stay below the 1e-10 decay guard.
    """
    half = grid.length / 2.0
    if abs(center) > half - 4.0:
        raise ValueError(
            f"gaussian center {center!r} too close to the boundary of "
            f"[-{half}, {half}); need |center| <= L/2 - 4"
        )
    x = grid.points()
    vals = 2.0**0.25 * np.exp(-np.pi * (x - center) ** 2) * np.exp(
        2j * np.pi * modulation * x
    )
    sig = Signal(grid, vals)
    norm = np.sqrt(grid.dx * np.sum(np.abs(vals) ** 2))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(
            f"grid too coarse for a unit-norm gaussian (measured norm {norm!r})"
        )
    return sig


def hermite(grid: Grid1D, n: int) -> Signal:
    """n-th Hermite function, physicists' polynomials against the exp(-pi x^2)
    weight, normalized to unit L2 norm; hermite(grid, 0) == gaussian(grid)."""
    if int(n) != n or n < 0:
        raise ValueError(f"hermite order must be a nonnegative integer, got {n!r}")
    n = int(n)
    from scipy.special import eval_hermite

    x = grid.points()
    t = np.sqrt(2.0 * np.pi) * x
    # log of (2 pi)^{1/4} / sqrt(2^n n! sqrt(pi))
    logc = 0.25 * np.log(2.0 * np.pi) - 0.5 * (
        n * np.log(2.0) + gammaln(n + 1) + 0.5 * np.log(np.pi)
    )
    vals = np.exp(logc) * eval_hermite(n, t) * np.exp(-np.pi * x**2)
    sig = Signal(grid, vals)
    if boundary_decay(sig) > BOUNDARY_DECAY_TOL:
        raise ValueError(
            f"hermite order {n} does not decay below {BOUNDARY_DECAY_TOL} at the "
            f"grid boundary (edge ratio {boundary_decay(sig):.3e}); enlarge the grid"
        )
    norm = np.sqrt(grid.dx * np.sum(np.abs(vals) ** 2))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(
            f"grid too coarse for hermite({n}) (measured norm {norm!r})"
        )
    return sig


def translate(f: Signal, u: float) -> Signal:
    """Circular translation by an on-grid amount: (T_u f)(x) = f(x - u)."""
    shift = f.grid.index_of(u, "translation") - f.grid.count // 2
    return Signal(f.grid, np.roll(f.values, shift))


def modulate(f: Signal, eta: float) -> Signal:
    """Modulation by an on-grid frequency: (M_eta f)(x) = e^{2 pi i eta x} f(x)."""
    dual = f.grid.dual()
    dual.index_of(eta, "modulation")  # on-grid check against dxi
    return Signal(f.grid, f.values * np.exp(2j * np.pi * eta * f.grid.points()))
