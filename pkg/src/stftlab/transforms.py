"""Short-time Fourier analysis on periodic grids.

The pipeline: window a signal, transform per column, and study the resulting
time-frequency field either directly (modulus, ambiguity function) or through
its holomorphic avatar obtained by stripping the Gaussian weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import (
    Grid1D,
    Signal,
    TFField,
    TFGrid,
    cdft,
    cdft2,
    gaussian,
    hermite,
    icdft,
    modulate,
    tf_grid_of,
    translate,
)
from .norms import japanese_bracket, riemann_lp

__all__ = [
    "WindowSpec",
    "FockField",
    "RecoveryResult",
    "WindowComparison",
    "parse_window",
    "stft",
    "covariance_residual",
    "ambiguity",
    "phaseless",
    "ambiguity_relation_residual",
    "to_fock",
    "fock_cauchy_riemann_residual",
    "fock_key_identity_residual",
    "fock_polynomial_field",
    "recover",
    "window_comparison_ratio",
]


# rows per FFT batch; bounds the (chunk x N) scratch block to a few MB
_STFT_CHUNK = 256

# e^700 is near the top of double range; larger weights are not representable
_FOCK_EXP_CLAMP = 700.0


@dataclass(frozen=True)
class WindowSpec:
    """Analysis window: a named shape or an explicit sampled signal.

    kind is one of "gaussian", "hermite", "sampled". Hermite windows carry
    their order; sampled windows carry the signal itself and must be unit
    L2 norm within 1e-6.
    """

    kind: str = "gaussian"
    order: int = 0
    sample: Signal | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "hermite", "sampled"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind == "hermite":
            if not isinstance(self.order, (int, np.integer)) or self.order < 0:
                raise ValueError("hermite window order must be an integer >= 0")
        if self.kind == "sampled":
            if self.sample is None:
                raise ValueError("sampled window needs a signal")
            nrm = riemann_lp(self.sample.values, self.sample.grid.dx, 2.0)
            if abs(nrm - 1.0) > 1e-6:
                raise ValueError(
                    f"sampled window must be unit norm, got {nrm:.8f}"
                )

    def build(self, grid: Grid1D) -> Signal:
        if self.kind == "gaussian":
            return gaussian(grid)
        if self.kind == "hermite":
            return hermite(grid, self.order)
        if self.sample.grid != grid:
            raise ValueError("sampled window lives on a different grid")
        return self.sample

    @property
    def label(self) -> str:
        if self.kind == "hermite":
            return f"hermite({self.order})"
        return self.kind


def parse_window(text: str) -> WindowSpec:
    """"gaussian" or "hermite:N"."""
    text = text.strip()
    if text == "gaussian":
        return WindowSpec("gaussian")
    if text.startswith("hermite:"):
        arg = text[len("hermite:"):]
        try:
            n = int(arg)
        except ValueError:
            raise ValueError(f"bad hermite order {arg!r}") from None
        return WindowSpec("hermite", order=n)
    raise ValueError(f"bad window spec {text!r}")


def _window_signal(window, grid: Grid1D) -> Signal:
    if isinstance(window, WindowSpec):
        return window.build(grid)
    if isinstance(window, Signal):
        if window.grid != grid:
            raise ValueError("window lives on a different grid")
        return window
    raise TypeError("window must be a WindowSpec or a Signal")


def _stft_values(fv: np.ndarray, wv: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Rows indexed by window center x_i, columns by frequency."""
    n = grid.count
    t = np.arange(n)
    out = np.empty((n, n), dtype=np.complex128)
    for start in range(0, n, _STFT_CHUNK):
        rows = np.arange(start, min(start + _STFT_CHUNK, n))
        idx = (t[None, :] - rows[:, None] + n // 2) % n
        out[rows] = grid.dx * cdft(fv[None, :] * np.conj(wv[idx]), axis=1)
    return out


def stft(f: Signal, window=WindowSpec("gaussian"), tf: TFGrid | None = None) -> TFField:
    """V_w f(x, omega) = integral of f(t) conj(w(t-x)) e^{-2 pi i t omega} dt.

    Row x is the Fourier transform of the windowed slice, so the whole field
    costs one batched FFT pass. With a unit window the map is an L2 isometry
    up to the boundary mass of the fixtures.
    """
    grid = f.grid
    if tf is None:
        tf = tf_grid_of(grid)
    elif tf.xgrid != grid or tf.wgrid != grid.dual():
        raise ValueError("TF grid incompatible with the signal grid")
    w = _window_signal(window, grid)
    return TFField(tf, _stft_values(f.values, w.values, grid))


def covariance_residual(f: Signal, window, u: float, eta: float) -> float:
    """Sup-norm defect of V(T_u M_eta f) = e^{-2 pi i u omega} V f(.-u, .-eta).

    Shifts must be on-grid; then both sides are exact index rolls and the
    residual is pure floating-point noise.
    """
    grid = f.grid
    shifted = translate(modulate(f, eta), u)
    lhs = stft(shifted, window).values
    base = stft(f, window)
    s = grid.index_of(u, "translation") - grid.count // 2
    m = grid.dual().index_of(eta, "modulation") - grid.count // 2
    rolled = np.roll(base.values, (s, m), axis=(0, 1))
    phase = np.exp(-2j * np.pi * u * base.tfgrid.wmesh())
    return float(np.max(np.abs(lhs - phase * rolled)))


def ambiguity(f: Signal) -> TFField:
    """A f(x, omega) = e^{pi i x omega} V_f f(x, omega); A f(0,0) = ||f||^2."""
    tf = tf_grid_of(f.grid)
    v = _stft_values(f.values, f.values, f.grid)
    twist = np.exp(1j * np.pi * tf.xmesh() * tf.wmesh())
    return TFField(tf, twist * v)


def phaseless(f: Signal, window=WindowSpec("gaussian")) -> TFField:
    """|V_w f|^2, the measurement a phase-retrieval problem starts from."""
    v = stft(f, window)
    return TFField(v.tfgrid, np.abs(v.values) ** 2)


def _require_self_dual(tf: TFGrid, what: str) -> None:
    if tf.xgrid != tf.wgrid:
        raise ValueError(
            f"{what} needs a self-dual square TF grid (L^2 = N); "
            f"got axes {tf.xgrid} and {tf.wgrid}"
        )


def _measurement_fourier_side(m: TFField) -> np.ndarray:
    """F(M)(omega, -x) arranged on the (x, omega) grid.

    Axis 0 of the 2D transform runs over the dual of x (= omega axis), axis 1
    over the dual of omega (= x axis); the (omega, -x) evaluation is then an
    index transpose plus a reflection.
    """
    n = m.tfgrid.shape[0]
    f2 = m.tfgrid.cell * cdft2(m.values)
    return f2[:, (n - np.arange(n)) % n].T


def ambiguity_relation_residual(f: Signal, window=WindowSpec("gaussian")) -> float:
    """Relative sup defect of F(|V_w f|^2)(omega, -x) = A f . conj(A w)."""
    w = _window_signal(window, f.grid)
    m = phaseless(f, window)
    _require_self_dual(m.tfgrid, "the ambiguity relation")
    lhs = _measurement_fourier_side(m)
    rhs = ambiguity(f).values * np.conj(ambiguity(w).values)
    den = float(np.max(np.abs(rhs)))
    num = float(np.max(np.abs(lhs - rhs)))
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den


# ---------------------------------------------------------------------------
# Fock-space view


@dataclass(frozen=True)
class FockField:
    """Samples of an entire function F, with the Gaussian weight stripped.

    trust marks where the weighted data was large enough for the unweighted
    sample to mean anything; outside it the values are noise amplified by
    e^{pi |z|^2 / 2} and must not enter any residual.
    """

    field: TFField
    trust: np.ndarray
    weight: str = "exp(-pi|z|^2/2)"

    def __post_init__(self):
        if self.trust.shape != self.field.values.shape:
            raise ValueError("trust mask shape mismatch")


def to_fock(g: TFField, window: WindowSpec = WindowSpec("gaussian")) -> FockField:
    """Strip weight and unimodular twist: F(z) = e^{pi|z|^2/2} e^{-pi i x w} G(x,-w).

    Only a Gaussian window produces a holomorphic F; the convention (sign of
    the twist, reflection in omega) is validated by the Cauchy-Riemann
    residual test rather than taken on faith.
    """
    if window.kind != "gaussian":
        raise ValueError("the Fock view requires a Gaussian window")
    tf = g.tfgrid
    n = tf.shape[1]
    flipped = g.values[:, (n - np.arange(n)) % n]
    x, w = tf.xmesh(), tf.wmesh()
    expo = np.minimum(np.pi * (x * x + w * w) / 2.0, _FOCK_EXP_CLAMP)
    vals = np.exp(expo) * np.exp(-1j * np.pi * x * w) * flipped
    mag = np.abs(flipped)
    trust = (mag >= 1e-6 * float(np.max(mag))) & (
        np.pi * (x * x + w * w) / 2.0 <= _FOCK_EXP_CLAMP
    )
    return FockField(TFField(tf, vals), trust)


def _interior(shape: tuple, margin: int = 2) -> np.ndarray:
    ok = np.zeros(shape, dtype=bool)
    ok[margin:-margin, margin:-margin] = True
    return ok


def _centered_gradients(values: np.ndarray, tf: TFGrid):
    gx = np.gradient(values, tf.xgrid.dx, axis=0)
    gw = np.gradient(values, tf.wgrid.dx, axis=1)
    return gx, gw


def fock_cauchy_riemann_residual(fock: FockField) -> float:
    """Sup of |dF/dx + i dF/dw| over the trusted interior, relative to |F'|.

    Zero (exactly) for numerically constant fields, where no derivative scale
    exists to compare against.
    """
    tf = fock.field.tfgrid
    gx, gw = _centered_gradients(fock.field.values, tf)
    region = fock.trust & _interior(fock.field.values.shape)
    if not region.any():
        raise ValueError("no trusted interior samples")
    scale = max(float(np.max(np.abs(gx[region]))), float(np.max(np.abs(gw[region]))))
    top = float(np.max(np.abs(gx[region] + 1j * gw[region])))
    # numerically constant: total variation across one cell is noise-level
    h = min(tf.xgrid.dx, tf.wgrid.dx)
    if scale * h <= 1e-8 * float(np.max(np.abs(fock.field.values[region]))):
        return 0.0
    return top / scale


def fock_key_identity_residual(fock: FockField) -> float:
    """Defect of |grad|F|| = |F'| where |F| is an honest fraction of its max.

    For holomorphic F the modulus gradient has length exactly |F'|. The
    modulus has a cone at every zero of F, so centered stencils lose their
    accuracy within a couple of cells of one; the region keeps two pixels of
    slack around the sub-threshold set.
    """
    from scipy.ndimage import binary_dilation

    tf = fock.field.tfgrid
    vals = fock.field.values
    fx, _ = _centered_gradients(vals, tf)
    ax, aw = _centered_gradients(np.abs(vals), tf)
    grad_mod = np.hypot(ax, aw)
    deriv = np.abs(fx)
    near_zero = np.abs(vals) <= 1e-3 * float(np.max(np.abs(vals[fock.trust])))
    region = fock.trust & _interior(vals.shape)
    region &= ~binary_dilation(near_zero, iterations=2)
    if not region.any():
        raise ValueError("no usable samples for the gradient identity")
    scale = float(np.max(deriv[region]))
    h = min(tf.xgrid.dx, tf.wgrid.dx)
    if scale * h <= 1e-8 * float(np.max(np.abs(vals[region]))):
        return 0.0
    return float(np.max(np.abs(grad_mod[region] - deriv[region]))) / scale


def fock_polynomial_field(roots, tf: TFGrid) -> tuple[FockField, TFField]:
    """F(z) = prod (z - z_i) together with its Gaussian-weighted field.

    The weighted field F(z) e^{-pi|z|^2/2} must decay below 1e-8 of its peak
    at the grid boundary, otherwise the grid is too small to hold the
    polynomial and periodization would lie.
    """
    x, w = tf.xmesh(), tf.wmesh()
    z = x + 1j * w
    half_x = tf.xgrid.length / 2.0
    half_w = tf.wgrid.length / 2.0
    vals = np.ones(tf.shape, dtype=np.complex128)
    for root in roots:
        root = complex(root)
        if abs(root.real) >= half_x or abs(root.imag) >= half_w:
            raise ValueError(f"root {root} outside the grid interior")
        vals = vals * (z - root)
    weighted = vals * np.exp(-np.pi * (x * x + w * w) / 2.0)
    peak = float(np.max(np.abs(weighted)))
    edge = np.zeros(tf.shape, dtype=bool)
    edge[0, :] = edge[-1, :] = True
    edge[:, 0] = edge[:, -1] = True
    rim = float(np.max(np.abs(weighted[edge])))
    if peak == 0.0 or rim > 1e-8 * peak:
        raise ValueError(
            f"grid too small: boundary mass {rim:.3e} vs peak {peak:.3e}"
        )
    fock = FockField(TFField(tf, vals), np.ones(tf.shape, dtype=bool))
    return fock, TFField(tf, weighted)


# ---------------------------------------------------------------------------
# inversion


@dataclass(frozen=True)
class RecoveryResult:
    signal: Signal
    masked_fraction: float
    threshold: float


def recover(measurement: TFField, window=WindowSpec("gaussian"),
            threshold: float | None = None) -> RecoveryResult:
    """Invert |V_w f|^2 up to a global phase.

    Fourier-transforming the measurement gives A f . conj(A w); dividing off
    the window ambiguity where it is safely nonzero and inverting row-wise
    yields the correlations f(t) conj(f(t - x)). The x = 0 row is |f|^2; the
    column through the modulus peak then determines f up to one phase.

    The division is the unstable step, so it is masked at `threshold`
    (absolute; default 1e-6 of the window ambiguity's peak) and the zeroed
    fraction of the plane is reported.
    """
    tf = measurement.tfgrid
    _require_self_dual(tf, "recovery")
    m = measurement.values
    if not np.any(m):
        raise ValueError("zero measurement")
    grid = tf.xgrid
    w = _window_signal(window, grid)
    amb_w = ambiguity(w).values
    origin = grid.count // 2
    peak = abs(amb_w[origin, origin])
    if threshold is None:
        threshold = 1e-6 * peak
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if peak <= threshold:
        raise ValueError("window ambiguity peak does not clear the threshold")

    mask = np.abs(amb_w) >= threshold
    lhs = _measurement_fourier_side(measurement)
    amb_f = np.zeros_like(lhs)
    np.divide(lhs, np.conj(amb_w), out=amb_f, where=mask)
    masked_fraction = 1.0 - float(np.count_nonzero(mask)) / mask.size

    x, om = tf.xmesh(), tf.wmesh()
    v_ff = np.exp(-1j * np.pi * x * om) * amb_f
    corr = icdft(v_ff, axis=1) / grid.dx

    if not mask[origin].any():
        raise ValueError("threshold masks the entire x = 0 row; lower it")
    power = corr[origin].real
    t0 = int(np.argmax(np.abs(power)))
    amp2 = power[t0]
    if amp2 <= 0:
        raise ValueError("recovered modulus peak is not positive")
    k = np.arange(grid.count)
    rec = corr[(k - t0 + origin) % grid.count, k] / np.sqrt(amp2)
    return RecoveryResult(Signal(grid, rec), masked_fraction, float(threshold))


# ---------------------------------------------------------------------------
# window comparison diagnostic


@dataclass(frozen=True)
class WindowComparison:
    """Growth field <(x,w)> |A_phi / A_Phi| and its grid supremum.

    A finite sup means phase-retrieval stability transfers from phi to Phi
    with at most one extra weight order. sup is infinite exactly when the
    denominator ambiguity vanishes on a grid point (those cells hold 0 in the
    field). A nonempty zeros list (grid dropouts plus sign-change midpoints)
    signals the continuum supremum is infinite even when the grid one is not.
    Zeros are reported, never raised.
    """

    field: TFField
    sup: float
    zeros: np.ndarray


def window_comparison_ratio(phi: WindowSpec, big_phi: WindowSpec,
                            grid: Grid1D) -> WindowComparison:
    a_num = ambiguity(phi.build(grid)).values
    target = ambiguity(big_phi.build(grid))
    a_den = target.values
    tf = target.tfgrid
    bracket = japanese_bracket(np.hypot(tf.xmesh(), tf.wmesh()))

    if np.array_equal(a_num, a_den):
        # identical windows: the ratio is 1 by definition, even where both
        # ambiguities sit below the measurement floor
        zeros = _ambiguity_zero_locus(a_den, tf, np.zeros(tf.shape, dtype=bool))
        return WindowComparison(TFField(tf, bracket.copy()),
                                float(np.max(bracket)), zeros)

    abs_num, abs_den = np.abs(a_num), np.abs(a_den)
    with np.errstate(over="ignore"):
        ratio = np.zeros(tf.shape)
        np.divide(abs_num, abs_den, out=ratio, where=abs_den > 0.0)
    # a cell is a genuine dropout only if the numerator still carries signal
    # there; shared underflow deep in the tails is dynamic range, not a zero
    informative = abs_num > 1e-12 * float(np.max(abs_num))
    genuine = informative & ((abs_den == 0.0) | ~np.isfinite(ratio))
    ratio[~np.isfinite(ratio)] = 0.0
    ratio[abs_den == 0.0] = 0.0
    field = bracket * ratio

    zeros = _ambiguity_zero_locus(a_den, tf, genuine)
    sup = float("inf") if genuine.any() else float(np.max(field))
    return WindowComparison(TFField(tf, field), sup, zeros)


def _ambiguity_zero_locus(a: np.ndarray, tf: TFGrid, dropouts: np.ndarray) -> np.ndarray:
    """Approximate zeros of an ambiguity field: genuine magnitude dropouts
    plus, for numerically real fields, sign changes between neighbors that
    both sit above the noise floor."""
    xs = tf.xgrid.points()
    ws = tf.wgrid.points()
    pts = []
    di, dj = np.nonzero(dropouts)
    for i, j in zip(di, dj):
        pts.append((xs[i], ws[j]))
    re, im = a.real, a.imag
    mag = np.abs(a)
    floor = 1e-12 * float(np.max(mag))
    if np.max(np.abs(im)) <= 1e-9 * np.max(np.abs(re)):
        solid = mag > floor
        hit = (re[:-1, :] * re[1:, :] < 0) & solid[:-1, :] & solid[1:, :]
        fi, fj = np.nonzero(hit)
        for i, j in zip(fi, fj):
            pts.append((0.5 * (xs[i] + xs[i + 1]), ws[j]))
        hit = (re[:, :-1] * re[:, 1:] < 0) & solid[:, :-1] & solid[:, 1:]
        fi, fj = np.nonzero(hit)
        for i, j in zip(fi, fj):
            pts.append((xs[i], 0.5 * (ws[j] + ws[j + 1])))
    if not pts:
        return np.empty((0, 2))
    return np.unique(np.asarray(pts, dtype=float), axis=0)
