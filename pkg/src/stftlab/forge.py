"""Construction of phase-retrieval instability pairs.

The recipe: park scaled copies of a seed bump on a ladder of disjoint annuli,
attach them to the seed with alternating signs, and compare the two resulting
signals. Their moduli agree except for exponentially small overlaps, while the
signals themselves differ by twice the bump tail, so the ratio of
phase-infimum distance to modulus distance blows up geometrically.

The same ladder, driven through modulations instead of translations, yields a
family of signals whose transforms are close yet phase-retrieval-unstable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import Grid1D, Signal, TFField, modulate, translate
from .norms import (
    IntersectionNorm,
    LqNorm,
    Norm,
    NormSpec,
    SobolevNorm,
    XpSigmaNorm,
    ball_lp,
    frac_sobolev_norm,
    japanese_bracket,
    phase_inf_distance,
    riemann_lp,
    tail_weighted_lp,
)
from .transforms import WindowSpec, stft

__all__ = [
    "AnnulusSchedule",
    "InstabilityPair",
    "BoundRow",
    "BoundReport",
    "RatioResult",
    "StftFamily",
    "normalize_seed",
    "select_annulus_schedule",
    "build_bumps",
    "verify_bump_bounds",
    "assemble_pair",
    "instability_ratio",
    "field_instability_ratio",
    "dichotomy_check",
    "verified_window",
    "field_difference",
    "stft_instability_family",
    "lp_reduction_rows",
]


def normalize_seed(h: Signal, p: float, q: float) -> Signal:
    """Recenter a bump at its modulus peak and scale it so the smaller of its
    unit-ball L^p and L^q masses is 1.

    The annulus machinery needs a seed whose unit ball carries order-one mass
    in both comparison norms; everything downstream is calibrated to that.
    """
    grid = h.grid
    peak = int(np.argmax(np.abs(h.values)))
    centered = np.roll(h.values, grid.count // 2 - peak)
    sig = Signal(grid, centered)
    floor = min(ball_lp(sig, p, 1.0), ball_lp(sig, q, 1.0))
    if floor == 0.0:
        raise ValueError("seed has no mass in the unit ball after recentering")
    return Signal(grid, centered / floor)


@dataclass(frozen=True)
class AnnulusSchedule:
    """Ladder of disjoint annuli A_n = {j_n <= |x| <= 2 j_n} for one seed.

    scales[n] = 2^{-(n+1)} <j_n>^{-sigma} is the bump amplitude; tails[n] is
    the seed's measured mass outside |x| >= j_n / 2 in the doubly-weighted
    norm, certified <= 2^{-3(n+1)} during construction. Lists are 0-based;
    rung m corresponds to level n = m + 1.
    """

    seed: Signal
    sigma: float
    p: float
    q: float
    radii: tuple
    scales: tuple
    tails: tuple

    @property
    def n_max(self) -> int:
        return len(self.radii)

    def level(self, n: int) -> int:
        """1-based rung -> list index, with range check."""
        if not 1 <= n <= self.n_max:
            raise ValueError(f"rung {n} outside 1..{self.n_max}")
        return n - 1

    def annulus_mask(self, n: int) -> np.ndarray:
        j = self.radii[self.level(n)]
        r = np.abs(self.seed.grid.points())
        return (r >= j) & (r <= 2 * j)


def _seed_tail(h: Signal, p: float, q: float, sigma: float, cutoff: float) -> float:
    return max(
        tail_weighted_lp(h, p, 2.0 * sigma, cutoff),
        tail_weighted_lp(h, q, sigma, cutoff),
    )


def select_annulus_schedule(h: Signal, sigma: float, p: float, q: float,
                            n_max: int) -> AnnulusSchedule:
    """Choose the smallest even-integer radii j_1 < j_2 < ... with

        2 j_{n-1} < j_n       (annuli disjoint, with a one-unit gap)
        seed tail beyond j_n / 2  <=  2^{-3n}

    and the last annulus inside the grid with 4 units of margin. Radii are
    even integers so that the bump centers (3/2) j_n are integers, hence
    exactly on any grid whose spacing divides 1.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    grid = h.grid
    floor = min(ball_lp(h, p, 1.0), ball_lp(h, q, 1.0))
    if floor < 1.0 - 1e-9:
        raise ValueError(
            f"seed not normalized: unit-ball mass {floor:.6f} < 1; "
            "run normalize_seed first"
        )
    peak = int(np.argmax(np.abs(h.values)))
    if peak != grid.count // 2:
        raise ValueError("seed peak is off-center; run normalize_seed first")

    half = grid.length / 2.0
    radii, scales, tails = [], [], []
    prev = 0
    for n in range(1, n_max + 1):
        j = max(2, 2 * prev + 2)
        bound = 2.0 ** (-3 * n)
        while True:
            if 2 * j + 4 > half:
                need = 2 * (2 * j + 4)
                raise ValueError(
                    f"grid too small for rung {n}: need length >= {need}, "
                    f"have {grid.length:g}"
                )
            t = _seed_tail(h, p, q, sigma, j / 2.0)
            if t <= bound:
                break
            j += 2
        radii.append(j)
        scales.append(2.0 ** (-n) * japanese_bracket(float(j)) ** (-sigma))
        tails.append(t)
        prev = j
    return AnnulusSchedule(h, sigma, p, q, tuple(radii), tuple(scales), tuple(tails))


def build_bumps(schedule: AnnulusSchedule) -> list:
    """eps_n = scale_n . (seed translated to the annulus midpoint (3/2) j_n)."""
    out = []
    for j, scale in zip(schedule.radii, schedule.scales):
        shifted = translate(schedule.seed, 1.5 * j)
        out.append(Signal(shifted.grid, scale * shifted.values))
    return out


def _intersection_norm(schedule: AnnulusSchedule) -> Norm:
    return IntersectionNorm([
        XpSigmaNorm(schedule.p, schedule.sigma),
        LqNorm(schedule.q),
    ])


def _masked(sig: Signal, keep: np.ndarray) -> Signal:
    return Signal(sig.grid, np.where(keep, sig.values, 0.0))


@dataclass(frozen=True)
class BoundRow:
    n: int
    j: float
    gub_lp_ratio: float
    gub_x_scaled: float
    mcb_product: float
    mtb_measured: float
    mtb_ratio: float
    sob_measured: float
    sob_ratio: float


@dataclass(frozen=True)
class BoundReport:
    """Measured forms of the four bump estimates, one row per rung.

    gub_lp_ratio must be 1 to rounding (translation is an exact isometry);
    mcb_product must be >= 1 (one-sided); mtb_ratio and sob_ratio carry the
    implicit constants and must stay <= c_impl.
    """

    rows: list
    c_impl: float = 8.0

    def all_pass(self) -> bool:
        for r in self.rows:
            if abs(r.gub_lp_ratio - 1.0) > 1e-10:
                return False
            # the unit-ball mass is the extreme case of the annulus mass, so
            # equality is attained by design; guard the last ulp of rounding
            if r.mcb_product < 1.0 - 1e-9:
                return False
            if r.gub_x_scaled > self.c_impl:
                return False
            if r.mtb_ratio > self.c_impl or r.sob_ratio > self.c_impl:
                return False
        return True

    def mtb_slopes(self) -> list:
        """log2 of successive measured tail masses; decay rate certificate.

        Once the mass underflows to exact zero the decay is treated as
        infinitely fast (the bound holds with room to spare).
        """
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            if b.mtb_measured == 0.0:
                out.append(float("-inf"))
            elif a.mtb_measured == 0.0:
                out.append(float("inf"))
            else:
                out.append(math.log2(b.mtb_measured / a.mtb_measured))
        return out


def verify_bump_bounds(schedule: AnnulusSchedule, bumps: list,
                       c_impl: float = 8.0) -> BoundReport:
    """Measure the four estimates the construction rests on.

    Per rung n: exact global L^p size of eps_n, its weighted size, the L^q
    mass it keeps on its own annulus, the weighted mass it leaks outside, and
    the worst leakage of earlier bumps into A_n.
    """
    h = schedule.seed
    grid = h.grid
    xnorm = _intersection_norm(schedule)
    h_lp = riemann_lp(h.values, grid.dx, schedule.p)
    rows = []
    for m, eps in enumerate(bumps):
        n = m + 1
        j = schedule.radii[m]
        scale = schedule.scales[m]
        bracket_sig = japanese_bracket(float(j)) ** schedule.sigma
        mask = schedule.annulus_mask(n)

        lp = riemann_lp(eps.values, grid.dx, schedule.p)
        gub_lp_ratio = lp / (scale * h_lp)
        gub_x_scaled = xnorm(eps) * 2.0 ** n

        mcb = riemann_lp(np.where(mask, eps.values, 0.0), grid.dx, schedule.q)
        mcb_product = mcb * 2.0 ** n * bracket_sig

        mtb = xnorm(_masked(eps, ~mask))
        mtb_bound = 2.0 ** (-4 * n) / bracket_sig
        mtb_ratio = mtb / mtb_bound

        sob = 0.0
        for earlier in bumps[:m]:
            sob = max(sob, xnorm(_masked(earlier, mask)))
        sob_bound = 2.0 ** (-3 * n) / bracket_sig
        sob_ratio = sob / sob_bound

        rows.append(BoundRow(n, float(j), gub_lp_ratio, gub_x_scaled,
                             mcb_product, mtb, mtb_ratio, sob, sob_ratio))
    return BoundReport(rows, c_impl)


@dataclass(frozen=True)
class InstabilityPair:
    """k = core + tail, k_n = core - tail: same modulus up to tiny overlap,
    far apart in every phase-blind sense once the tail is nontrivial."""

    k: Signal
    k_n: Signal
    n: int
    delta: float
    core: Signal
    tail: Signal
    target: float

    def __post_init__(self):
        if not np.array_equal(self.k.values, self.core.values + self.tail.values):
            raise ValueError("k must equal core + tail exactly")
        if not np.array_equal(self.k_n.values, self.core.values - self.tail.values):
            raise ValueError("k_n must equal core - tail exactly")


def assemble_pair(schedule: AnnulusSchedule, bumps: list, delta: float,
                  n: int) -> InstabilityPair:
    """core = seed + delta . (bumps up to n); tail = delta . (bumps past n).

    n may equal the ladder length, in which case the tail vanishes and the
    pair is degenerate (k = k_n); instability_ratio reports that rather than
    dividing by zero.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 <= n <= schedule.n_max:
        raise ValueError(f"n must lie in 0..{schedule.n_max}")
    grid = schedule.seed.grid
    core = schedule.seed.values.copy()
    for eps in bumps[:n]:
        core = core + delta * eps.values
    tail = np.zeros(grid.count, dtype=core.dtype)
    for eps in bumps[n:]:
        tail = tail + delta * eps.values
    return InstabilityPair(
        k=Signal(grid, core + tail),
        k_n=Signal(grid, core - tail),
        n=n,
        delta=delta,
        core=Signal(grid, core),
        tail=Signal(grid, tail),
        target=2.0 ** n,
    )


@dataclass(frozen=True)
class RatioResult:
    n: int
    ratio: float
    numerator: float
    denominator: float
    target: float
    saturated: bool
    degenerate: bool

    @property
    def passed(self) -> bool:
        return not self.degenerate and self.ratio >= self.target


def instability_ratio(pair: InstabilityPair, q: float,
                      denominator: Norm) -> RatioResult:
    """inf over unit phases of ||k - lam k_n||_{L^q}, divided by the
    requested norm of |k| - |k_n|.

    The denominator routinely underflows to exact zero once the bump overlaps
    drop below the floating-point floor; with a nonzero numerator that is
    reported as a saturated (infinite) ratio, which certifies the target.
    A zero numerator as well means k_n is a unimodular multiple of k and no
    instability statement can be extracted: degenerate.
    """
    num = phase_inf_distance(pair.k, pair.k_n, LqNorm(q)).distance
    diff = Signal(pair.k.grid,
                  np.abs(pair.k.values) - np.abs(pair.k_n.values))
    den = denominator(diff)
    if den == 0.0:
        if num == 0.0:
            return RatioResult(pair.n, float("nan"), num, den, pair.target,
                               saturated=False, degenerate=True)
        return RatioResult(pair.n, float("inf"), num, den, pair.target,
                           saturated=True, degenerate=False)
    return RatioResult(pair.n, num / den, num, den, pair.target,
                       saturated=False, degenerate=False)


def field_instability_ratio(a: TFField, b: TFField, n: int, q: float,
                            denominator: Norm) -> RatioResult:
    """instability_ratio for a pair of transform-plane fields: phase-infimum
    L^q distance of the fields over the requested norm of |a| - |b|."""
    num = phase_inf_distance(a, b, LqNorm(q)).distance
    diff = TFField(a.tfgrid, np.abs(a.values) - np.abs(b.values))
    den = denominator(diff)
    target = 2.0 ** n
    if den == 0.0:
        if num == 0.0:
            return RatioResult(n, float("nan"), num, den, target,
                               saturated=False, degenerate=True)
        return RatioResult(n, float("inf"), num, den, target,
                           saturated=True, degenerate=False)
    return RatioResult(n, num / den, num, den, target,
                       saturated=False, degenerate=False)


def dichotomy_check(pair: InstabilityPair, schedule: AnnulusSchedule,
                    bumps: list, points: int = 64) -> dict:
    """Far-phase lower bound: for |lam - 1| >= 1/2 the L^q distance
    ||k - lam k_n|| cannot dip below (1/2)||seed|| - 2 delta sum ||eps_j||.

    Checked on a grid of unit phases; returns the measured minimum, the
    floor, and whether the floor is both positive and respected.
    """
    q = schedule.q
    grid = pair.k.grid
    ev = LqNorm(q).pair_evaluator(pair.k, pair.k_n)
    lams = np.exp(2j * np.pi * np.arange(points) / points)
    far = [lam for lam in lams if abs(lam - 1.0) >= 0.5]
    measured = min(ev(lam) for lam in far)
    bump_mass = sum(riemann_lp(e.values, grid.dx, q) for e in bumps)
    floor = 0.5 * riemann_lp(schedule.seed.values, grid.dx, q) \
        - 2.0 * pair.delta * bump_mass
    return {
        "min_far_distance": float(measured),
        "floor": float(floor),
        "passed": bool(floor > 0.0 and measured >= floor),
    }


def verified_window(results: list) -> tuple | None:
    """Largest contiguous suffix of rungs on which every ratio meets its 2^n
    target and the sequence strictly increases; None when even the last rung
    fails. inf < inf counts as not increasing, so at most one saturated rung
    (the last) can sit inside the window."""
    rs = sorted((r for r in results if not r.degenerate), key=lambda r: r.n)
    if not rs or not rs[-1].passed:
        return None
    start = len(rs) - 1
    while start > 0:
        prev, cur = rs[start - 1], rs[start]
        if not prev.passed or prev.n != cur.n - 1 or not prev.ratio < cur.ratio:
            break
        start -= 1
    return (rs[start].n, rs[-1].n)


# ---------------------------------------------------------------------------
# transform-level family


def field_difference(a: TFField, b: TFField) -> TFField:
    """b - a as a field on their (shared) grid."""
    if a.tfgrid != b.tfgrid:
        raise ValueError("fields live on different grids")
    return TFField(a.tfgrid, b.values - a.values)


@dataclass(frozen=True)
class StftFamily:
    """Signals realizing the bump ladder in frequency.

    perturbed carries every bump with a plus sign; flipped[k] carries the
    first k bumps with plus and the rest with minus (flipped[-1] is
    perturbed); truncations[n] carries only the first n bumps (truncations[0]
    is the base). All members are genuine signals, so their transforms are
    exact transform-side families.
    """

    base: Signal
    perturbed: Signal
    flipped: list
    truncations: list
    ladder: tuple
    scales: tuple
    delta: float
    closeness: float
    spec: NormSpec


def _omega_profile(field_values: np.ndarray, wgrid: Grid1D) -> Signal:
    """1D frequency profile of a transform magnitude: column L^2 masses."""
    prof = np.sqrt(np.sum(np.abs(field_values) ** 2, axis=0))
    return Signal(wgrid, prof.astype(np.complex128))


def stft_instability_family(f: Signal, window: WindowSpec, closeness: float,
                            spec: NormSpec, n_max: int,
                            delta: float = 0.1) -> StftFamily:
    """Build f_eps = f + delta . sum 2^{-n} <j_n>^{-r} M_{a_n} f and its
    sign-flipped relatives, with the modulation ladder a_n = (3/2) j_n chosen
    on the frequency profile of V f.

    Modulating the signal translates its transform in frequency, so each term
    parks a copy of V f on its own frequency annulus: the transform-side bump
    construction realized inside the image of the transform. delta is halved
    until the transform moves less than `closeness` in the stronger norm
    W^{s+1/4, p}_r intersect L^q.
    """
    base_field = stft(f, window)
    wgrid = f.grid.dual()
    profile = normalize_seed(_omega_profile(base_field.values, wgrid),
                             spec.p, spec.q)
    schedule = select_annulus_schedule(profile, spec.r, spec.p, spec.q, n_max)
    ladder = tuple(1.5 * j for j in schedule.radii)
    scales = tuple(2.0 ** (-(m + 1)) * japanese_bracket(float(j)) ** (-spec.r)
                   for m, j in enumerate(schedule.radii))

    strong = IntersectionNorm([
        SobolevNorm(spec.s + 0.25, spec.p, spec.r),
        LqNorm(spec.q),
    ])

    mods = [modulate(f, a) for a in ladder]

    for _ in range(60):
        bumps = [delta * s * m.values for s, m in zip(scales, mods)]
        vals = f.values.copy()
        for b in bumps:
            vals = vals + b
        perturbed = Signal(f.grid, vals)
        moved = stft(perturbed, window)
        drift = strong(field_difference(base_field, moved))
        if drift < closeness:
            break
        delta *= 0.5
    else:
        raise ValueError(
            f"could not meet closeness {closeness:g}; achieved {drift:g}"
        )

    flipped = []
    for k in range(n_max + 1):
        vals = f.values.copy()
        for idx, b in enumerate(bumps):
            vals = vals + (b if idx < k else -b)
        flipped.append(Signal(f.grid, vals))
    truncations = []
    for n in range(n_max + 1):
        vals = f.values.copy()
        for b in bumps[:n]:
            vals = vals + b
        truncations.append(Signal(f.grid, vals))

    return StftFamily(f, perturbed, flipped, truncations, ladder, scales,
                      float(delta), float(drift), spec)


def lp_reduction_rows(diff, field_a, field_b, s: float, p: float,
                      delta_prime: float = 0.25, js=range(2, 7)) -> list:
    """Band-split control of a modulus difference:

        ||D||_{W^{s,p}} <= C ( 2^{js} ||D||_{L^p}
                               + 2^{-j d} (||A||_{W^{s+d,p}} + ||B||_{W^{s+d,p}}) )

    with d = delta_prime. One row per j with both sides and the constant the
    inequality would need; the harness pins max(constant) over j.
    """
    lhs = frac_sobolev_norm(diff, s, p)
    high_a = frac_sobolev_norm(field_a, s + delta_prime, p)
    high_b = frac_sobolev_norm(field_b, s + delta_prime, p)
    low = riemann_lp(diff.values, _cell_of(diff), p)
    rows = []
    for j in js:
        rhs = 2.0 ** (j * s) * low + 2.0 ** (-j * delta_prime) * (high_a + high_b)
        rows.append({
            "j": int(j),
            "lhs": float(lhs),
            "low_term": float(2.0 ** (j * s) * low),
            "high_term": float(2.0 ** (-j * delta_prime) * (high_a + high_b)),
            "constant_needed": float(lhs / rhs) if rhs > 0 else float("inf"),
        })
    return rows


def _cell_of(obj) -> float:
    if isinstance(obj, Signal):
        return obj.grid.dx
    return obj.tfgrid.cell
