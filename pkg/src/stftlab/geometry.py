"""Isoperimetric and spectral geometry of time-frequency densities.

Everything here measures how a nonnegative field W on the TF plane can be
cut: Cheeger quotients over explicit candidate families, overlap connectivity
of two subdomains, the weighted Neumann-Poincare constant of a masked region,
and the certificate that stitches these into a stability bound for phase
retrieval on the region.

Cheeger values are upper bounds by construction (an infimum over a candidate
family is an upper bound for the infimum over all domains) and every report
says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.ndimage import binary_dilation, gaussian_filter
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh

from .grids import TFField, TFGrid
from .norms import riemann_lp
from .transforms import _FOCK_EXP_CLAMP, FockField

__all__ = [
    "DomainMask",
    "CheegerReport",
    "CertificateReport",
    "marching_squares",
    "cheeger_estimate",
    "connectivity",
    "gluing_bound",
    "circle_average",
    "poincare_constant",
    "log_concavity_violation",
    "stability_certificate",
]


# ---------------------------------------------------------------------------
# masks


@dataclass
class DomainMask:
    """Boolean region on a TF grid.

    The boundary is the 0.5-isocontour of the indicator, traced by marching
    squares: a full-grid mask therefore has boundary length 0 (the grid is
    periodic; no outer frame is ever added).
    """

    tfgrid: TFGrid
    inside: np.ndarray

    def __post_init__(self):
        self.inside = np.asarray(self.inside, dtype=bool)
        if self.inside.shape != self.tfgrid.shape:
            raise ValueError(
                f"mask shape {self.inside.shape} does not match grid "
                f"{self.tfgrid.shape}"
            )

    @property
    def cell_count(self) -> int:
        return int(np.count_nonzero(self.inside))

    @property
    def area(self) -> float:
        return self.cell_count * self.tfgrid.cell

    def is_empty(self) -> bool:
        return not self.inside.any()

    def boundary_segments(self) -> np.ndarray:
        """(K, 4) array of segments (x0, y0, x1, y1) tracing the mask edge."""
        xs = self.tfgrid.xgrid.points()
        ys = self.tfgrid.wgrid.points()
        return marching_squares(xs, ys, self.inside.astype(float), 0.5)

    def boundary_length(self) -> float:
        seg = self.boundary_segments()
        if seg.size == 0:
            return 0.0
        return float(np.hypot(seg[:, 2] - seg[:, 0], seg[:, 3] - seg[:, 1]).sum())

    @classmethod
    def full(cls, tfgrid: TFGrid) -> "DomainMask":
        return cls(tfgrid, np.ones(tfgrid.shape, dtype=bool))

    @classmethod
    def disk(cls, tfgrid: TFGrid, center: complex, radius: float) -> "DomainMask":
        x = tfgrid.xmesh()
        w = tfgrid.wmesh()
        rr = (x - center.real) ** 2 + (w - center.imag) ** 2
        return cls(tfgrid, rr <= radius * radius)

    @classmethod
    def half_plane(cls, tfgrid: TFGrid, theta: float, offset: float) -> "DomainMask":
        """Cells with <z, (cos theta, sin theta)> <= offset."""
        x = tfgrid.xmesh()
        w = tfgrid.wmesh()
        proj = math.cos(theta) * x + math.sin(theta) * w
        return cls(tfgrid, proj <= offset)

    @classmethod
    def rectangle(cls, tfgrid: TFGrid, x0: float, x1: float,
                  w0: float, w1: float) -> "DomainMask":
        x = tfgrid.xmesh()
        w = tfgrid.wmesh()
        return cls(tfgrid, (x >= x0) & (x <= x1) & (w >= w0) & (w <= w1))


# ---------------------------------------------------------------------------
# marching squares

# case index bits: 1 = (i, j), 2 = (i+1, j), 4 = (i+1, j+1), 8 = (i, j+1)
# edges: S between corners 1-2, E between 2-4, N between 8-4, W between 1-8
_MS_SEGMENTS = {
    1: [("W", "S")],
    2: [("S", "E")],
    3: [("W", "E")],
    4: [("E", "N")],
    6: [("S", "N")],
    7: [("W", "N")],
    8: [("N", "W")],
    9: [("S", "N")],
    11: [("E", "N")],
    12: [("E", "W")],
    13: [("S", "E")],
    14: [("W", "S")],
}


def marching_squares(xs: np.ndarray, ys: np.ndarray, values: np.ndarray,
                     level: float) -> np.ndarray:
    """Isocontour of a scalar field sampled on a rectilinear grid.

    Returns an (K, 4) array of segments (x0, y0, x1, y1) with linear
    interpolation along cell edges. Saddle cells (two opposite corners above
    the level) are resolved by the bilinear center value, which matches the
    contour of the bilinear interpolant.
    """
    v = np.asarray(values, dtype=float)
    if v.shape != (xs.size, ys.size):
        raise ValueError("values shape does not match the coordinate axes")
    b = v >= level
    case = (
        b[:-1, :-1].astype(np.int8)
        + 2 * b[1:, :-1]
        + 4 * b[1:, 1:]
        + 8 * b[:-1, 1:]
    )
    if not ((case > 0) & (case < 15)).any():
        return np.empty((0, 4))

    x0 = xs[:-1, None]
    x1 = xs[1:, None]
    y0 = ys[None, :-1]
    y1 = ys[None, 1:]
    v00 = v[:-1, :-1]
    v10 = v[1:, :-1]
    v01 = v[:-1, 1:]
    v11 = v[1:, 1:]

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ts = (level - v00) / (v10 - v00)
        te = (level - v10) / (v11 - v10)
        tn = (level - v01) / (v11 - v01)
        tw = (level - v00) / (v01 - v00)
    edge_pts = {
        "S": (x0 + ts * (x1 - x0), np.broadcast_to(y0, ts.shape)),
        "E": (np.broadcast_to(x1, te.shape), y0 + te * (y1 - y0)),
        "N": (x0 + tn * (x1 - x0), np.broadcast_to(y1, tn.shape)),
        "W": (np.broadcast_to(x0, tw.shape), y0 + tw * (y1 - y0)),
    }

    out = []

    def emit(cells, pairs):
        for ea, eb in pairs:
            ax, ay = edge_pts[ea]
            bx, by = edge_pts[eb]
            out.append(np.column_stack([
                ax[cells], ay[cells], bx[cells], by[cells],
            ]))

    for c, pairs in _MS_SEGMENTS.items():
        cells = case == c
        if cells.any():
            emit(cells, pairs)

    for c, inside_corners in ((5, True), (10, False)):
        cells = case == c
        if not cells.any():
            continue
        center_in = (v00 + v10 + v01 + v11) >= 4.0 * level
        # case 5 holds corners 1 and 4; a center above the level joins them,
        # so the contour hugs the two excluded corners (and vice versa)
        joined = cells & (center_in if inside_corners else ~center_in)
        split = cells & ~(center_in if inside_corners else ~center_in)
        emit(joined, [("S", "E"), ("N", "W")])
        emit(split, [("W", "S"), ("E", "N")])

    return np.concatenate(out, axis=0) if out else np.empty((0, 4))


def _bilinear(xs: np.ndarray, ys: np.ndarray, values: np.ndarray,
              px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Bilinear sample of a grid field at arbitrary points; 0 outside."""
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]
    u = (px - xs[0]) / dx
    w = (py - ys[0]) / dy
    iu = np.floor(u).astype(int)
    iw = np.floor(w).astype(int)
    ok = (iu >= 0) & (iu <= xs.size - 2) & (iw >= 0) & (iw <= ys.size - 2)
    iu = np.clip(iu, 0, xs.size - 2)
    iw = np.clip(iw, 0, ys.size - 2)
    fu = u - iu
    fw = w - iw
    v = (
        values[iu, iw] * (1 - fu) * (1 - fw)
        + values[iu + 1, iw] * fu * (1 - fw)
        + values[iu, iw + 1] * (1 - fu) * fw
        + values[iu + 1, iw + 1] * fu * fw
    )
    return np.where(ok, v, 0.0)


# ---------------------------------------------------------------------------
# Cheeger estimate


@dataclass
class CheegerReport:
    """Upper bound on the Cheeger quotient of a density, with its witness.

    value is min over the candidate table of boundary / mass among candidates
    whose mass does not exceed half the total (the half-mass constraint);
    it is an upper bound on the true infimum, never the infimum itself.
    """

    value: float
    witness: DomainMask
    family: str
    params: dict
    total_mass: float
    table: list = field(repr=False, default_factory=list)


def _segment_integral(xs, ys, wvals, segments) -> float:
    if segments.size == 0:
        return 0.0
    mx = 0.5 * (segments[:, 0] + segments[:, 2])
    my = 0.5 * (segments[:, 1] + segments[:, 3])
    lengths = np.hypot(segments[:, 2] - segments[:, 0],
                       segments[:, 3] - segments[:, 1])
    return float(np.sum(_bilinear(xs, ys, wvals, mx, my) * lengths))


def _polyline_integral(xs, ys, wvals, px, py) -> float:
    """Integral of the field along a sampled path (trapezoid in arclength)."""
    seg = np.hypot(np.diff(px), np.diff(py))
    vals = _bilinear(xs, ys, wvals, px, py)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * seg))


def cheeger_estimate(W: TFField, families=("superlevel", "disk", "halfplane"),
                     thresholds: int = 256, smoothing: float = 2.0,
                     centers: int = 9, radii: int = 16,
                     directions: int = 64, offsets: int = 33) -> CheegerReport:
    """Scan candidate domains for a small boundary-to-mass quotient of W.

    Three families: super/sublevel sets of a smoothed copy of W across a
    dyadic threshold ladder, disks on a center-by-radius lattice, and
    half-planes over a direction-by-offset lattice. Boundary integrals use
    bilinear interpolation of the raw W along the candidate boundary; mass
    integrals are Riemann sums of raw W over the candidate; only candidates
    holding at most half the total mass count. smoothing is in cells.
    """
    vals = np.ascontiguousarray(W.values.real, dtype=float)
    if (vals < -1e-12 * max(vals.max(), 1.0)).any():
        raise ValueError("density must be nonnegative")
    vals = np.maximum(vals, 0.0)
    tg = W.tfgrid
    cell = tg.cell
    total = float(vals.sum() * cell)
    if total <= 0.0:
        raise ValueError("zero field has no Cheeger quotient")
    half_cap = 0.5 * total * (1.0 + 1e-6)

    xs = tg.xgrid.points()
    ys = tg.wgrid.points()
    dx = tg.xgrid.dx
    dy = tg.wgrid.dx

    # bounding box of the bulk of the mass, for candidate placement
    bulk = vals >= 1e-3 * vals.max()
    bi, bj = np.nonzero(bulk)
    xlo, xhi = xs[bi.min()], xs[bi.max()]
    ylo, yhi = ys[bj.min()], ys[bj.max()]
    diag = math.hypot(xhi - xlo, yhi - ylo)

    best = None
    table = []

    def consider(familyname, params, boundary, mass, mask):
        nonlocal best
        feasible = 0.0 < mass <= half_cap
        ratio = boundary / mass if mass > 0 else float("inf")
        table.append({
            "family": familyname, **params,
            "boundary": boundary, "mass": mass,
            "ratio": ratio, "feasible": feasible,
        })
        if feasible and (best is None or ratio < best[0]):
            best = (ratio, familyname, params, mask)

    if "superlevel" in families:
        sm = gaussian_filter(vals, sigma=smoothing, mode="constant")
        top = sm.max()
        for k in range(1, thresholds):
            level = top * k / thresholds
            segments = marching_squares(xs, ys, sm, level)
            boundary = _segment_integral(xs, ys, vals, segments)
            above = sm >= level
            mass_above = float(vals[above].sum() * cell)
            consider("superlevel", {"level": level}, boundary,
                     mass_above, above)
            consider("sublevel", {"level": level}, boundary,
                     total - mass_above, ~above)

    if "disk" in families:
        xm = tg.xmesh()
        wm = tg.wmesh()
        cxs = np.linspace(xlo, xhi, centers)
        cys = np.linspace(ylo, yhi, centers)
        rads = np.linspace(2.0 * max(dx, dy), 0.6 * diag, radii)
        for cx in cxs:
            for cy in cys:
                rr = (xm - cx) ** 2 + (wm - cy) ** 2
                for r in rads:
                    npts = max(64, int(4.0 * math.pi * r / max(dx, dy)))
                    th = np.linspace(0.0, 2.0 * math.pi, npts + 1)
                    boundary = _polyline_integral(
                        xs, ys, vals, cx + r * np.cos(th), cy + r * np.sin(th))
                    inside = rr <= r * r
                    mass = float(vals[inside].sum() * cell)
                    consider("disk", {"cx": cx, "cy": cy, "r": r},
                             boundary, mass, inside)
                    consider("diskc", {"cx": cx, "cy": cy, "r": r},
                             boundary, total - mass, ~inside)

    if "halfplane" in families:
        xm = tg.xmesh()
        wm = tg.wmesh()
        span = 0.75 * diag
        tline = np.linspace(-span, span,
                            max(129, int(4.0 * span / max(dx, dy))))
        for k in range(directions):
            theta = 2.0 * math.pi * k / directions
            nx, ny = math.cos(theta), math.sin(theta)
            corners = [nx * cx + ny * cy
                       for cx in (xlo, xhi) for cy in (ylo, yhi)]
            proj = nx * xm + ny * wm
            cands = list(np.linspace(min(corners), max(corners), offsets))
            # the best cut is usually the half-mass one, which falls between
            # lattice offsets; add the largest feasible projection midpoint
            order = np.argsort(proj, axis=None, kind="stable")
            cum = np.cumsum(vals.ravel()[order]) * cell
            split = int(np.searchsorted(cum, 0.5 * total, side="right"))
            if 0 < split < order.size:
                pv = proj.ravel()[order]
                cands.append(0.5 * (pv[split - 1] + pv[split]))
            for c in cands:
                boundary = _polyline_integral(
                    xs, ys, vals, c * nx - tline * ny, c * ny + tline * nx)
                inside = proj <= c
                mass = float(vals[inside].sum() * cell)
                consider("halfplane", {"theta": theta, "offset": c},
                         boundary, mass, inside)

    if best is None:
        raise ValueError("no candidate satisfied the half-mass constraint")
    ratio, famname, params, mask = best
    return CheegerReport(
        value=ratio,
        witness=DomainMask(tg, mask.copy()),
        family=famname,
        params=params,
        total_mass=total,
        table=table,
    )


# ---------------------------------------------------------------------------
# connectivity and gluing


def _masked_l2(vals: np.ndarray, cell: float, mask: np.ndarray) -> float:
    return riemann_lp(np.where(mask, vals, 0.0), cell, 2.0)


def connectivity(W: TFField, A: DomainMask, B: DomainMask) -> float:
    """Overlap quotient ||W||_{L2(A and B)} / (||W||_{L2(A)} + ||W||_{L2(B)}).

    Always in (0, 1/2]; equals 1/2 exactly when A and B agree up to W-null
    cells. The caller is responsible for A and B jointly covering whatever
    domain the quotient is used on.
    """
    if A.tfgrid != W.tfgrid or B.tfgrid != W.tfgrid:
        raise ValueError("masks and field live on different grids")
    vals = np.abs(W.values)
    cell = W.tfgrid.cell
    overlap = A.inside & B.inside
    num = _masked_l2(vals, cell, overlap)
    if num == 0.0:
        raise ValueError("overlap carries no mass")
    den = _masked_l2(vals, cell, A.inside) + _masked_l2(vals, cell, B.inside)
    # a masked sum can exceed its superset by rounding only; the quotient is
    # capped at the exact upper end of its range
    return min(num / den, 0.5)


def gluing_bound(c_a: float, c_b: float, lam: float) -> float:
    """Stability constant of a union from its parts: combine the two local
    constants in quadrature and pay the overlap factor 1/lam + sqrt(2)."""
    if c_a < 0 or c_b < 0:
        raise ValueError("local constants must be nonnegative")
    if lam <= 0:
        raise ValueError("connectivity must be positive")
    return math.hypot(c_a, c_b) * (1.0 / lam + math.sqrt(2.0))


def circle_average(tau_a: complex, tau_b: complex,
                   variant: str = "printed") -> complex:
    """A unimodular representative between two unit phases.

    The default follows the difference formula (tau_a - tau_b) /
    |tau_a - tau_b| (antipodal inputs give i tau_a, equal inputs tau_a).
    That point is NOT equidistant from the inputs in general; the geodesic
    midpoint (tau_a + tau_b) / |tau_a + tau_b|, which is, sits behind
    variant="midpoint".
    """
    for t in (tau_a, tau_b):
        if abs(abs(t) - 1.0) > 1e-9:
            raise ValueError(f"inputs must be unimodular, got |{t}|")
    if variant not in ("printed", "midpoint"):
        raise ValueError(f"unknown variant {variant!r}")
    if abs(tau_a - tau_b) < 1e-12:
        return tau_a
    if abs(tau_a + tau_b) < 1e-12:
        return 1j * tau_a
    if variant == "midpoint":
        s = tau_a + tau_b
        return s / abs(s)
    d = tau_a - tau_b
    return d / abs(d)


# ---------------------------------------------------------------------------
# Poincare constant


def _build_laplacian(mask: DomainMask, weights: np.ndarray):
    """Weighted 5-point Neumann Laplacian and vertex measure on the mask.

    Edge conductances discretize the Dirichlet integral of w |grad u|^2,
    vertex measures the form integral of w |u|^2; the generalized eigenvalue
    problem A u = mu M u then approximates the Neumann spectrum of the
    w-weighted Laplacian on the masked region.
    """
    tg = mask.tfgrid
    dx = tg.xgrid.dx
    dy = tg.wgrid.dx
    inside = mask.inside
    n = int(np.count_nonzero(inside))
    index = -np.ones(inside.shape, dtype=np.int64)
    index[inside] = np.arange(n)

    rows, cols, conds = [], [], []

    def add_edges(sa, sb, coeff):
        pair = inside[sa] & inside[sb]
        ia = index[sa][pair]
        ib = index[sb][pair]
        c = 0.5 * (weights[sa][pair] + weights[sb][pair]) * coeff
        rows.append(ia)
        cols.append(ib)
        conds.append(c)

    add_edges((slice(None, -1), slice(None)), (slice(1, None), slice(None)),
              dy / dx)
    add_edges((slice(None), slice(None, -1)), (slice(None), slice(1, None)),
              dx / dy)

    ia = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    ib = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    cc = np.concatenate(conds) if conds else np.empty(0)

    deg = np.zeros(n)
    np.add.at(deg, ia, cc)
    np.add.at(deg, ib, cc)
    lap = sparse.coo_matrix(
        (np.concatenate([-cc, -cc, deg]),
         (np.concatenate([ia, ib, np.arange(n)]),
          np.concatenate([ib, ia, np.arange(n)]))),
        shape=(n, n),
    ).tocsr()
    measure = weights[inside] * (dx * dy)
    adjacency = sparse.coo_matrix(
        (np.ones(ia.size), (ia, ib)), shape=(n, n))
    return lap, measure, adjacency


def poincare_constant(mask: DomainMask, weight: TFField | None = None,
                      return_report: bool = False):
    """C = 1 / sqrt(mu_1) with mu_1 the smallest nonzero Neumann eigenvalue
    of the weight-conducted grid Laplacian on the mask.

    Disconnected masks have mu_1 = 0 and are reported as C = inf rather than
    raised. Weights are clipped below at 1e-30 (count in the report).
    """
    if mask.is_empty():
        raise ValueError("empty domain")
    if weight is not None and weight.tfgrid != mask.tfgrid:
        raise ValueError("weight lives on a different grid")
    w = (np.abs(weight.values) if weight is not None
         else np.ones(mask.inside.shape))
    clipped = int(np.count_nonzero((w < 1e-30) & mask.inside))
    w = np.maximum(w, 1e-30)

    lap, measure, adjacency = _build_laplacian(mask, w)
    n = measure.size
    report = {"vertices": n, "clipped": clipped, "note": ""}

    ncomp, _ = connected_components(adjacency, directed=False)
    if ncomp > 1:
        report["note"] = f"disconnected ({ncomp} components), C_poinc = inf"
        report["mu1"] = 0.0
        value = float("inf")
        return (value, report) if return_report else value

    # normalize to an ordinary symmetric problem with D = diag(measure^{-1/2})
    if n == 1:
        report["mu1"] = float("inf")
        value = 0.0
        return (value, report) if return_report else value

    dval = 1.0 / np.sqrt(measure)
    if n <= 1024:
        from scipy.linalg import eigh

        sym = lap.toarray() * dval[:, None] * dval[None, :]
        sym = 0.5 * (sym + sym.T)
        evals = eigh(sym, eigvals_only=True, subset_by_index=[0, 1])
        mu1 = float(evals[1])
    else:
        # shift so the constant mode sits at a known positive level, then
        # take the second-smallest eigenvalue by shift-invert at zero
        rows = np.any(mask.inside, axis=1)
        cols = np.any(mask.inside, axis=0)
        pts_x = mask.tfgrid.xgrid.points()[rows]
        pts_y = mask.tfgrid.wgrid.points()[cols]
        diam = math.hypot(pts_x.max() - pts_x.min(),
                          pts_y.max() - pts_y.min())
        shift = 0.1 * math.pi ** 2 / max(diam, 1e-6) ** 2
        mdiag = sparse.diags(measure)
        op = (lap + shift * mdiag).tocsc()
        rng_free = np.cos(0.7 * np.arange(n)) + 1.0
        evals = eigsh(op, k=2, M=mdiag, sigma=0.0, v0=rng_free,
                      return_eigenvectors=False)
        mu1 = float(np.sort(evals)[1] - shift)

    report["mu1"] = mu1
    if mu1 <= 0.0:
        report["note"] = "numerically zero spectral gap, C_poinc = inf"
        value = float("inf")
    else:
        value = 1.0 / math.sqrt(mu1)
    return (value, report) if return_report else value


def log_concavity_violation(density: TFField, floor: float = 1e-6) -> float:
    """Largest negative curvature of -log(density) over the bulk region.

    0.0 certifies the density is log-concave as far as the grid can see
    (finite-difference Hessian positive semidefinite on the region where the
    density exceeds floor * max, eroded so the stencil stays in-region).
    """
    vals = np.abs(density.values.real)
    top = vals.max()
    if top <= 0:
        raise ValueError("zero density")
    region = vals >= floor * top
    phi = -np.log(np.maximum(vals, 1e-300))
    dx = density.tfgrid.xgrid.dx
    dy = density.tfgrid.wgrid.dx
    gx, gy = np.gradient(phi, dx, dy)
    hxx = np.gradient(gx, dx, axis=0)
    hxy = np.gradient(gx, dy, axis=1)
    hyy = np.gradient(gy, dy, axis=1)
    # smallest eigenvalue of the symmetric 2x2 Hessian, pointwise
    half_tr = 0.5 * (hxx + hyy)
    radius = np.sqrt(0.25 * (hxx - hyy) ** 2 + hxy ** 2)
    lam_min = half_tr - radius
    from scipy.ndimage import binary_erosion

    core = binary_erosion(region, iterations=2)
    if not core.any():
        raise ValueError("density support too small for a Hessian estimate")
    worst = float(lam_min[core].min())
    return max(0.0, -worst)


# ---------------------------------------------------------------------------
# stability certificate


@dataclass
class CertificateReport:
    """Measured ingredients of the region-stability estimate.

    t1, t2, t3 are the Gaussian-weighted L^p sizes of the modulus difference,
    the gradient difference, and the log-derivative coupling term; bound is
    poincare * (t1 + t2 + t3) and sound records whether the measured phase
    distance stayed below it.
    """

    t1: float
    t2: float
    t3: float
    poincare: float
    bound: float
    distance: float
    sound: bool
    excised_cells: int
    domain: DomainMask
    poincare_report: dict = field(repr=False, default_factory=dict)


def _winding_zero_cells(values: np.ndarray) -> np.ndarray:
    """Cells adjacent to a plaquette that encloses a zero of the field.

    Zeros of the sampled field rarely land on grid points, so a magnitude
    threshold cannot find them. Two complementary detectors: the
    argument-principle winding (half a turn or more), and a quadrant
    straddle (Re and Im both change sign across the plaquette), which
    covers zeros sitting exactly on a grid line where antipodal phase
    differences make the winding orientation-ambiguous. Exact zeros
    (undefined phase) are flagged directly.
    """
    ph = np.angle(values)

    def dd(a, b):
        d = b - a
        return (d + np.pi) % (2.0 * np.pi) - np.pi

    p00 = ph[:-1, :-1]
    p10 = ph[1:, :-1]
    p11 = ph[1:, 1:]
    p01 = ph[:-1, 1:]
    wind = dd(p00, p10) + dd(p10, p11) + dd(p11, p01) + dd(p01, p00)
    plaq = np.abs(wind) >= 0.9 * np.pi

    def straddles(comp):
        c = np.stack([comp[:-1, :-1], comp[1:, :-1],
                      comp[1:, 1:], comp[:-1, 1:]])
        return (c.min(axis=0) <= 0.0) & (c.max(axis=0) >= 0.0)

    plaq |= straddles(values.real) & straddles(values.imag)

    zeros = np.zeros(values.shape, dtype=bool)
    zeros[:-1, :-1] |= plaq
    zeros[1:, :-1] |= plaq
    zeros[1:, 1:] |= plaq
    zeros[:-1, 1:] |= plaq
    zeros |= values == 0
    return zeros


def _weighted_modulus(f: FockField) -> np.ndarray:
    """|F| e^{-pi |z|^2 / 2}, recovered exactly even where the stored field
    was exponent-clamped (the clamp cancels)."""
    tg = f.field.tfgrid
    x = tg.xmesh()
    w = tg.wmesh()
    expo = np.minimum(np.pi * (x * x + w * w) / 2.0, _FOCK_EXP_CLAMP)
    return np.abs(f.field.values) * np.exp(-expo)


def stability_certificate(f1: FockField, f2: FockField, mask: DomainMask,
                          p: float = 2.0, excise_cells: int = 3,
                          weight_floor: float = 1e-6) -> CertificateReport:
    """Measure the three-term stability estimate on a masked region.

    Zero cells of either field are dilated by excise_cells and removed,
    mirroring the reduction to the zero-free case: the phase difference the
    estimate controls is only single-valued when neither field winds inside
    the domain. All terms are evaluated with the Gaussian weight folded in:
    the substitutions m = |F| e^{-pi|z|^2/2},
    grad|F| e^{-pi|z|^2/2} = grad m + pi z m and grad|F|/|F| =
    grad log m + pi z make every ingredient finite-precision-safe and equal
    to its weighted-measure counterpart exactly.
    """
    if f1.field.tfgrid != f2.field.tfgrid:
        raise ValueError("fields live on different grids")
    if mask.tfgrid != f1.field.tfgrid:
        raise ValueError("mask lives on a different grid")
    if p < 1:
        raise ValueError("p must be >= 1")
    tg = mask.tfgrid
    m1 = _weighted_modulus(f1)
    m2 = _weighted_modulus(f2)
    omega = mask.inside
    if not omega.any():
        raise ValueError("empty domain mask")
    if float(m1[omega].max()) <= 0.0:
        raise ValueError("first field vanishes on the domain")

    zeros = (_winding_zero_cells(f1.field.values)
             | _winding_zero_cells(f2.field.values))
    excised = (binary_dilation(zeros, iterations=excise_cells)
               if zeros.any() else zeros)
    dom = omega & ~excised
    if not dom.any():
        raise ValueError("domain empty after zero excision")
    floor_hits = int(np.count_nonzero(
        dom & (m1 < weight_floor * float(m1[dom].max()))))
    if floor_hits:
        raise ValueError(
            f"field magnitude below {weight_floor:g} of max on "
            f"{floor_hits} cells outside the excised zeros")

    dx = tg.xgrid.dx
    dy = tg.wgrid.dx
    cell = tg.cell
    x = tg.xmesh()
    w = tg.wmesh()

    diff = m1 - m2
    gdx, gdy = np.gradient(diff, dx, dy)
    grad_term = np.hypot(gdx + math.pi * x * diff, gdy + math.pi * w * diff)

    logm1 = np.log(np.maximum(m1, 1e-300))
    lx, ly = np.gradient(logm1, dx, dy)
    log_deriv = np.hypot(lx + math.pi * x, ly + math.pi * w)

    def lp_over(arr):
        return riemann_lp(np.where(dom, arr, 0.0), cell, p)

    t1 = lp_over(diff)
    t2 = lp_over(grad_term)
    t3 = lp_over(log_deriv * np.abs(diff))

    from .norms import LqNorm, phase_inf_distance

    expo = np.minimum(np.pi * (x * x + w * w) / 2.0, _FOCK_EXP_CLAMP)
    damp = np.exp(-expo)
    c1 = TFField(tg, f1.field.values * damp)
    c2 = TFField(tg, f2.field.values * damp)
    distance = phase_inf_distance(c1, c2, LqNorm(p), domain=dom).distance

    cpoinc, preport = poincare_constant(
        DomainMask(tg, dom), TFField(tg, (m1 ** p).astype(np.complex128)),
        return_report=True,
    )
    bound = cpoinc * (t1 + t2 + t3)
    sound = bound >= distance or (bound == 0.0 and distance == 0.0)
    return CertificateReport(
        t1=t1, t2=t2, t3=t3,
        poincare=cpoinc, bound=bound, distance=distance, sound=sound,
        excised_cells=int(np.count_nonzero(excised & omega)),
        domain=DomainMask(tg, dom),
        poincare_report=preport,
    )
