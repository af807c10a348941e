import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stftlab.grids import Signal, TFField, TFGrid, gaussian, make_grid, tf_grid_of
from stftlab.transforms import FockField, fock_polynomial_field, stft, to_fock
from stftlab.geometry import (
    CheegerReport,
    DomainMask,
    cheeger_estimate,
    circle_average,
    connectivity,
    gluing_bound,
    log_concavity_violation,
    marching_squares,
    poincare_constant,
    stability_certificate,
    _winding_zero_cells,
)


@pytest.fixture(scope="module")
def tfg():
    # isotropic 1/16 lattice over [-8, 8)^2
    g = make_grid(16.0, 256)
    return TFGrid(g, g)


@pytest.fixture(scope="module")
def tfg_dual():
    # canonical self-dual TF grid of the 256-point signal grid
    return tf_grid_of(make_grid(16.0, 256))


def radial_field(tg, fn):
    xm, wm = tg.xmesh(), tg.wmesh()
    r = np.sqrt(xm * xm + wm * wm) * np.ones(tg.shape)
    return TFField(tg, fn(r).astype(np.complex128))


@pytest.fixture(scope="module")
def gauss_density(tfg):
    # e^{-pi r^2}, the squared Gaussian weight
    return radial_field(tfg, lambda r: np.exp(-math.pi * r * r))


# ---------------------------------------------------------------------------
# masks


def test_full_mask_has_zero_boundary(tfg):
    full = DomainMask.full(tfg)
    assert full.cell_count == tfg.shape[0] * tfg.shape[1]
    assert full.boundary_length() == 0.0


def test_disk_mask_cell_count_tracks_area(tfg):
    disk = DomainMask.disk(tfg, 0j, 3.0)
    area = disk.cell_count * tfg.cell
    assert abs(area - math.pi * 9.0) < 0.2


def test_rectangle_mask_contains_only_the_box(tfg):
    rect = DomainMask.rectangle(tfg, -1.0, 2.0, 0.5, 1.5)
    xm = tfg.xmesh() * np.ones(tfg.shape)
    wm = tfg.wmesh() * np.ones(tfg.shape)
    assert rect.inside.any()
    assert xm[rect.inside].min() >= -1.0 and xm[rect.inside].max() <= 2.0
    assert wm[rect.inside].min() >= 0.5 and wm[rect.inside].max() <= 1.5


def test_half_plane_through_origin_halves_the_grid(tfg):
    hp = DomainMask.half_plane(tfg, 0.0, 0.0)
    frac = hp.cell_count / (tfg.shape[0] * tfg.shape[1])
    assert abs(frac - 0.5) < 0.01


def test_mask_shape_mismatch_rejected(tfg):
    with pytest.raises(ValueError):
        DomainMask(tfg, np.ones((3, 3), dtype=bool))


def test_empty_mask_reports_empty(tfg):
    m = DomainMask.rectangle(tfg, 50.0, 60.0, 50.0, 60.0)
    assert m.is_empty
    assert m.cell_count == 0


def test_disk_mask_boundary_close_to_circumference(tfg):
    disk = DomainMask.disk(tfg, 0j, 3.0)
    # indicator staircase overshoots the smooth circle, but not wildly
    assert 2 * math.pi * 3.0 <= disk.boundary_length() <= 2 * math.pi * 3.0 * 1.2


# ---------------------------------------------------------------------------
# marching squares


def test_contour_length_of_radial_level_set(tfg):
    xm, wm = tfg.xmesh(), tfg.wmesh()
    r = np.sqrt(xm * xm + wm * wm) * np.ones(tfg.shape)
    segs = marching_squares(tfg.xgrid.points(), tfg.wgrid.points(), r, 2.0)
    length = float(np.hypot(segs[:, 2] - segs[:, 0], segs[:, 3] - segs[:, 1]).sum())
    assert abs(length - 4.0 * math.pi) / (4.0 * math.pi) < 1e-3


def test_contour_of_linear_field_is_a_straight_cut(tfg):
    xm = tfg.xmesh() * np.ones(tfg.shape)
    level = 0.25 + tfg.xgrid.dx / 3.0
    segs = marching_squares(tfg.xgrid.points(), tfg.wgrid.points(), xm, level)
    length = float(np.hypot(segs[:, 2] - segs[:, 0], segs[:, 3] - segs[:, 1]).sum())
    # the lattice of plaquettes spans one cell less than the declared box
    assert length == pytest.approx(tfg.wgrid.length - tfg.wgrid.dx)
    xs = np.concatenate([segs[:, 0], segs[:, 2]])
    assert np.allclose(xs, level, atol=1e-12)


def test_no_contour_when_level_misses_the_range(tfg):
    xm = tfg.xmesh() * np.ones(tfg.shape)
    segs = marching_squares(tfg.xgrid.points(), tfg.wgrid.points(), xm, 100.0)
    assert segs.shape == (0, 4)


def test_saddle_plaquette_emits_two_segments():
    xs = np.array([0.0, 1.0])
    ys = np.array([0.0, 1.0])
    vals = np.array([[1.0, 0.0], [0.0, 1.0]])
    segs = marching_squares(xs, ys, vals, 0.5)
    assert segs.shape[0] == 2


# ---------------------------------------------------------------------------
# Cheeger estimates


def test_gaussian_weight_quotient_near_root_two(tfg):
    W = radial_field(tfg, lambda r: np.exp(-math.pi * r * r / 2.0))
    rep = cheeger_estimate(W)
    assert abs(rep.value - math.sqrt(2.0)) / math.sqrt(2.0) < 0.01


def test_gaussian_density_quotient_refinement_stable(gauss_density):
    rep = cheeger_estimate(gauss_density)
    fine = tf_grid_of(make_grid(16.0, 512))
    rep2 = cheeger_estimate(radial_field(fine, lambda r: np.exp(-math.pi * r * r)))
    assert abs(rep.value - 2.0) / 2.0 < 0.01
    assert abs(rep2.value - rep.value) / rep.value < 0.10


def test_two_bump_quotient_decays_with_separation(tfg):
    xm, wm = tfg.xmesh(), tfg.wmesh()

    def bumps(d):
        v = np.exp(-math.pi * ((xm - d / 2) ** 2 + wm**2)) + np.exp(
            -math.pi * ((xm + d / 2) ** 2 + wm**2)
        )
        return TFField(tfg, v * (1 + 0j) * np.ones(tfg.shape))

    h8 = cheeger_estimate(bumps(8.0)).value
    h10 = cheeger_estimate(bumps(10.0)).value
    assert h8 < math.exp(-(8.0**2) / 16.0)
    assert h10 < h8


def test_plateau_superlevel_cut_beats_all_half_planes(tfg):
    xm, wm = tfg.xmesh(), tfg.wmesh()
    r = np.sqrt(xm * xm + wm * wm) * np.ones(tfg.shape)
    vals = 1.0 / (1.0 + np.exp(8.0 * (r - 1.0))) + 0.045 / (
        1.0 + np.exp(4.0 * (r - 6.0))
    )
    W = TFField(tfg, vals.astype(np.complex128))
    sup = cheeger_estimate(W, families=("superlevel",))
    hp = cheeger_estimate(W, families=("halfplane",))
    assert sup.family == "superlevel"
    assert sup.value < hp.value


def test_cheeger_witness_obeys_half_mass(gauss_density):
    rep = cheeger_estimate(gauss_density)
    vals = gauss_density.values.real
    total = vals.sum() * gauss_density.tfgrid.cell
    witness_mass = vals[rep.witness.inside].sum() * gauss_density.tfgrid.cell
    assert witness_mass <= 0.5 * total * (1.0 + 1e-6)


def test_cheeger_table_records_candidates(gauss_density):
    rep = cheeger_estimate(gauss_density)
    assert isinstance(rep, CheegerReport)
    assert len(rep.table) > 100
    feas = [row["ratio"] for row in rep.table if row["feasible"]]
    assert min(feas) == rep.value


def test_threshold_ladder_refinement_never_increases(gauss_density):
    coarse = cheeger_estimate(gauss_density, families=("superlevel",), thresholds=128)
    fine = cheeger_estimate(gauss_density, families=("superlevel",), thresholds=256)
    assert fine.value <= coarse.value + 1e-12


def test_cheeger_rejects_zero_and_negative_fields(tfg):
    zero = TFField(tfg, np.zeros(tfg.shape, dtype=np.complex128))
    with pytest.raises(ValueError):
        cheeger_estimate(zero)
    neg = TFField(tfg, -np.ones(tfg.shape, dtype=np.complex128))
    with pytest.raises(ValueError):
        cheeger_estimate(neg)


# ---------------------------------------------------------------------------
# connectivity and gluing


def test_connectivity_of_identical_masks_is_exactly_half(tfg, gauss_density):
    A = DomainMask.disk(tfg, 0j, 3.0)
    assert connectivity(gauss_density, A, A) == 0.5


def test_connectivity_matches_strip_quadrature(tfg, gauss_density):
    from scipy.integrate import quad

    A = DomainMask.rectangle(tfg, -8.0, 1.0, -8.0, 7.9)
    B = DomainMask.rectangle(tfg, -1.0, 7.9, -8.0, 7.9)
    lam = connectivity(gauss_density, A, B)

    def m2(lo, hi):
        return quad(lambda t: math.exp(-2 * math.pi * t * t), lo, hi)[0]

    full = m2(-10, 10)
    oracle = math.sqrt(m2(-1, 1) * full) / (
        math.sqrt(m2(-10, 1) * full) + math.sqrt(m2(-1, 10) * full)
    )
    assert abs(lam - oracle) / oracle < 1e-3


def test_connectivity_rejects_massless_overlap(tfg, gauss_density):
    A = DomainMask.rectangle(tfg, -8.0, -2.0, -8.0, 7.9)
    B = DomainMask.rectangle(tfg, 2.0, 7.9, -8.0, 7.9)
    with pytest.raises(ValueError, match="overlap"):
        connectivity(gauss_density, A, B)


def test_connectivity_rejects_foreign_grids(tfg, gauss_density):
    other = TFGrid(make_grid(8.0, 128), make_grid(8.0, 128))
    with pytest.raises(ValueError):
        connectivity(gauss_density, DomainMask.full(other), DomainMask.full(other))


def test_gluing_bound_arithmetic():
    assert gluing_bound(1.0, 1.0, 0.5) == pytest.approx(
        math.sqrt(2.0) * (2.0 + math.sqrt(2.0)), rel=1e-12
    )
    assert gluing_bound(3.0, 4.0, 0.25) == pytest.approx(
        5.0 * (4.0 + math.sqrt(2.0)), rel=1e-12
    )
    assert gluing_bound(0.0, 0.0, 0.3) == 0.0


def test_gluing_bound_rejects_bad_inputs():
    with pytest.raises(ValueError):
        gluing_bound(-1.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        gluing_bound(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        gluing_bound(1.0, 1.0, -0.2)


@given(
    ca=st.floats(0.0, 50.0),
    cb=st.floats(0.0, 50.0),
    lam=st.floats(1e-3, 0.5),
)
def test_gluing_bound_formula_property(ca, cb, lam):
    v = gluing_bound(ca, cb, lam)
    assert v == pytest.approx(math.hypot(ca, cb) * (1.0 / lam + math.sqrt(2.0)))
    # tighter connectivity never worsens the bound
    assert gluing_bound(ca, cb, 0.5) <= v + 1e-12


# ---------------------------------------------------------------------------
# circle averages


def test_circle_average_antipodal_rotates_by_i():
    assert circle_average(1.0, -1.0) == pytest.approx(1j)


def test_circle_average_quarter_turn():
    got = circle_average(1.0, 1j)
    assert got == pytest.approx((1.0 - 1j) / math.sqrt(2.0))


def test_circle_average_equal_inputs_pass_through():
    tau = 0.6 + 0.8j
    assert circle_average(tau, tau) == tau


def test_circle_average_midpoint_variant_is_equidistant():
    m = circle_average(1.0, 1j, variant="midpoint")
    assert abs(abs(m) - 1.0) < 1e-12
    assert abs(abs(m - 1.0) - abs(m - 1j)) < 1e-12


def test_circle_average_rejects_non_unimodular_and_bad_variant():
    with pytest.raises(ValueError, match="unimodular"):
        circle_average(0.5, 1.0)
    with pytest.raises(ValueError, match="variant"):
        circle_average(1.0, -1.0, variant="bogus")


@given(
    a=st.floats(-math.pi, math.pi),
    b=st.floats(-math.pi, math.pi),
    rot=st.floats(-math.pi, math.pi),
)
def test_circle_average_is_unimodular_and_equivariant(a, b, rot):
    ta = complex(math.cos(a), math.sin(a))
    tb = complex(math.cos(b), math.sin(b))
    out = circle_average(ta, tb)
    assert abs(abs(out) - 1.0) < 1e-9
    tr = complex(math.cos(rot), math.sin(rot))
    rotated = circle_average(tr * ta, tr * tb)
    assert rotated == pytest.approx(tr * out, abs=1e-9)


# ---------------------------------------------------------------------------
# Poincare constants


def test_unit_square_spectral_gap_matches_separation(tfg):
    h = tfg.xgrid.dx
    sq = DomainMask.rectangle(tfg, 0.0, 1.0 - h / 2, 0.0, 1.0 - h / 2)
    val, rep = poincare_constant(sq, return_report=True)
    assert abs(rep["mu1"] - math.pi**2) / math.pi**2 < 0.02
    assert val == pytest.approx(1.0 / math.sqrt(rep["mu1"]))


def test_unit_square_gap_on_fine_lattice_within_two_percent():
    g = make_grid(16.0, 2048)  # 1/128 spacing, sparse eigensolve path
    tg = TFGrid(g, g)
    h = g.dx
    sq = DomainMask.rectangle(tg, 0.0, 1.0 - h / 2, 0.0, 1.0 - h / 2)
    assert sq.cell_count == 128 * 128
    _, rep = poincare_constant(sq, return_report=True)
    assert abs(rep["mu1"] - math.pi**2) / math.pi**2 < 0.02


def test_poincare_constant_scales_like_diameter(tfg):
    h = tfg.xgrid.dx
    small = DomainMask.rectangle(tfg, 0.0, 1.0 - h / 2, 0.0, 1.0 - h / 2)
    big = DomainMask.rectangle(tfg, 0.0, 2.0 - h / 2, 0.0, 2.0 - h / 2)
    c1 = poincare_constant(small)
    c2 = poincare_constant(big)
    assert abs(c2 / c1 - 2.0) < 0.05 * 2.0


def test_disconnected_domain_reports_infinity(tfg):
    m = DomainMask.rectangle(tfg, 0.0, 1.0, 0.0, 1.0)
    m.inside |= DomainMask.rectangle(tfg, 3.0, 4.0, 3.0, 4.0).inside
    val, rep = poincare_constant(m, return_report=True)
    assert val == float("inf")
    assert "disconnected" in rep["note"]


def test_single_cell_domain_has_zero_constant(tfg):
    one = DomainMask.rectangle(tfg, 0.0, 0.01, 0.0, 0.01)
    assert one.cell_count == 1
    assert poincare_constant(one) == 0.0


def test_poincare_weight_clipping_is_reported(tfg):
    xm, wm = tfg.xmesh(), tfg.wmesh()
    vals = np.exp(-(xm**2 + wm**2)) * np.ones(tfg.shape)
    i = tfg.xgrid.index_of(0.5)
    j = tfg.wgrid.index_of(0.5)
    vals[i, j] = 0.0
    sq = DomainMask.rectangle(tfg, 0.0, 1.0, 0.0, 1.0)
    _, rep = poincare_constant(sq, TFField(tfg, vals.astype(np.complex128)),
                               return_report=True)
    assert rep["clipped"] == 1


def test_poincare_rejects_empty_and_foreign_grid(tfg):
    with pytest.raises(ValueError, match="empty"):
        poincare_constant(DomainMask.rectangle(tfg, 50.0, 60.0, 50.0, 60.0))
    other = TFGrid(make_grid(8.0, 128), make_grid(8.0, 128))
    sq = DomainMask.rectangle(tfg, 0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        poincare_constant(sq, TFField(other, np.ones(other.shape, np.complex128)))


def test_poincare_grows_as_the_neck_thins(tfg):
    xm, wm = tfg.xmesh(), tfg.wmesh()
    mask = DomainMask.rectangle(tfg, -4.0, 4.0, -2.0, 2.0)
    values = []
    for height in (0.3, 0.1, 0.03):
        ridge = height * np.exp(-4.0 * math.pi * wm**2) * (np.abs(xm) <= 2.0)
        w = (
            np.exp(-math.pi * ((xm - 2.0) ** 2 + wm**2))
            + np.exp(-math.pi * ((xm + 2.0) ** 2 + wm**2))
            + ridge
        ) * np.ones(tfg.shape)
        values.append(poincare_constant(mask, TFField(tfg, w.astype(np.complex128))))
    assert values[0] < values[1] < values[2]


# ---------------------------------------------------------------------------
# log-concavity diagnostic


def test_gaussian_density_has_no_log_concavity_violation(tfg, gauss_density):
    assert log_concavity_violation(gauss_density) == 0.0


def test_two_bump_density_violates_log_concavity(tfg):
    xm, wm = tfg.xmesh(), tfg.wmesh()
    vals = (
        np.exp(-math.pi * ((xm - 1.0) ** 2 + wm**2))
        + np.exp(-math.pi * ((xm + 1.0) ** 2 + wm**2))
    ) * np.ones(tfg.shape)
    v = log_concavity_violation(TFField(tfg, vals.astype(np.complex128)))
    # continuum saddle value is 4 pi^2 - 2 pi
    assert 10.0 < v < 4.0 * math.pi**2


# ---------------------------------------------------------------------------
# zero detection and the stability certificate


def test_winding_detector_flags_roots_on_and_off_grid_lines(tfg_dual):
    for root in (0.4 + 0.0j, 0.4 + 0.025j, -1.0 + 0.8j, 0.375 + 0.0j):
        f, _ = fock_polynomial_field([root], tfg_dual)
        assert _winding_zero_cells(f.field.values).sum() > 0, root


def test_winding_detector_quiet_on_zero_free_field(tfg_dual):
    f = to_fock(stft(gaussian(tfg_dual.xgrid)))
    zeros = _winding_zero_cells(f.field.values)
    # no zeros anywhere the data is trusted
    assert not (zeros & f.trust).any()


def test_certificate_of_identical_fields_is_all_zero(tfg_dual):
    f, _ = fock_polynomial_field([0.4 + 0.3j], tfg_dual)
    mask = DomainMask.disk(tfg_dual, 0j, 2.5)
    rep = stability_certificate(f, f, mask)
    assert rep.t1 == rep.t2 == rep.t3 == 0.0
    assert rep.distance == 0.0 and rep.bound == 0.0
    assert rep.sound


def test_certificate_log_term_vanishes_for_constant_field(tfg_dual):
    grid = tfg_dual.xgrid
    g = gaussian(grid)
    f1 = to_fock(stft(g))
    herm = np.polynomial.hermite_e.hermeval(
        math.sqrt(2.0 * math.pi) * grid.points(), [0.0, 0.0, 1.0]
    )
    pert = g.values * (1.0 + 0.02 * herm)
    pert = pert / math.sqrt(float(np.sum(np.abs(pert) ** 2)) * grid.dx)
    f2 = to_fock(stft(Signal(grid, pert)))
    rep = stability_certificate(f1, f2, DomainMask.disk(tfg_dual, 0j, 2.0))
    assert rep.t3 < 1e-12 * max(rep.t1, 1e-30)
    assert rep.excised_cells == 0
    assert rep.t1 > 0.0 and rep.distance > 0.0
    assert rep.sound


def test_certificate_bounds_distance_for_shifted_root(tfg_dual):
    fa, _ = fock_polynomial_field([0.4 + 0.0j], tfg_dual)
    fb, _ = fock_polynomial_field([0.5 + 0.0j], tfg_dual)
    rep = stability_certificate(fa, fb, DomainMask.disk(tfg_dual, 0j, 2.5))
    assert rep.excised_cells > 0
    assert rep.sound and rep.bound >= rep.distance > 0.0


def test_certificate_handles_multiple_roots(tfg_dual):
    fa, _ = fock_polynomial_field([0.4, -1.0 + 0.8j], tfg_dual)
    fb, _ = fock_polynomial_field([0.45, -1.05 + 0.82j], tfg_dual)
    rep = stability_certificate(fa, fb, DomainMask.disk(tfg_dual, 0j, 2.5))
    assert rep.excised_cells > 40
    assert rep.sound


def test_certificate_rejects_domain_swallowed_by_excision(tfg_dual):
    fa, _ = fock_polynomial_field([0.4 + 0.0j], tfg_dual)
    fb, _ = fock_polynomial_field([0.5 + 0.0j], tfg_dual)
    tiny = DomainMask.disk(tfg_dual, 0.4 + 0j, 0.1)
    with pytest.raises(ValueError, match="excision"):
        stability_certificate(fa, fb, tiny)


def test_certificate_rejects_vanishing_first_field(tfg_dual):
    zero = FockField(
        TFField(tfg_dual, np.zeros(tfg_dual.shape, np.complex128)),
        np.ones(tfg_dual.shape, dtype=bool),
    )
    fb, _ = fock_polynomial_field([0.5 + 0.0j], tfg_dual)
    mask = DomainMask.disk(tfg_dual, 0j, 2.5)
    with pytest.raises(ValueError, match="vanishes"):
        stability_certificate(zero, fb, mask)


def test_certificate_rejects_bad_exponent_and_foreign_grid(tfg_dual):
    fa, _ = fock_polynomial_field([0.4 + 0.0j], tfg_dual)
    mask = DomainMask.disk(tfg_dual, 0j, 2.5)
    with pytest.raises(ValueError):
        stability_certificate(fa, fa, mask, p=0.5)
    other = tf_grid_of(make_grid(16.0, 1024))
    fo, _ = fock_polynomial_field([0.4 + 0.0j], other)
    with pytest.raises(ValueError):
        stability_certificate(fa, fo, mask)


def test_certificate_poincare_weight_follows_first_field(tfg_dual):
    fa, _ = fock_polynomial_field([0.4 + 0.0j], tfg_dual)
    fb, _ = fock_polynomial_field([0.5 + 0.0j], tfg_dual)
    rep = stability_certificate(fa, fb, DomainMask.disk(tfg_dual, 0j, 2.5))
    assert rep.poincare > 0.0
    assert rep.bound == pytest.approx(rep.poincare * (rep.t1 + rep.t2 + rep.t3))
    assert rep.domain.cell_count < DomainMask.disk(tfg_dual, 0j, 2.5).cell_count
