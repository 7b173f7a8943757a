import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import naive_sf_1d, naive_sf_3d
from specrescale.diagnostics import (
    StructureFunctionTable,
    average_over_cycles,
    bkm_integral,
    core_range,
    fit_blowup_exponent,
    fit_power_law,
    structure_function_1d,
    structure_function_3d,
    translate_to_original_scale,
)
from specrescale.errors import (
    EmptySeries,
    InconsistentTables,
    InsufficientPoints,
    NonGridSeparation,
    NonPositiveValues,
)
from specrescale.rescale import SAMPLE_DTYPE, CycleLedger
from specrescale.spectral import Grid, PhysicalField


def _field1d(values):
    return PhysicalField(Grid(1, len(values)), np.asarray(values)[None])


def test_constant_field_gives_zero():
    g = Grid(1, 32)
    r = np.arange(17) * g.spacing
    for n in range(2, 6):
        assert np.all(structure_function_1d(_field1d(np.full(32, 3.0)), n, r).values == 0)
    g3 = Grid(3, 8)
    for flavor in ("scalar-axis", "longitudinal", "transverse"):
        t = structure_function_3d(PhysicalField(g3, np.ones((3, 8, 8, 8))), 2, [0, g3.spacing], flavor)
        assert np.all(t.values == 0)


def test_cosine_structure_functions():
    g = Grid(1, 64)
    x = g.coordinates()
    r = np.arange(33) * g.spacing
    u = _field1d(np.cos(x))
    assert np.allclose(structure_function_1d(u, 2, r).values, 1 - np.cos(r), atol=1e-14)
    assert np.allclose(structure_function_1d(u, 3, r).values, 0, atol=1e-14)
    assert np.allclose(structure_function_1d(u, 4, r).values, naive_sf_1d(np.cos(x), 4, range(33)), atol=1e-14)


@pytest.mark.parametrize("n_grid", [8, 16, 32])
def test_1d_matches_naive_double_loop(n_grid):
    u = np.random.default_rng(n_grid).standard_normal(n_grid)
    r = np.arange(n_grid // 2 + 1) * 2 * np.pi / n_grid
    for n in range(2, 6):
        got = structure_function_1d(_field1d(u), n, r).values
        assert np.allclose(got, naive_sf_1d(u, n, range(n_grid // 2 + 1)), rtol=0, atol=1e-12)


@pytest.mark.parametrize("flavor", ["scalar-axis", "longitudinal", "transverse"])
def test_3d_matches_naive_loop(flavor):
    g = Grid(3, 8)
    u = np.random.default_rng(1).standard_normal((3, 8, 8, 8))
    for n in (2, 3):
        got = structure_function_3d(PhysicalField(g, u), n, np.arange(5) * g.spacing, flavor).values
        assert np.allclose(got, naive_sf_3d(u, n, range(5), flavor), rtol=0, atol=1e-12)


def test_shear_wave_flavors():
    g = Grid(3, 16)
    x1, x2, x3 = g.mesh()
    u = np.stack([0 * x1, np.sin(x1), 0 * x1])
    f = PhysicalField(g, u)
    r = np.arange(9) * g.spacing
    # only shifts along e1 change the field; the axis average divides by 3
    lon = structure_function_3d(f, 2, r, "longitudinal").values
    tra = structure_function_3d(f, 2, r, "transverse").values
    full = structure_function_3d(f, 2, r, "scalar-axis").values
    assert np.allclose(lon, 0, atol=1e-15)
    assert np.allclose(tra, (1 - np.cos(r)) / 2 / 3, atol=1e-14)
    assert np.allclose(full, naive_sf_3d(u, 2, range(9), "scalar-axis"), atol=1e-14)


def test_non_grid_separation():
    with pytest.raises(NonGridSeparation):
        structure_function_1d(_field1d(np.zeros(16)), 2, [0.1])
    with pytest.raises(NonGridSeparation):
        structure_function_3d(PhysicalField(Grid(3, 8), np.zeros((3, 8, 8, 8))), 2, [0.5])


def test_window_restricts_base_points():
    u = np.zeros(32)
    u[16:] = 1.0
    r = [2 * np.pi / 32]
    full = structure_function_1d(_field1d(u), 2, r).values[0]
    near = structure_function_1d(_field1d(u), 2, r, window=(15, 2)).values[0]
    assert full == pytest.approx(2 / 32)  # two jumps, at 15->16 and 31->0
    assert near == pytest.approx(1 / 5)


@given(seed=st.integers(0, 10_000), n_grid=st.sampled_from([16, 32, 64]))
def test_table_invariants_on_random_fields(seed, n_grid):
    u = _field1d(np.random.default_rng(seed).standard_normal(n_grid))
    r = np.arange(n_grid // 2 + 1) * 2 * np.pi / n_grid
    s2, s3, s4 = (structure_function_1d(u, n, r).values for n in (2, 3, 4))
    assert s2[0] == s3[0] == s4[0] == 0
    assert np.all(s2 >= 0) and np.all(s4 >= 0)
    assert np.all(s3**2 <= s2 * s4 * (1 + 1e-12) + 1e-300)


def test_translate_to_original_scale():
    t = StructureFunctionTable(2, [0.0, 1.0, 2.0], [0.0, 1.0, 4.0])
    assert np.array_equal(translate_to_original_scale(t, 0).r, t.r)
    tr = translate_to_original_scale(t, 2)
    assert tr.r[1] == pytest.approx(9 / 16)
    assert np.array_equal(tr.values, t.values) and tr.frame == "original"


def test_average_identical_and_two_point():
    r = np.linspace(0, 1, 6)
    s = r**1.5
    same = [StructureFunctionTable(2, r, s, cycle=i) for i in range(1, 4)]
    avg = average_over_cycles(same)
    assert np.allclose(avg.values, s) and np.allclose(avg.variance, 0, atol=1e-30)
    pair = [StructureFunctionTable(2, r, s, cycle=1), StructureFunctionTable(2, r, 3 * s, cycle=2)]
    avg = average_over_cycles(pair)
    assert np.allclose(avg.values, 2 * s)
    assert np.allclose(avg.variance, 2 * s**2)  # ((s-2s)^2 + (3s-2s)^2) / (2-1)
    assert avg.cycle == "averaged" and avg.cycles_used == (1, 2)


def test_average_excludes_cycle0():
    r = np.linspace(0, 1, 6)
    tables = [StructureFunctionTable(2, r, np.full(6, 100.0), cycle=0),
              StructureFunctionTable(2, r, np.ones(6), cycle=1)]
    assert np.all(average_over_cycles(tables).values == 1)
    assert np.all(average_over_cycles(tables, exclude_cycle0=False).values == 50.5)


def test_average_rejects_mismatched_tables():
    r = np.linspace(0, 1, 6)
    with pytest.raises(InconsistentTables):
        average_over_cycles([StructureFunctionTable(2, r, r, cycle=1), StructureFunctionTable(3, r, r, cycle=2)])
    with pytest.raises(InconsistentTables):
        average_over_cycles([StructureFunctionTable(2, r, r, cycle=1), StructureFunctionTable(2, 2 * r, r, cycle=2)])


def test_fit_exact_power_law():
    r = np.linspace(0.1, 2, 20)
    fit = fit_power_law(StructureFunctionTable(2, r, 2 * r**1.5), (0.1, 2))
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(2), abs=1e-12)
    # exact data leaves only roundoff residuals, whose square root sets the floor
    assert fit.slope_stderr < 1e-7 and fit.n_points == 20


def test_fit_small_r_of_cosine():
    r = np.linspace(0.01, 0.1, 10)
    assert fit_power_law(StructureFunctionTable(2, r, 1 - np.cos(r)), (0.01, 0.1)).slope == pytest.approx(2, abs=1e-3)


def test_fit_odd_order_sign_and_errors():
    r = np.linspace(0.1, 1, 10)
    fit = fit_power_law(StructureFunctionTable(3, r, -r), (0, 1))
    assert fit.sign == -1 and fit.slope == pytest.approx(1)
    bad = -r.copy()
    bad[3] = 0.0
    with pytest.raises(NonPositiveValues):
        fit_power_law(StructureFunctionTable(3, r, bad), (0, 1))
    with pytest.raises(InsufficientPoints):
        fit_power_law(StructureFunctionTable(2, r, r), (0.1, 0.4))


def test_fit_recovers_planted_slopes_with_noise():
    rng = np.random.default_rng(2024)
    r = np.geomspace(0.05, 1.0, 20)
    hits = 0
    trials = 400
    for _ in range(trials):
        slope = rng.uniform(0.3, 2.0)
        s = 0.7 * r**slope * (1 + 0.01 * rng.standard_normal(r.size))
        fit = fit_power_law(StructureFunctionTable(2, r, s), (0.05, 1.0))
        hits += abs(fit.slope - slope) <= 3 * fit.slope_stderr
    assert hits / trials >= 0.95


def test_core_range_on_broken_power_law():
    r = np.arange(1, 31) * 0.05
    s = np.where(r <= 1.0, r, r**3)  # slope 1 on 20 points, then slope 3 on 10
    lo, hi = core_range(StructureFunctionTable(2, r, s))
    assert lo == pytest.approx(0.05) and 0.9 <= hi <= 1.0
    lo, hi = core_range(StructureFunctionTable(2, r, s), r_max=0.5)
    assert hi <= 0.5


def _samples(t, w, cycles=None):
    a = np.zeros(len(t), dtype=SAMPLE_DTYPE)
    a["t_original"] = t
    a["max_vorticity_component"] = w
    a["cycle"] = 0 if cycles is None else cycles
    return a


def test_bkm_trapezoid_identities():
    led = CycleLedger()
    assert bkm_integral(led, _samples(np.linspace(0, 3, 7), np.full(7, 2.5))) == pytest.approx(7.5)
    assert bkm_integral(led, _samples([1.0, 1.5], [2.0, 6.0])) == pytest.approx(0.5 * (2 + 6) / 2)
    with pytest.raises(EmptySeries):
        bkm_integral(led, _samples([], []))


def test_bkm_scales_local_vorticity_by_cycle():
    led = CycleLedger()
    s = _samples([0.0, 1.0], [3.0, 3.0], cycles=[2, 2])
    assert bkm_integral(led, s) == pytest.approx(3.0 * (4 / 3) ** 2)


@given(seed=st.integers(0, 10_000))
def test_bkm_invariant_under_midpoint_refinement(seed):
    rng = np.random.default_rng(seed)
    t = np.cumsum(rng.uniform(0.01, 1, 12))
    w = rng.uniform(0.1, 10, 12)
    tm = np.sort(np.r_[t, 0.5 * (t[1:] + t[:-1])])
    wm = np.interp(tm, t, w)
    led = CycleLedger()
    assert bkm_integral(led, _samples(tm, wm)) == pytest.approx(bkm_integral(led, _samples(t, w)), rel=1e-13)


def test_blowup_exponent_on_synthetic_power_laws():
    t = np.linspace(0, 0.99, 500)
    fit = fit_blowup_exponent(t, 1 / (1 - t), 1.0, 200)
    assert fit.zeta == pytest.approx(1.0, abs=1e-10) and fit.points_used == 200
    fit = fit_blowup_exponent(t, 5 * (1 - t) ** -1.5, 1.0, 300)
    assert fit.zeta == pytest.approx(1.5, abs=1e-10)
    assert fit.intercept == pytest.approx(np.log(5), abs=1e-10)


def test_blowup_drops_samples_past_T_and_needs_points():
    t = np.linspace(0, 2, 50)
    fit = fit_blowup_exponent(t, 1 / np.abs(1.5 - t + 1e-9), 1.5, 10)
    assert fit.points_used == 10
    with pytest.raises(InsufficientPoints):
        fit_blowup_exponent(t[:3], np.ones(3), 1.5, 10)
