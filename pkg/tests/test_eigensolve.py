"""Eigensolver tests: exact spectra, an independent dense-grid oracle,
discretization invariants, and persistence.

The quartic reference values 3.799673029801394 and 11.644745511378 were
frozen from 40-digit variational computations; the inline ``oracle_level``
below re-derives them with nothing shared with the package solver except
the textbook recurrence.
"""

import json
import math

import numpy as np
import pytest

from specprobe import eigensolve as es
from specprobe.errors import ConsistencyError
from specprobe.potential import Channel, PotentialModel, effective_potential
from specprobe.specfun import integrate_sqrt_singular

QUARTIC = PotentialModel.pure(4, 1.0)
HARMONIC = PotentialModel.pure(2, 1.0, harmonic=True)
CH30 = Channel(3, 0)

QUARTIC_L0 = 3.799673029801394
QUARTIC_L1 = 11.644745511378


def oracle_level(level, r_min=1e-5, r_max=6.0, h=2e-4):
    """Brute-force quartic d=3 n=0 eigenvalue by node-count bisection."""
    n = int(round((r_max - r_min) / h)) + 1
    r = r_min + h * np.arange(n)
    u = r**4

    def count(lam):
        w = (1.0 + (h * h / 12.0) * (lam - u)).tolist()
        y0, y1 = r_min, r_min + h
        nodes = 0
        for i in range(1, n - 1):
            y2 = ((12.0 - 10.0 * w[i]) * y1 - w[i - 1] * y0) / w[i + 1]
            if y1 * y2 < 0.0:
                nodes += 1
            y0, y1 = y1, y2
        return nodes

    lo, hi = 0.5, 80.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if count(mid) <= level:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


@pytest.fixture(scope="module")
def osc_table():
    return es.solve_spectrum(CH30, HARMONIC, 20)


@pytest.fixture(scope="module")
def quartic_table():
    return es.solve_spectrum(CH30, QUARTIC, 12)


class TestBuildGrid:
    def test_oscillator_example(self):
        grid = es.build_grid(CH30, HARMONIC, 43.0)
        big_t = math.sqrt(43.0)
        assert grid.r_max > big_t
        decay = integrate_sqrt_singular(
            lambda r: np.sqrt(np.maximum(np.asarray(r) ** 2 - 43.0, 0.0)),
            big_t,
            grid.r_max,
            "left",
            1e-8,
        )
        assert decay >= 35.0

    def test_quartic_decay_margin(self):
        grid = es.build_grid(CH30, QUARTIC, 16.0)
        decay = integrate_sqrt_singular(
            lambda r: np.sqrt(np.maximum(np.asarray(r) ** 4 - 16.0, 0.0)),
            2.0,
            grid.r_max,
            "left",
            1e-8,
        )
        assert decay >= 35.0
        assert 2.0 < grid.r_max < 8.0

    def test_structural_contract(self):
        grid = es.build_grid(CH30, QUARTIC, 16.0)
        assert grid.n_points % 2 == 1
        assert (grid.n_points - 1) >= 1000
        assert grid.r_min <= min(1e-3, 0.1 * 16.0**-0.25)
        assert grid.h <= 2.0 * math.pi / (40.0 * 4.0)
        k1 = grid.index_of(1.0)
        assert grid.r[k1] == pytest.approx(1.0, abs=1e-12)

    def test_step_halves_when_lam_quadruples(self):
        h1 = es.build_grid(CH30, QUARTIC, 100.0).h
        h4 = es.build_grid(CH30, QUARTIC, 400.0).h
        assert h4 <= 0.55 * h1

    def test_below_minimum_rejected(self):
        with pytest.raises(ValueError):
            es.build_grid(Channel(3, 1), QUARTIC, 2.0)

    def test_option_floors(self):
        with pytest.raises(ValueError):
            es.build_grid(CH30, QUARTIC, 16.0, points_per_wavelength=20.0)
        with pytest.raises(ValueError):
            es.build_grid(CH30, QUARTIC, 16.0, decay_margin=1.0)

    def test_simpson_weights_integrate_quadratics(self):
        grid = es.build_grid(CH30, QUARTIC, 16.0)
        exact = (grid.r_max**3 - grid.r_min**3) / 3.0
        assert float(grid.simpson_weights @ grid.r**2) == pytest.approx(exact, rel=1e-12)

    def test_off_grid_radius_rejected(self):
        grid = es.build_grid(CH30, QUARTIC, 16.0)
        with pytest.raises(ValueError):
            grid.index_of(1.0 + 0.3 * grid.h)


class TestBoundarySeries:
    def test_half_order_closed_form(self):
        lam = 9.0
        for r in (0.05, 0.3, 1.1):
            expect = math.sqrt(2.0 / (math.pi * math.sqrt(lam))) * math.sin(
                r * math.sqrt(lam)
            )
            got = es.boundary_series_small_r(CH30, lam, r)
            assert got == pytest.approx(expect, rel=1e-12)

    def test_sin_zero(self):
        assert es.boundary_series_small_r(CH30, 1.0, math.pi) == pytest.approx(
            0.0, abs=1e-15
        )

    def test_small_r_coefficient_limit(self):
        for channel in (CH30, Channel(4, 1), Channel(5, 2)):
            lam = 7.0
            r = 1e-4
            p = channel.regular_exponent
            ratio = es.boundary_series_small_r(channel, lam, r) / r**p
            expect = es.small_r_coefficient(channel, lam)
            assert ratio == pytest.approx(expect, rel=1e-6)

    def test_coefficient_formula(self):
        # (sqrt(lam)/2)^nu / Gamma(nu + 1) with nu = n + (d-2)/2
        lam = 7.0
        nu = 1.5
        expect = (math.sqrt(lam) / 2.0) ** nu / math.gamma(nu + 1.0)
        assert es.small_r_coefficient(Channel(3, 1), lam) == pytest.approx(
            expect, rel=1e-13
        )

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            es.boundary_series_small_r(CH30, 9.0, -0.1)
        with pytest.raises(ValueError):
            es.boundary_series_small_r(CH30, -1.0, 0.5)


@pytest.fixture(scope="module")
def grid12():
    return es.build_grid(CH30, HARMONIC, 12.0)


class TestShootMismatch:
    def test_node_count_jumps_at_eigenvalue(self, grid12):
        # full-sweep count equals the number of eigenvalues below lam
        assert es.shoot_mismatch(CH30, HARMONIC, 3.0 - 1e-6, grid12).node_count == 0
        assert es.shoot_mismatch(CH30, HARMONIC, 3.0 + 1e-6, grid12).node_count == 1
        assert es.shoot_mismatch(CH30, HARMONIC, 7.0 - 1e-6, grid12).node_count == 1
        assert es.shoot_mismatch(CH30, HARMONIC, 7.0 + 1e-6, grid12).node_count == 2

    def test_mismatch_vanishes_at_eigenvalue(self, grid12):
        assert abs(es.shoot_mismatch(CH30, HARMONIC, 3.0, grid12).mismatch) < 1e-6

    def test_mismatch_bounded_away_between_eigenvalues(self, grid12):
        res = es.shoot_mismatch(CH30, HARMONIC, 5.0, grid12)
        assert res.node_count == 1
        assert abs(res.mismatch) > 0.1

    def test_mismatch_sign_brackets_each_eigenvalue(self, grid12):
        # positive just below, negative just above: the root the secant
        # iteration relies on
        for exact in (3.0, 7.0):
            below = es.shoot_mismatch(CH30, HARMONIC, exact - 1e-4, grid12).mismatch
            above = es.shoot_mismatch(CH30, HARMONIC, exact + 1e-4, grid12).mismatch
            assert below > 0.0 > above

    def test_lam_beyond_grid_rejected(self, grid12):
        with pytest.raises(ValueError):
            es.shoot_mismatch(CH30, HARMONIC, 200.0, grid12)

    def test_bad_lam_rejected(self, grid12):
        with pytest.raises(ValueError):
            es.shoot_mismatch(CH30, HARMONIC, -3.0, grid12)


class TestSolveLevel:
    def test_oscillator_fourth_level(self):
        pair = es.solve_level(CH30, HARMONIC, 4)
        assert pair.lam == pytest.approx(19.0, rel=1e-7)
        assert pair.node_count == 4

    def test_quartic_against_frozen_references(self):
        p0 = es.solve_level(CH30, QUARTIC, 0)
        p1 = es.solve_level(CH30, QUARTIC, 1)
        assert abs(p0.lam - QUARTIC_L0) <= 1e-5
        assert abs(p1.lam - QUARTIC_L1) <= 1e-5

    def test_quartic_against_inline_oracle(self):
        o0 = oracle_level(0)
        o1 = oracle_level(1)
        assert abs(o0 - QUARTIC_L0) <= 5e-9
        assert abs(o1 - QUARTIC_L1) <= 5e-9
        assert es.solve_level(CH30, QUARTIC, 0).lam == pytest.approx(o0, abs=1e-8)
        assert es.solve_level(CH30, QUARTIC, 1).lam == pytest.approx(o1, abs=1e-8)

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            es.solve_level(CH30, QUARTIC, -1)


class TestSolveSpectrum:
    def test_oscillator_ladder(self, osc_table):
        for pair in osc_table.eigenpairs:
            exact = 4 * pair.level + 3
            assert abs(pair.lam - exact) <= 1e-6
            assert pair.node_count == pair.level

    def test_strictly_increasing_and_contiguous(self, quartic_table):
        lams = quartic_table.eigenvalues
        assert np.all(np.diff(lams) > 0.0)
        assert [p.level for p in quartic_table.eigenpairs] == list(range(13))

    def test_gaps_nondecreasing_for_superquadratic(self, quartic_table):
        gaps = np.diff(quartic_table.eigenvalues)
        assert np.all(np.diff(gaps) > -1e-9)

    def test_normalization(self, quartic_table):
        for pair in quartic_table.eigenpairs:
            assert abs(pair.norm_check - 1.0) <= 1e-8
            assert pair.samples.dtype == np.float64

    def test_single_level(self):
        table = es.solve_spectrum(CH30, QUARTIC, 0)
        assert len(table.eigenpairs) == 1
        assert table.eigenpairs[0].level == 0

    def test_interlacing_in_n(self):
        lams = {}
        for n in range(4):
            table = es.solve_spectrum(Channel(3, n), QUARTIC, 3)
            lams[n] = table.eigenvalues
        for n in range(3):
            assert np.all(lams[n] < lams[n + 1])

    def test_pair_lookup_guard(self, quartic_table):
        assert quartic_table.pair(3).level == 3
        with pytest.raises(IndexError):
            quartic_table.pair(99)


class TestDiscretizationInvariants:
    def test_grid_halving_shifts(self, quartic_table):
        g = quartic_table.grid
        fine = es.RadialGrid(g.r_min, g.r_max, g.h / 2.0, 2 * (g.n_points - 1) + 1)
        for level in (0, 6, 12):
            coarse = quartic_table.pair(level)
            refined = es.solve_level(CH30, QUARTIC, level, grid=fine)
            assert abs(refined.lam - coarse.lam) / coarse.lam <= 1e-8
            scale = max(abs(coarse.fprime_at_1), coarse.lam**0.25)
            assert abs(refined.fprime_at_1 - coarse.fprime_at_1) / scale <= 1e-7

    def test_ode_residual_small(self, osc_table, quartic_table):
        for table, model in ((osc_table, HARMONIC), (quartic_table, QUARTIC)):
            for level in (0, len(table.eigenpairs) // 2, len(table.eigenpairs) - 1):
                pair = table.pair(level)
                resid = es.ode_residual(pair, CH30, model, table.grid)
                assert resid <= 1e-6

    def test_ode_residual_is_fourth_order(self, quartic_table):
        g = quartic_table.grid
        fine = es.RadialGrid(g.r_min, g.r_max, g.h / 2.0, 2 * (g.n_points - 1) + 1)
        pair_c = quartic_table.pair(12)
        pair_f = es.solve_level(CH30, QUARTIC, 12, grid=fine)
        r_c = es.ode_residual(pair_c, CH30, QUARTIC, g)
        r_f = es.ode_residual(pair_f, CH30, QUARTIC, fine)
        assert r_f <= r_c / 10.0

    def test_eigenfunction_window_residual(self, quartic_table):
        pair = quartic_table.pair(8)
        resid = es.ode_residual(pair, CH30, QUARTIC, quartic_table.grid, window=(0.8, 1.2))
        assert resid <= 1e-6


class TestPersistence:
    def test_round_trip(self, quartic_table, tmp_path):
        path = es.save_spectrum(quartic_table, tmp_path / "quartic.json")
        loaded = es.load_spectrum(path)
        assert loaded.channel == quartic_table.channel
        assert loaded.model.spec_string == quartic_table.model.spec_string
        assert loaded.grid == quartic_table.grid
        assert loaded.tolerances == quartic_table.tolerances
        for a, b in zip(loaded.eigenpairs, quartic_table.eigenpairs):
            assert a.lam == b.lam
            assert a.f_at_1 == b.f_at_1
            assert a.fprime_at_1 == b.fprime_at_1
            assert np.array_equal(a.samples, b.samples)

    def test_version_guard(self, quartic_table, tmp_path):
        path = es.save_spectrum(quartic_table, tmp_path / "quartic.json")
        doc = json.loads(path.read_text())
        doc["format_version"] = 999
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError):
            es.load_spectrum(path)

    def test_csv_export(self, quartic_table, tmp_path):
        out = tmp_path / "spectrum.csv"
        es.export_spectrum_csv([quartic_table], out)
        lines = out.read_text().splitlines()
        assert lines[0] == "n,l,lambda,nodes,f_at_1,fprime_at_1"
        assert len(lines) == 14
        row = lines[1].split(",")
        assert float(row[2]) == quartic_table.pair(0).lam
        assert int(row[3]) == 0

    def test_csv_deterministic(self, quartic_table, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        es.export_spectrum_csv([quartic_table], a)
        es.export_spectrum_csv([quartic_table], b)
        assert a.read_bytes() == b.read_bytes()
