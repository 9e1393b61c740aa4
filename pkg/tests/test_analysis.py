import math
import warnings

import numpy as np
import pytest

from hermflow import (
    TrainingConfig,
    anharmonic_potential,
    band_average_errors,
    band_sums,
    harmonic_potential,
    linear_fit,
    q_sequence,
    reference_energies,
    window_sum,
)
from hermflow.analysis import write_fits_csv, write_rates_csv, write_spectra_csv


class TestBandSums:
    def test_harmonic_first_band(self):
        assert band_sums(np.arange(5) + 0.5, 5).tolist() == [12.5]

    def test_trailing_incomplete_band_dropped(self):
        sums = band_sums(np.arange(7.0), 5)
        assert sums.tolist() == [10.0]

    def test_matches_manual_grouping(self):
        vals = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
        np.testing.assert_allclose(band_sums(vals, 2), [3.0, 12.0, 48.0])

    def test_band_size_must_be_positive(self):
        with pytest.raises(ValueError):
            band_sums(np.arange(4.0), 0)

    def test_accepts_spectrum_objects(self):
        from hermflow import Spectrum

        spec = Spectrum(eigenvalues=np.arange(5.0), eigenvectors=np.eye(5))
        np.testing.assert_allclose(band_sums(spec, 5), [10.0])


class TestBandAverageErrors:
    def test_absolute_and_relative(self):
        vals = np.array([1.1, 2.2, 4.0])
        ref = np.array([1.0, 2.0, 4.0])
        np.testing.assert_allclose(band_average_errors(vals, ref, 3), [0.1])
        np.testing.assert_allclose(
            band_average_errors(vals, ref, 3, relative=True), [(0.1 + 0.1 + 0.0) / 3]
        )

    def test_reference_too_short_rejected(self):
        with pytest.raises(ValueError):
            band_average_errors(np.arange(5.0), np.arange(3.0), 5)


class TestWindowSum:
    def test_inclusive_window(self):
        assert window_sum(np.arange(12.0), (5, 10)) == sum(range(5, 11))

    def test_short_spectrum_is_undefined(self):
        assert window_sum(np.arange(10.0), (5, 10)) is None

    def test_bad_window_rejected(self):
        with pytest.raises(ValueError):
            window_sum(np.arange(12.0), (7, 3))


class TestQSequence:
    def test_geometric_sequence_gives_ratio(self):
        r = 0.37
        xs = {N: 2.0 + r**N for N in range(3, 12)}
        rates = q_sequence(xs, 2.0)
        for e in rates.values():
            assert e == pytest.approx(r, rel=1e-9)

    def test_exact_limit_is_undefined_not_zero(self):
        xs = {N: 5.0 for N in range(3, 8)}
        rates = q_sequence(xs, 5.0)
        assert rates and all(math.isnan(e) for e in rates.values())

    def test_none_entries_skipped(self):
        xs = {3: None, 4: 1.5, 5: 1.25}
        rates = q_sequence(xs, 1.0)
        assert set(rates) == {5}
        assert rates[5] == pytest.approx(0.5)

    def test_requires_consecutive_predecessor(self):
        rates = q_sequence({3: 1.5, 5: 1.1}, 1.0)
        assert rates == {}


class TestLinearFit:
    def test_exact_line(self):
        pts = [(x, 2.0 * x + 1.0) for x in (0.0, 1.0, 2.0, 5.0)]
        slope, intercept = linear_fit(pts)
        assert slope == pytest.approx(2.0, abs=1e-12)
        assert intercept == pytest.approx(1.0, abs=1e-12)

    def test_two_points_interpolate(self):
        slope, intercept = linear_fit([(0.0, 3.0), (2.0, 7.0)])
        assert slope == pytest.approx(2.0) and intercept == pytest.approx(3.0)

    def test_symmetric_noise_stays_close(self):
        rng = np.random.default_rng(3)
        xs = np.linspace(0, 10, 200)
        noise = rng.uniform(-0.05, 0.05, size=xs.size)
        slope, intercept = linear_fit(zip(xs, 2.0 * xs + 1.0 + noise))
        # OLS slope noise bound: spread/sqrt(sum (x - xbar)^2)
        sigma = 0.05 / np.sqrt(3) / np.sqrt(((xs - xs.mean()) ** 2).sum())
        assert abs(slope - 2.0) < 5 * sigma

    def test_nan_points_excluded(self):
        slope, _ = linear_fit([(0.0, 1.0), (1.0, math.nan), (2.0, 5.0)])
        assert slope == pytest.approx(2.0)

    def test_fewer_than_two_points_rejected(self):
        with pytest.raises(ValueError):
            linear_fit([(0.0, 1.0), (1.0, math.nan)])


class TestReferenceEnergies:
    def test_harmonic_both_schemes(self):
        cfg = TrainingConfig(N=6, Q=40, hidden=16, iterations=50, seed=3)
        for scheme in ("hermite", "augmented"):
            ref = reference_energies(scheme, harmonic_potential(), 6, cfg)
            np.testing.assert_allclose(ref.values, np.arange(6) + 0.5, atol=1e-8)
            assert ref.scheme == scheme and ref.n_ref == 6

    def test_hermite_self_convergence_profile(self):
        # low levels converge first: at N_ref = 29 vs 45 the bottom four
        # eigenvalues agree to 1e-6 while level 9 still moves by ~6e-3
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            e29 = reference_energies("hermite", anharmonic_potential(), 29, TrainingConfig(N=29, Q=90))
            e45 = reference_energies("hermite", anharmonic_potential(), 45, TrainingConfig(N=45, Q=130))
        diff = np.abs(e29.values[:10] - e45.values[:10])
        assert diff[:4].max() < 1e-6
        assert diff.max() < 5e-2

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            reference_energies("spectral", harmonic_potential(), 5)


class TestConvergenceReport:
    def test_geometric_sweep(self):
        from hermflow import build_convergence_report

        # synthetic spectra converging geometrically to n + 1/2
        r = 0.5
        spectra = {N: np.arange(12) + 0.5 + r**N for N in range(8, 15)}
        report = build_convergence_report("hermite", spectra, n_ref=14, window=(5, 10))
        assert report.scheme == "hermite"
        assert report.reference.n_ref == 14
        np.testing.assert_allclose(report.band_errors[8], [r**8 - r**14] * 2, rtol=1e-9)
        defined = {N: e for N, e in report.rates.items() if math.isfinite(e)}
        # plateau: e_N = (r^N - r^14)/(r^(N-1) - r^14) -> about r away from N_ref
        assert defined[9] == pytest.approx((r**9 - r**14) / (r**8 - r**14), rel=1e-12)
        assert report.fit[0] < 0

    def test_missing_reference_rejected(self):
        from hermflow import build_convergence_report

        with pytest.raises(ValueError):
            build_convergence_report("hermite", {5: np.arange(5.0)}, n_ref=9)


class TestCsvWriters:
    def test_spectra_round_trip(self, tmp_path):
        rows = [("hermite", 2, 0, 0.5), ("hermite", 2, 1, 1.5)]
        path = tmp_path / "spectra.csv"
        write_spectra_csv(path, rows)
        from hermflow.cli import read_spectra_csv

        data = read_spectra_csv(path)
        np.testing.assert_allclose(data["hermite"][2], [0.5, 1.5])

    def test_rates_and_fits_have_versioned_headers(self, tmp_path):
        write_rates_csv(tmp_path / "r.csv", [("hermite", 5, 0.5)])
        write_fits_csv(tmp_path / "f.csv", [("hermite", -0.1, 1.0)])
        assert (tmp_path / "r.csv").read_text().startswith("# hermflow rates csv v1")
        assert (tmp_path / "f.csv").read_text().splitlines()[1] == "scheme,slope,intercept"
