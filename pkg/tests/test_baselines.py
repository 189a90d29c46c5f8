import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doa_ae import (
    ArrayConfig,
    SourceScene,
    fb_spatial_smooth,
    hermitian_eig,
    ideal_covariance,
    music_spectrum,
    pick_music_peaks,
    random_coherence,
    sample_covariance,
    ss_music,
    steering_function,
    synthesize_snapshots,
)
from doa_ae.baselines import MusicSpectrum, write_spectrum_csv


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (x + x.conj().T) / 2


class TestHermitianEig:
    def test_real_diagonal_matrix(self):
        eig = hermitian_eig(np.diag([3.0, -1.0, 2.0]))
        assert np.allclose(eig.values, [3.0, 2.0, -1.0])
        # eigenvectors form a signed permutation of the identity
        assert np.allclose(np.abs(eig.vectors), np.eye(3)[:, [0, 2, 1]])

    def test_rank_one_projector(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        a /= np.linalg.norm(a)
        eig = hermitian_eig(np.outer(a, a.conj()))
        assert eig.values[0] == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(eig.values[1:])) < 1e-12

    def test_reconstruction_eight_by_eight(self):
        r = random_hermitian(8, seed=11)
        eig = hermitian_eig(r)
        recon = eig.vectors @ np.diag(eig.values) @ eig.vectors.conj().T
        assert np.linalg.norm(recon - r) / np.linalg.norm(r) < 1e-10

    def test_eigenvalues_match_lapack_oracle(self):
        r = random_hermitian(12, seed=5)
        eig = hermitian_eig(r)
        oracle = np.sort(np.linalg.eigvalsh(r))[::-1]
        assert np.max(np.abs(eig.values - oracle)) < 1e-10 * np.linalg.norm(r)

    @given(st.integers(2, 32), st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_reconstruction_and_orthonormality(self, n, seed):
        r = random_hermitian(n, seed)
        eig = hermitian_eig(r)
        recon = eig.vectors @ np.diag(eig.values) @ eig.vectors.conj().T
        assert np.linalg.norm(recon - r) / np.linalg.norm(r) < 1e-10
        gram = eig.vectors.conj().T @ eig.vectors
        assert np.linalg.norm(gram - np.eye(n)) < 1e-10
        assert np.all(np.diff(eig.values) <= 0)

    def test_zero_matrix(self):
        eig = hermitian_eig(np.zeros((4, 4)))
        assert np.all(eig.values == 0)
        assert np.array_equal(eig.vectors, np.eye(4))

    def test_non_hermitian_rejected(self):
        m = np.array([[1.0, 2.0], [0.5, 1.0]])
        with pytest.raises(ValueError):
            hermitian_eig(m)


@pytest.fixture(scope="module")
def ula10():
    cfg = ArrayConfig(10)
    return {"cfg": cfg, "steer": steering_function(cfg)}


GRID = np.arange(-90 + 0.1, 90, 0.1)


class TestMusic:
    def test_two_uncorrelated_sources(self, ula10):
        scene = SourceScene((-30.0, 30.0), snr_db=20.0, num_snapshots=1000)
        r = sample_covariance(
            synthesize_snapshots(scene, ula10["steer"], np.random.default_rng(0)))
        spectrum = music_spectrum(r, 2, GRID, ula10["steer"])
        est = pick_music_peaks(spectrum, 2)
        assert not est.degenerate
        assert np.max(np.abs(est.angles - np.array([-30.0, 30.0]))) < 0.5

    def test_noiseless_single_source_argmax_on_grid(self, ula10):
        r = ideal_covariance((-12.0,), (1.0,), 0.0, ula10["steer"])
        spectrum = music_spectrum(r, 1, GRID, ula10["steer"])
        assert spectrum.grid[np.argmax(spectrum.values)] == pytest.approx(-12.0, abs=1e-9)

    def test_coherent_pair_degrades_plain_music(self, ula20):
        # rank-deficient source covariance biases the peaks; adverse phase
        # draws push them beyond 1 degree while smoothing stays exact
        # (seeded run observed: plain 14/20, smoothed 20/20)
        sub_steer = steering_function(ArrayConfig(14, 0.5))
        plain_hits = smoothed_hits = 0
        trials = 20
        for t in range(trials):
            rng = np.random.default_rng([17, t])
            scene = SourceScene((-15.0, -5.0), snr_db=20.0, num_snapshots=800,
                                coherence=random_coherence(2, rng))
            r = sample_covariance(synthesize_snapshots(scene, ula20["steer_ideal"], rng))
            est = pick_music_peaks(music_spectrum(r, 2, GRID, ula20["steer_ideal"]), 2).angles
            plain_hits += bool(np.max(np.abs(np.sort(est) - [-15.0, -5.0])) < 1.0)
            est = ss_music(r, 2, 14, GRID, sub_steer).angles
            smoothed_hits += bool(np.max(np.abs(np.sort(est) - [-15.0, -5.0])) < 1.0)
        assert plain_hits <= 17
        assert smoothed_hits >= 19
        assert plain_hits < smoothed_hits

    def test_invariant_to_positive_scaling(self, ula10):
        scene = SourceScene((-20.0, 10.0), snr_db=10.0, num_snapshots=400)
        r = sample_covariance(
            synthesize_snapshots(scene, ula10["steer"], np.random.default_rng(4)))
        est1 = pick_music_peaks(music_spectrum(r, 2, GRID, ula10["steer"]), 2)
        est2 = pick_music_peaks(music_spectrum(5.0 * r, 2, GRID, ula10["steer"]), 2)
        assert np.array_equal(est1.angles, est2.angles)

    def test_source_count_bounds(self, ula10):
        r = np.eye(10, dtype=complex)
        with pytest.raises(ValueError):
            music_spectrum(r, 10, GRID, ula10["steer"])
        with pytest.raises(ValueError):
            music_spectrum(r, 0, GRID, ula10["steer"])

    def test_degenerate_padding_flag(self):
        # monotone spectrum: no interior local maxima at all
        spectrum = MusicSpectrum(np.linspace(-10, 10, 21), np.linspace(1.0, 2.0, 21))
        est = pick_music_peaks(spectrum, 2)
        assert est.degenerate
        assert len(est.angles) == 2


class TestSpatialSmoothing:
    def test_single_subarray_is_forward_backward_average(self, rng):
        x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        r = (x + x.conj().T) / 2
        rfb = fb_spatial_smooth(r, 6)
        j = np.fliplr(np.eye(6))
        oracle = 0.5 * (r + j @ r.conj() @ j)
        assert np.allclose(rfb, oracle, atol=1e-14)

    def test_identity_is_fixed_point(self):
        assert np.allclose(fb_spatial_smooth(np.eye(8, dtype=complex), 5), np.eye(5))

    def test_restores_rank_of_coherent_pair(self, ula20):
        coherence = ((1.0, 0.0), (0.8, 1.1))
        r = ideal_covariance((-15.0, -5.0), (1.0, 1.0), 0.0, ula20["steer_ideal"],
                             coherence=coherence)
        vals_before = np.sort(np.linalg.eigvalsh(r))[::-1]
        assert vals_before[1] < 1e-10 * vals_before[0]
        rfb = fb_spatial_smooth(r, 16)
        vals = np.sort(np.linalg.eigvalsh(rfb))[::-1]
        assert vals[1] > 1e-6 * vals[0]

    def test_preserves_hermitian_psd(self, ula20, rng):
        scene = SourceScene((-25.0, 5.0, 40.0), snr_db=5.0, num_snapshots=300)
        r = sample_covariance(synthesize_snapshots(scene, ula20["steer_ideal"], rng))
        rfb = fb_spatial_smooth(r, 14)
        assert np.allclose(rfb, rfb.conj().T)
        vals = np.linalg.eigvalsh(rfb)
        assert vals[0] >= -1e-10 * vals[-1]

    def test_invalid_subarray_length(self):
        r = np.eye(8, dtype=complex)
        with pytest.raises(ValueError):
            fb_spatial_smooth(r, 1)
        with pytest.raises(ValueError):
            fb_spatial_smooth(r, 9)


class TestSsMusic:
    def test_recovers_coherent_pair(self, ula20):
        rng = np.random.default_rng(2)
        scene = SourceScene((-15.0, -5.0), snr_db=20.0, num_snapshots=800,
                            coherence=random_coherence(2, rng))
        r = sample_covariance(synthesize_snapshots(scene, ula20["steer_ideal"], rng))
        sub_steer = steering_function(ArrayConfig(14, 0.5))
        est = ss_music(r, 2, 14, GRID, sub_steer)
        assert np.max(np.abs(est.angles - np.array([-15.0, -5.0]))) < 1.0

    def test_consistent_with_music_on_uncorrelated_sources(self, ula20):
        rng = np.random.default_rng(8)
        scene = SourceScene((-40.0, 22.0), snr_db=20.0, num_snapshots=2000)
        r = sample_covariance(synthesize_snapshots(scene, ula20["steer_ideal"], rng))
        plain = pick_music_peaks(music_spectrum(r, 2, GRID, ula20["steer_ideal"]), 2)
        sub_steer = steering_function(ArrayConfig(14, 0.5))
        smoothed = ss_music(r, 2, 14, GRID, sub_steer)
        assert np.max(np.abs(plain.angles - smoothed.angles)) <= 0.2 + 1e-9

    def test_source_count_must_fit_subarray(self, ula20, rng):
        r = np.eye(20, dtype=complex)
        with pytest.raises(ValueError):
            ss_music(r, 14, 14, GRID, steering_function(ArrayConfig(14, 0.5)))

    def test_imperfections_degrade_accuracy_at_least_twofold(self, ula20):
        # the scan model stays ideal, so array errors bias the peaks
        sub_steer = steering_function(ArrayConfig(14, 0.5))
        truth = np.array([-15.0, -5.0])
        errors = {}
        for name in ("ideal", "imperfect"):
            steer = ula20["steer_ideal"] if name == "ideal" else ula20["steer_true"]
            sq = []
            for t in range(20):
                rng = np.random.default_rng([23, t])
                scene = SourceScene(tuple(truth), snr_db=20.0, num_snapshots=800,
                                    coherence=random_coherence(2, rng))
                r = sample_covariance(synthesize_snapshots(scene, steer, rng))
                est = ss_music(r, 2, 14, GRID, sub_steer).angles
                sq.extend((np.sort(est) - truth) ** 2)
            errors[name] = np.sqrt(np.mean(sq))
        assert errors["imperfect"] >= 2.0 * errors["ideal"]


class TestSpectrumCsv:
    def test_format(self, tmp_path, ula10):
        r = ideal_covariance((0.0,), (1.0,), 0.1, ula10["steer"])
        spectrum = music_spectrum(r, 1, np.linspace(-60, 60, 241), ula10["steer"])
        path = tmp_path / "spectrum.csv"
        write_spectrum_csv(path, spectrum)
        lines = path.read_text().splitlines()
        assert lines[0] == "angle_deg,pseudospectrum"
        assert len(lines) == 242
        write_spectrum_csv(path, spectrum, log10=True)
        assert path.read_text().splitlines()[0] == "angle_deg,log10_pseudospectrum"
