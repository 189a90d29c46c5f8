import numpy as np
import pytest

from doa_ae import (
    ArrayConfig,
    DivergenceError,
    ImperfectionWeights,
    ModelChecksumError,
    ModelFormatError,
    ModelTruncatedError,
    NetworkSpec,
    build_imperfection_model,
    build_partition,
    gen_training_set,
    load_dataset,
    save_dataset,
    steering_function,
    subregion_of,
    template,
    train,
    training_angles,
    TrainingConfig,
    TrainingSample,
)


class TestPartition:
    def test_default_six_regions(self):
        p = build_partition(-60, 60, 6)
        assert p.boundaries == (-60.0, -40.0, -20.0, 0.0, 20.0, 40.0, 60.0)
        assert p.num_regions == 6

    def test_single_region(self):
        assert build_partition(0, 10, 1).boundaries == (0.0, 10.0)

    def test_equal_gaps(self):
        p = build_partition(-45, 45, 9)
        gaps = np.diff(p.boundaries)
        assert np.allclose(gaps, 10.0, atol=1e-12)

    def test_inverted_range_rejected(self):
        with pytest.raises(ValueError):
            build_partition(10, -10, 4)


class TestSubregionOf:
    def test_paper_example_region_three(self, ula20):
        assert subregion_of(-15.0, ula20["partition"]) == 3

    def test_lower_boundary_inclusive(self, ula20):
        assert subregion_of(-60.0, ula20["partition"]) == 1

    def test_top_region_closed(self, ula20):
        assert subregion_of(60.0, ula20["partition"]) == 6

    def test_interior_boundary_goes_right(self, ula20):
        assert subregion_of(-20.0, ula20["partition"]) == 3

    def test_out_of_range(self, ula20):
        with pytest.raises(ValueError):
            subregion_of(61.0, ula20["partition"])


class TestTrainingAngles:
    def test_default_grid_tiles_the_span(self, ula20):
        cfg = TrainingConfig()
        angles = training_angles(cfg, ula20["partition"])
        assert angles.shape == (1200,)
        assert angles[0] == pytest.approx(-59.9)
        assert angles[-1] == pytest.approx(60.0)

    def test_region_histogram(self, ula20):
        # independent counting oracle: bin the grid angles directly
        cfg = TrainingConfig()
        counts = np.zeros(6, dtype=int)
        for theta in training_angles(cfg, ula20["partition"]):
            counts[subregion_of(theta, ula20["partition"]) - 1] += 1
        assert counts.tolist() == [199, 200, 200, 200, 200, 201]
        assert counts.sum() == 1200
        assert np.all(counts >= 1)

    def test_overrun_rejected(self, ula20):
        with pytest.raises(ValueError):
            training_angles(TrainingConfig(num_samples=1300), ula20["partition"])


def small_setup():
    """A 6-element array over three subregions; cheap enough for unit tests."""
    cfg = ArrayConfig(6)
    weights = ImperfectionWeights()
    model = build_imperfection_model(cfg)
    steer = steering_function(cfg, weights, model)
    partition = build_partition(-60, 60, 3)
    tcfg = TrainingConfig(num_samples=24, grid_step=5.0, num_snapshots=64,
                          batch_size=8, epochs=5, seed=42)
    return steer, partition, tcfg


class TestGenTrainingSet:
    def test_labels_are_single_block(self):
        steer, partition, tcfg = small_setup()
        samples = gen_training_set(tcfg, steer, partition)
        assert len(samples) == 24
        n = samples[0].input.shape[0]
        for s in samples:
            blocks = s.label.reshape(3, n)
            nonzero = [j for j in range(3) if np.any(blocks[j])]
            assert nonzero == [s.subregion_index - 1]

    def test_label_block_is_clean_signature(self):
        steer, partition, tcfg = small_setup()
        samples = gen_training_set(tcfg, steer, partition)
        n = samples[0].input.shape[0]
        for s in samples[:4]:
            block = s.label.reshape(3, n)[s.subregion_index - 1]
            assert np.allclose(block, template(s.true_angle, steer), atol=1e-15)

    def test_noisy_label_mode_copies_input(self):
        steer, partition, tcfg = small_setup()
        noisy = TrainingConfig(num_samples=6, grid_step=15.0, num_snapshots=32,
                               batch_size=2, epochs=1, seed=7, label_mode="noisy")
        samples = gen_training_set(noisy, steer, partition)
        n = samples[0].input.shape[0]
        for s in samples:
            block = s.label.reshape(3, n)[s.subregion_index - 1]
            assert np.array_equal(block, s.input)

    def test_generation_is_deterministic(self):
        steer, partition, tcfg = small_setup()
        first = gen_training_set(tcfg, steer, partition)
        second = gen_training_set(tcfg, steer, partition)
        for a, b in zip(first, second):
            assert np.array_equal(a.input, b.input)

    def test_unit_norm_switch_rescales_inputs(self):
        steer, partition, _ = small_setup()
        tcfg = TrainingConfig(num_samples=6, grid_step=15.0, num_snapshots=32,
                              batch_size=2, epochs=1, seed=7, unit_norm=True)
        for s in gen_training_set(tcfg, steer, partition):
            assert np.linalg.norm(s.input) == pytest.approx(1.0, abs=1e-12)

    def test_snr_list_mixes_noise_levels(self):
        steer, partition, _ = small_setup()
        quiet = TrainingConfig(num_samples=12, grid_step=8.0, num_snapshots=64,
                               batch_size=4, epochs=1, seed=7, snr_db=20.0)
        mixed = TrainingConfig(num_samples=12, grid_step=8.0, num_snapshots=64,
                               batch_size=4, epochs=1, seed=7,
                               snr_db=(-10.0, 20.0))
        assert quiet.snr_db == (20.0,)
        norms_q = [np.linalg.norm(s.input)
                   for s in gen_training_set(quiet, steer, partition)]
        norms_m = [np.linalg.norm(s.input)
                   for s in gen_training_set(mixed, steer, partition)]
        # heavy noise inflates the off-diagonal mass, so a mixed set spreads out
        assert np.std(norms_m) > 3 * np.std(norms_q)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainingConfig(batch_size=0)
        with pytest.raises(ValueError):
            TrainingConfig(num_samples=10, batch_size=20)
        with pytest.raises(ValueError):
            TrainingConfig(label_mode="other")


class TestTrain:
    def test_memorizes_a_single_sample(self):
        steer, partition, _ = small_setup()
        tcfg = TrainingConfig(num_samples=1, grid_step=10.0, num_snapshots=64,
                              batch_size=1, epochs=2500, learning_rate=5e-3, seed=5)
        samples = gen_training_set(tcfg, steer, partition)
        spec = NetworkSpec.for_array(6, num_decoders=3)
        params, history = train(samples, spec, tcfg)
        assert history[-1] < 1e-4

    def test_loss_history_finite_and_deterministic(self):
        steer, partition, tcfg = small_setup()
        samples = gen_training_set(tcfg, steer, partition)
        spec = NetworkSpec.for_array(6, num_decoders=3)
        _, h1 = train(samples, spec, tcfg)
        _, h2 = train(samples, spec, tcfg)
        assert h1 == h2
        assert len(h1) == tcfg.epochs
        assert all(np.isfinite(v) for v in h1)

    def test_divergence_aborts_with_diagnostic(self):
        # a non-finite sample poisons the loss; training must abort, not loop on
        steer, partition, tcfg = small_setup()
        samples = gen_training_set(tcfg, steer, partition)
        spec = NetworkSpec.for_array(6, num_decoders=3)
        poisoned = samples[0].input.copy()
        poisoned[0] = np.inf
        samples[0] = TrainingSample(poisoned, samples[0].label,
                                    samples[0].true_angle, samples[0].subregion_index)
        one_batch = TrainingConfig(num_samples=24, grid_step=5.0, num_snapshots=64,
                                   batch_size=24, epochs=10, seed=1)
        with np.errstate(invalid="ignore"):
            with pytest.raises(DivergenceError, match="epoch"):
                train(samples, spec, one_batch)

    def test_empty_sample_list_rejected(self):
        with pytest.raises(ValueError):
            train([], NetworkSpec.for_array(6, num_decoders=3), TrainingConfig())


class TestDatasetFile:
    def test_round_trip(self, tmp_path):
        steer, partition, tcfg = small_setup()
        samples = gen_training_set(tcfg, steer, partition)
        path = tmp_path / "dataset.doads"
        save_dataset(samples, path)
        loaded = load_dataset(path)
        assert len(loaded) == len(samples)
        for a, b in zip(loaded, samples):
            assert np.array_equal(a.input, b.input)
            assert np.array_equal(a.label, b.label)
            assert a.true_angle == b.true_angle
            assert a.subregion_index == b.subregion_index

    def test_corruption_and_truncation_detected(self, tmp_path):
        steer, partition, tcfg = small_setup()
        samples = gen_training_set(tcfg, steer, partition)
        path = tmp_path / "dataset.doads"
        save_dataset(samples, path)
        data = path.read_bytes()
        path.write_bytes(data[:40])
        with pytest.raises(ModelTruncatedError):
            load_dataset(path)
        flipped = bytearray(data)
        flipped[100] ^= 0x01
        path.write_bytes(bytes(flipped))
        with pytest.raises(ModelChecksumError):
            load_dataset(path)
        path.write_bytes(b"junkjunk" + data[8:])
        with pytest.raises(ModelFormatError):
            load_dataset(path)
