"""Command-line front end: training, scanning, baselines, and benchmarks.

Configuration is a single JSON document; every key has a default, unknown
keys are rejected before any computation starts, and the full schema is
documented in the README. All commands are deterministic given the config
and the master seed.

Exit codes: 0 success, 2 configuration error, 3 numeric divergence during
training, 4 I/O failure (including unreadable or corrupt model files).
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


class ConfigError(Exception):
    """Bad configuration document or bad command arguments."""


_DEFAULTS = {
    "seed": 0,
    "deterministic": True,
    "array": {"num_elements": 20, "spacing_wavelengths": 0.5},
    "imperfections": {
        "gain": 1.0,
        "phase": 1.0,
        "position": 1.0,
        "coupling": 1.0,
        "gamma_magnitude": 0.3,
        "gamma_phase_deg": 60.0,
    },
    "partition": {"theta_min": -60.0, "theta_max": 60.0, "num_subregions": 6},
    "training": {
        "num_samples": 1200,
        "grid_step_deg": 0.1,
        "num_snapshots": 800,
        "snr_db": [0.0, 5.0, 10.0, 15.0, 20.0],
        "batch_size": 100,
        "epochs": 1000,
        "learning_rate": 0.001,
        "label_mode": "clean",
        "unit_norm": False,
    },
    "scan": {
        "grid_step_deg": 0.1,
        "threshold": 0.3,
        "template_model": "array",
        "restrict_to_subregion": True,
    },
    "scene": {
        "angles": [-15.0, -5.0],
        "coherent": True,
        "snr_db": 10.0,
        "num_snapshots": 800,
    },
    "experiment": {
        "snr_list_db": [0.0, 5.0, 10.0, 15.0, 20.0],
        "trials": 100,
        "rmse_angles": [-15.0, -5.0],
        "detection_angles": [-52.5, -37.5, -22.5, -7.5, 7.5, 22.5, 37.5, 52.5],
        "detection_snr_db": 10.0,
        "tolerance_deg": 2.0,
        "num_snapshots": 800,
        "estimators": ["ae", "music", "ssmusic"],
        "subarray_length": 14,
        "music_grid_step_deg": 0.1,
    },
}


def _merge_checked(defaults, user, path=""):
    if not isinstance(user, dict):
        raise ConfigError(f"expected an object at {path or 'top level'}")
    merged = copy.deepcopy(defaults)
    for key, value in user.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {where}")
        base = defaults[key]
        if isinstance(base, dict):
            merged[key] = _merge_checked(base, value, where)
        elif isinstance(base, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{where} must be a boolean")
            merged[key] = value
        elif isinstance(base, (int, float)):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{where} must be a number")
            merged[key] = type(base)(value)
        elif isinstance(base, str):
            if not isinstance(value, str):
                raise ConfigError(f"{where} must be a string")
            merged[key] = value
        elif isinstance(base, list):
            # scalar-or-list knobs (e.g. training.snr_db) accept a bare number
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                merged[key] = [value]
            elif isinstance(value, list):
                merged[key] = value
            else:
                raise ConfigError(f"{where} must be a list or a number")
        else:  # pragma: no cover - schema defaults only use the above
            raise ConfigError(f"unsupported schema entry at {where}")
    return merged


def load_config(path=None) -> dict:
    """Defaults merged with an optional JSON document; unknown keys fail."""
    if path is None:
        return copy.deepcopy(_DEFAULTS)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path} is not valid JSON: {err}") from err
    return _merge_checked(_DEFAULTS, user)


def _require_out_dir(out):
    if not os.path.isdir(out):
        raise FileNotFoundError(f"output directory does not exist: {out}")
    return out


def _build_context(cfg):
    """Shared objects: array, imperfection model/weights, partition, steering."""
    import numpy as np

    from .arrays import ArrayConfig, ImperfectionWeights, build_imperfection_model, steering_function
    from .training import build_partition

    arr = ArrayConfig(cfg["array"]["num_elements"], cfg["array"]["spacing_wavelengths"])
    imp = cfg["imperfections"]
    weights = ImperfectionWeights(imp["gain"], imp["phase"], imp["position"], imp["coupling"])
    gamma = imp["gamma_magnitude"] * np.exp(1j * np.deg2rad(imp["gamma_phase_deg"]))
    model = build_imperfection_model(arr, gamma)
    part = cfg["partition"]
    partition = build_partition(part["theta_min"], part["theta_max"], part["num_subregions"])
    return {
        "array": arr,
        "weights": weights,
        "model": model,
        "partition": partition,
        "steer_true": steering_function(arr, weights, model),
        "steer_ideal": steering_function(arr),
    }


def _training_config(cfg):
    from .training import TrainingConfig

    t = cfg["training"]
    return TrainingConfig(
        num_samples=t["num_samples"],
        grid_step=t["grid_step_deg"],
        num_snapshots=t["num_snapshots"],
        snr_db=tuple(t["snr_db"]),
        batch_size=t["batch_size"],
        epochs=t["epochs"],
        learning_rate=t["learning_rate"],
        seed=cfg["seed"],
        label_mode=t["label_mode"],
        unit_norm=t["unit_norm"],
    )


def _scan_config(cfg):
    from .scanning import ScanConfig

    s = cfg["scan"]
    return ScanConfig(
        grid_step=s["grid_step_deg"],
        threshold=s["threshold"],
        template_model=s["template_model"],
        restrict_to_subregion=s["restrict_to_subregion"],
    )


def _template_bank(cfg, ctx):
    from .scanning import TemplateBank, scan_grid

    scan_cfg = _scan_config(cfg)
    grid = scan_grid(ctx["partition"], scan_cfg.grid_step)
    steering = ctx["steer_true"] if scan_cfg.template_model == "array" else ctx["steer_ideal"]
    return TemplateBank.build(grid, steering), scan_cfg


def _scene(cfg, args, rng):
    from .signals import SourceScene, random_coherence

    sc = dict(cfg["scene"])
    if getattr(args, "angles", None):
        sc["angles"] = [float(a) for a in args.angles.split(",")]
    if getattr(args, "snr", None) is not None:
        sc["snr_db"] = args.snr
    if getattr(args, "snapshots", None) is not None:
        sc["num_snapshots"] = args.snapshots
    if getattr(args, "uncorrelated", False):
        sc["coherent"] = False
    coherence = random_coherence(len(sc["angles"]), rng) if sc["coherent"] else None
    return SourceScene(tuple(sc["angles"]), snr_db=sc["snr_db"],
                       num_snapshots=sc["num_snapshots"], coherence=coherence)


def _generate_samples(cfg, ctx, progress=True):
    from .training import gen_training_set

    tcfg = _training_config(cfg)
    if progress:
        snrs = "/".join(f"{s:g}" for s in tcfg.snr_db)
        print(f"generating {tcfg.num_samples} training samples "
              f"(N={tcfg.num_snapshots}, SNR {snrs} dB)", file=sys.stderr)
    return gen_training_set(tcfg, ctx["steer_true"], ctx["partition"]), tcfg


def cmd_gen_data(cfg, args):
    from .training import save_dataset

    out = _require_out_dir(args.out)
    ctx = _build_context(cfg)
    samples, _ = _generate_samples(cfg, ctx)
    path = os.path.join(out, "dataset.doads")
    save_dataset(samples, path)
    print(f"wrote {len(samples)} samples to {path}")
    return EXIT_OK


def cmd_train(cfg, args):
    from .network import NetworkSpec, save_model
    from .training import load_dataset, train

    out = _require_out_dir(args.out)
    ctx = _build_context(cfg)
    if args.data:
        samples = load_dataset(args.data)
        tcfg = _training_config(cfg)
        print(f"loaded {len(samples)} cached samples from {args.data}", file=sys.stderr)
    else:
        samples, tcfg = _generate_samples(cfg, ctx)
    spec = NetworkSpec.for_array(cfg["array"]["num_elements"],
                                 cfg["partition"]["num_subregions"])

    def progress(epoch, mean_loss):
        if epoch % 25 == 0 or epoch == tcfg.epochs - 1:
            print(f"epoch {epoch:5d}  loss {mean_loss:.6e}", file=sys.stderr)

    params, history = train(samples, spec, tcfg, progress=progress)
    model_path = os.path.join(out, "model.doaae")
    save_model(params, model_path)
    loss_path = os.path.join(out, "loss_history.csv")
    with open(loss_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "mean_loss"])
        for epoch, mean_loss in enumerate(history):
            writer.writerow([epoch, f"{mean_loss:.12g}"])
    print(f"wrote {model_path} and {loss_path}")
    return EXIT_OK


def cmd_scan(cfg, args):
    import numpy as np

    from .network import load_model
    from .scanning import detect_peaks, gain_curves, write_gain_csv
    from .signals import sample_covariance, synthesize_snapshots

    out = _require_out_dir(args.out)
    ctx = _build_context(cfg)
    params = load_model(args.model)
    bank, scan_cfg = _template_bank(cfg, ctx)
    rng = np.random.default_rng([cfg["seed"], 30])
    scene = _scene(cfg, args, rng)
    r = sample_covariance(synthesize_snapshots(scene, ctx["steer_true"], rng))
    curves = gain_curves(r, params, bank, unit_norm=cfg["training"]["unit_norm"])
    gains_path = os.path.join(out, "gains.csv")
    write_gain_csv(gains_path, curves)
    estimate = detect_peaks(curves, scan_cfg, ctx["partition"])
    print(f"scene angles: {', '.join(f'{a:g}' for a in scene.angles)} "
          f"(SNR {scene.snr_db:g} dB, {scene.num_snapshots} snapshots)")
    if not estimate.peaks:
        print("no sources above threshold")
    else:
        for peak in estimate.peaks:
            print(f"estimate {peak.angle:+8.2f} deg  gain {peak.gain:.3f}  decoder {peak.decoder}")
    print(f"wrote {gains_path}")
    return EXIT_OK


def _music_grid(cfg):
    import numpy as np

    step = cfg["experiment"]["music_grid_step_deg"]
    count = int(round(180.0 / step))
    return -90.0 + step * np.arange(1, count)


def cmd_music(cfg, args, smoothed=False):
    import numpy as np

    from .baselines import fb_spatial_smooth, music_spectrum, pick_music_peaks, write_spectrum_csv
    from .arrays import ArrayConfig, steering_function
    from .signals import sample_covariance, synthesize_snapshots

    out = _require_out_dir(args.out)
    ctx = _build_context(cfg)
    rng = np.random.default_rng([cfg["seed"], 40 if smoothed else 41])
    scene = _scene(cfg, args, rng)
    r = sample_covariance(synthesize_snapshots(scene, ctx["steer_true"], rng))
    grid = _music_grid(cfg)
    if smoothed:
        sub_len = cfg["experiment"]["subarray_length"]
        r = fb_spatial_smooth(r, sub_len)
        steering = steering_function(ArrayConfig(sub_len, ctx["array"].spacing))
        name = "ssmusic"
    else:
        steering = ctx["steer_ideal"]
        name = "music"
    spectrum = music_spectrum(r, scene.num_sources, grid, steering)
    estimate = pick_music_peaks(spectrum, scene.num_sources)
    path = os.path.join(out, f"{name}_spectrum.csv")
    write_spectrum_csv(path, spectrum, log10=args.log10)
    print(f"scene angles: {', '.join(f'{a:g}' for a in scene.angles)} "
          f"(SNR {scene.snr_db:g} dB, {scene.num_snapshots} snapshots)")
    print(f"{name} estimates: {', '.join(f'{a:+.2f}' for a in estimate.angles)}"
          + ("  [degenerate: fewer peaks than sources]" if estimate.degenerate else ""))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(cfg, args):
    from .estimators import autoencoder_estimator, music_estimator, ssmusic_estimator
    from .metrics import (
        ExperimentConfig,
        run_detection_experiment,
        run_rmse_vs_snr,
        write_detection_csv,
        write_rmse_csv,
    )
    from .network import load_model

    out = _require_out_dir(args.out)
    ctx = _build_context(cfg)
    exp = cfg["experiment"]
    ecfg = ExperimentConfig(
        snr_list_db=tuple(exp["snr_list_db"]),
        trials=exp["trials"],
        rmse_angles=tuple(exp["rmse_angles"]),
        detection_angles=tuple(exp["detection_angles"]),
        detection_snr_db=exp["detection_snr_db"],
        num_snapshots=exp["num_snapshots"],
        tolerance_deg=exp["tolerance_deg"],
        seed=cfg["seed"],
    )
    grid = _music_grid(cfg)
    estimators = {}
    for name in exp["estimators"]:
        if name == "ae":
            params = load_model(args.model)
            bank, scan_cfg = _template_bank(cfg, ctx)
            estimators["ae"] = autoencoder_estimator(
                params, bank, scan_cfg, ctx["partition"],
                unit_norm=cfg["training"]["unit_norm"])
        elif name == "music":
            estimators["music"] = music_estimator(ctx["array"], grid)
        elif name == "ssmusic":
            estimators["ssmusic"] = ssmusic_estimator(
                ctx["array"], exp["subarray_length"], grid)
        else:
            raise ConfigError(f"unknown estimator {name!r} (expected ae, music, ssmusic)")
    print(f"accuracy experiment: {len(ecfg.snr_list_db)} SNR points x "
          f"{ecfg.trials} trials", file=sys.stderr)
    rmse_results = run_rmse_vs_snr(ecfg, estimators, ctx["steer_true"])
    rmse_path = os.path.join(out, "rmse_vs_snr.csv")
    write_rmse_csv(rmse_path, rmse_results, ecfg.trials)
    print(f"detection experiment: {len(ecfg.detection_angles)} targets x "
          f"{ecfg.trials} trials", file=sys.stderr)
    detect_results = run_detection_experiment(ecfg, estimators, ctx["steer_true"])
    detect_path = os.path.join(out, "detection.csv")
    write_detection_csv(detect_path, detect_results, ecfg.tolerance_deg, ecfg.trials)
    print(f"wrote {rmse_path} and {detect_path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="doa-ae",
        description="Autoencoder DOA estimation for coherent sources on imperfect arrays",
    )
    parser.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--deterministic", action="store_true",
                        help="force sequential, fixed-order reductions (the default behavior)")
    parser.add_argument("--threads", type=int,
                        help="cap BLAS worker threads for this process")
    parser.add_argument("--out", default=".", help="output directory (must exist)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-data", help="generate and cache the training dataset")

    p_train = sub.add_parser("train", help="train the network and write the model file")
    p_train.add_argument("--data", help="reuse a cached dataset instead of regenerating")

    scene_flags = argparse.ArgumentParser(add_help=False)
    scene_flags.add_argument("--angles", help="comma-separated source angles in degrees")
    scene_flags.add_argument("--snr", type=float, help="scene SNR in dB")
    scene_flags.add_argument("--snapshots", type=int, help="number of snapshots")
    scene_flags.add_argument("--uncorrelated", action="store_true",
                             help="draw independent waveforms instead of coherent replicas")

    p_scan = sub.add_parser("scan", parents=[scene_flags],
                            help="run the trained network on a test scene")
    p_scan.add_argument("--model", required=True, help="model file from `train`")

    p_music = sub.add_parser("music", parents=[scene_flags], help="plain MUSIC baseline")
    p_music.add_argument("--log10", action="store_true", help="write log10 pseudospectrum")
    p_ssmusic = sub.add_parser("ssmusic", parents=[scene_flags],
                               help="forward/backward smoothing + MUSIC baseline")
    p_ssmusic.add_argument("--log10", action="store_true", help="write log10 pseudospectrum")

    p_bench = sub.add_parser("bench", help="run the accuracy and detection experiments")
    p_bench.add_argument("--model", required=True, help="model file from `train`")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be positive", file=sys.stderr)
            return EXIT_CONFIG
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.deterministic:
            cfg["deterministic"] = True
        handler = {
            "gen-data": cmd_gen_data,
            "train": cmd_train,
            "scan": cmd_scan,
            "music": lambda c, a: cmd_music(c, a, smoothed=False),
            "ssmusic": lambda c, a: cmd_music(c, a, smoothed=True),
            "bench": cmd_bench,
        }[args.command]
        return handler(cfg, args)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except Exception as err:
        from .network import DivergenceError, ModelFileError

        if isinstance(err, DivergenceError):
            print(f"training diverged: {err}", file=sys.stderr)
            return EXIT_DIVERGENCE
        if isinstance(err, ModelFileError):
            print(f"model file error: {err}", file=sys.stderr)
            return EXIT_IO
        raise


if __name__ == "__main__":
    sys.exit(main())
