"""DOA estimation of coherent sources on imperfect uniform linear arrays.

A from-scratch dense autoencoder maps noisy covariance features to clean
per-subregion signatures; scanning its decoder outputs against a template
bank yields direction estimates that survive both multipath coherence and
antenna imperfections. MUSIC and spatial-smoothing MUSIC baselines, metric
helpers, and the Monte Carlo benchmark harness ship alongside.
"""

from .arrays import (
    DEFAULT_COUPLING_GAMMA,
    ArrayConfig,
    ImperfectionModel,
    ImperfectionWeights,
    build_imperfection_model,
    ideal_steering,
    imperfect_steering,
    steering_function,
)
from .baselines import (
    EigenDecomposition,
    EigNonConvergence,
    MusicEstimate,
    MusicSpectrum,
    fb_spatial_smooth,
    hermitian_eig,
    music_spectrum,
    pick_music_peaks,
    ss_music,
)
from .estimators import autoencoder_estimator, music_estimator, ssmusic_estimator
from .features import covariance_features, extract_upper, normalize, template, to_complex, to_real
from .metrics import (
    ExperimentConfig,
    TrialResult,
    count_hits,
    detection_probability,
    match_angles,
    rmse,
    run_detection_experiment,
    run_rmse_vs_snr,
)
from .network import (
    DivergenceError,
    ModelChecksumError,
    ModelFileError,
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
    NetworkParams,
    NetworkSpec,
    RmspropState,
    backward,
    forward,
    init_network,
    load_model,
    loss,
    rmsprop_step,
    save_model,
)
from .scanning import (
    DoaEstimate,
    GainCurve,
    Peak,
    ScanConfig,
    TemplateBank,
    decoder_outputs,
    detect_peaks,
    estimate_doa,
    gain_curves,
    gain_response,
    scan_grid,
)
from .signals import (
    SourceScene,
    gen_waveforms,
    ideal_covariance,
    random_coherence,
    sample_covariance,
    synthesize_snapshots,
)
from .training import (
    SubregionPartition,
    TrainingConfig,
    TrainingSample,
    build_partition,
    gen_training_set,
    load_dataset,
    save_dataset,
    subregion_of,
    train,
    training_angles,
)

__version__ = "0.1.0"
