"""Speech anti-spoofing features and evaluation."""

__version__ = "0.1.0"

from .audio import AudioBuffer, read_wav, resample, write_wav
from .config import RunConfig, load_config
from .entropy import power_spectral_entropy, utterance_pse
from .errors import SpoofsenseError
from .f0 import F0Config, estimate_f0, trim_contour
from .metrics import CostModel, ScoreSet, eer, min_tdcf
from .mlp import MlpModel, TrainConfig, init_model, load_model, save_model, train
from .perturbation import utterance_perturbation
from .spectral import FeatureMatrix, band_aperiodicity, mfcc, spectral_envelope, stft_spectrogram
from .store import read_feature, write_feature
from .trials import Manifest, build_pairs, cosine_score, load_manifest, score_trials

__all__ = [
    "AudioBuffer", "read_wav", "resample", "write_wav",
    "RunConfig", "load_config",
    "power_spectral_entropy", "utterance_pse",
    "SpoofsenseError",
    "F0Config", "estimate_f0", "trim_contour",
    "CostModel", "ScoreSet", "eer", "min_tdcf",
    "MlpModel", "TrainConfig", "init_model", "load_model", "save_model", "train",
    "utterance_perturbation",
    "FeatureMatrix", "band_aperiodicity", "mfcc", "spectral_envelope", "stft_spectrogram",
    "read_feature", "write_feature",
    "Manifest", "build_pairs", "cosine_score", "load_manifest", "score_trials",
    "__version__",
]
