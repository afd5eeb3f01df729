"""Quotient-based multiresolution fusion of paired visual/thermal face
images, with eigenface reduction and MLP classification."""

from .config import PipelineConfig, apply_env_overrides, format_config, load_config, parse_config
from .eigenspace import EigenModel, fit_pca, fit_pca_matrix, project, reconstruct_from_features
from .estimators import EigenfaceProjector, MomentumMlpClassifier, QuotientFeatureExtractor
from .image import (
    PgmDataError,
    PgmError,
    PgmHeaderError,
    crop,
    load_pgm,
    normalize_minmax,
    resize_bilinear,
    save_pgm,
)
from .manifest import Manifest, ManifestEntry, ManifestError, generate_manifest, load_manifest, write_manifest
from .mlp import MlpModel, TrainConfig, forward, gradient, init_mlp, predict, train_epoch, train_mlp
from .modelio import ModelCorruptionError, ModelFormatError, load_model, save_model
from .pipeline import (
    ClassResult,
    RecognitionReport,
    TrainSummary,
    assemble_report,
    emit_report,
    preprocess_pair,
    recognition_rate,
    run_evaluate,
    run_train,
)
from .quotient import (
    QuotientConfig,
    fuse_maxabs,
    fuse_sum,
    quotient_image,
    quotient_method1,
    quotient_method2,
    regularized_divide,
    self_quotient,
)
from .synthetic import generate_synthetic_dataset
from .wavelet import (
    HAAR,
    HaarFilters,
    SubbandSet,
    decompose_multilevel,
    dwt2,
    idwt2,
    reconstruct_from_approx,
    tile_subbands,
)

__version__ = "0.1.0"
