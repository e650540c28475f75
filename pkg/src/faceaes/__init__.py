"""Facial-image aesthetics prediction from precomputed CNN feature blocks.

The pipeline: load named feature blocks (FVEC files) with a dataset
manifest, standardize per fold, train linear SVM/SVR baselines, optionally
refine with a genetic search that jointly selects features and refits the
linear map, and score everything under a repeated k-fold protocol with GCR
(classification) or LCC (regression).
"""

from .errors import (
    ChecksumError,
    DimMismatchError,
    FaceAesError,
    FvecFormatError,
    ManifestError,
    NonFiniteError,
    ProtocolError,
    RowCountError,
    SingleClassError,
    UndefinedCorrelationError,
)
from .fvec import read_fvec, write_fvec
from .ga import (
    Chromosome,
    GaConfig,
    GaTrace,
    chromosome_predict,
    chromosome_predict_many,
    crossover,
    evolve,
    fitness,
    init_population,
    mutate,
    select_tournament,
    selected_feature_count,
)
from .harness import (
    EvalReport,
    FoldPlan,
    ProtocolConfig,
    SweepRow,
    derive_seed,
    gcr,
    lcc,
    make_fold_plan,
    run_protocol,
    sweep_combinations,
)
from .linear import (
    LinearModel,
    TrainConfig,
    hinge_loss,
    load_model,
    predict,
    predict_many,
    save_model,
    smooth_l1_loss,
    train_svm,
    train_svr,
)
from .store import (
    CANONICAL_DIMS,
    CANONICAL_ORDER,
    DatasetManifest,
    FeatureBlock,
    SampleRecord,
    Standardizer,
    canonical_block_order,
    classification_labels,
    concat_blocks,
    fit_standardizer,
    load_block,
    load_blocks,
    load_manifest,
    median_split,
    save_manifest,
    write_block,
)
from .synth import make_linear_regression, make_separable_classification, write_synth_dataset

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_DIMS",
    "CANONICAL_ORDER",
    "ChecksumError",
    "Chromosome",
    "DatasetManifest",
    "DimMismatchError",
    "EvalReport",
    "FaceAesError",
    "FeatureBlock",
    "FoldPlan",
    "FvecFormatError",
    "GaConfig",
    "GaTrace",
    "LinearModel",
    "ManifestError",
    "NonFiniteError",
    "ProtocolConfig",
    "ProtocolError",
    "RowCountError",
    "SampleRecord",
    "SingleClassError",
    "Standardizer",
    "SweepRow",
    "TrainConfig",
    "UndefinedCorrelationError",
    "canonical_block_order",
    "chromosome_predict",
    "chromosome_predict_many",
    "classification_labels",
    "concat_blocks",
    "crossover",
    "derive_seed",
    "evolve",
    "fit_standardizer",
    "fitness",
    "gcr",
    "hinge_loss",
    "init_population",
    "lcc",
    "load_block",
    "load_blocks",
    "load_manifest",
    "load_model",
    "make_fold_plan",
    "make_linear_regression",
    "make_separable_classification",
    "median_split",
    "mutate",
    "predict",
    "predict_many",
    "read_fvec",
    "run_protocol",
    "save_manifest",
    "save_model",
    "select_tournament",
    "selected_feature_count",
    "smooth_l1_loss",
    "sweep_combinations",
    "train_svm",
    "train_svr",
    "write_block",
    "write_fvec",
    "write_synth_dataset",
]
