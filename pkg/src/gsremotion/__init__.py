"""Emotion classification from galvanic skin response signals.

Pipeline: wavelet denoising, calm-baseline normalization, a 30-feature
catalog over the signal and its differences plus spectrum, correlation-based
feature selection, and one-vs-one SVM classification over five emotions.
"""

from ._core import active_backend, available_backends
from .dataset import (
    LABEL_ORDER,
    Dataset,
    EmotionLabel,
    GsrRecord,
    load_dataset,
    load_record,
    parse_label,
    save_dataset,
    save_record,
    split_dataset,
)
from .evaluate import (
    ConfusionMatrix,
    CvReport,
    HeldOutGuard,
    accuracy,
    kfold_cross_validate,
    per_label_rates,
    sampled_label_rates,
)
from .features import (
    FEATURE_NAMES,
    FeatureMatrix,
    FeatureVector,
    extract_dataset_features,
    extract_features,
    read_feature_csv,
    write_feature_csv,
)
from .kernels import KernelSpec, gram, kernel_eval
from .pipeline import (
    FitResult,
    PipelineConfig,
    comparison_report,
    evaluate_model,
    fit_dataset,
    fit_from_features,
    predict_rows,
)
from .preprocess import (
    NormalizationParams,
    fit_calm_baseline,
    normalize_signal,
    preprocess_dataset,
    preprocess_record,
)
from .selection import (
    CovarianceMatrix,
    SelectionResult,
    correlation,
    covariance,
    covariance_matrix,
    per_label_covariance,
    select_features,
)
from .svm import (
    BinarySvmModel,
    MulticlassSvmModel,
    TrainConfig,
    decision_value,
    load_model,
    predict,
    predict_batch,
    save_model,
    train_binary,
    train_multiclass,
)
from .synth import LabelBands, SynthConfig, default_config, generate_dataset, generate_record
from .wavelet import (
    FilterBank,
    WaveletDecomposition,
    daubechies_filter_bank,
    denoise,
    dwt_decompose,
    dwt_reconstruct,
    soft_threshold,
)

__version__ = "0.1.0"
