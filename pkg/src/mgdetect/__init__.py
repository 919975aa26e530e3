"""mgdetect: train and evaluate machine-generated-text detectors.

The toolkit ingests question/answer corpora, builds labeled units, trains
a hashed n-gram + stylometric linear detector, perturbs text with
misspelling and homoglyph attacks, and reports robustness tables. All
operations are deterministic given their explicit seeds.
"""

__version__ = "1.0.0"

from .attacks import PerturbationSpec, apply_attack, build_training_mix, perturb_testset
from .corpus import ExampleUnit, Label, Record, build_split, build_units, split_sentences
from .detector import Hyperparams, ModelParams, load_model, predict, save_model, train
from .errors import ToolkitError
from .features import FeatureConfig, FeatureVector, extract
from .pipeline import PipelineConfig, run_pipeline

__all__ = [
    "ExampleUnit",
    "FeatureConfig",
    "FeatureVector",
    "Hyperparams",
    "Label",
    "ModelParams",
    "PerturbationSpec",
    "PipelineConfig",
    "Record",
    "ToolkitError",
    "apply_attack",
    "build_split",
    "build_training_mix",
    "build_units",
    "extract",
    "load_model",
    "perturb_testset",
    "predict",
    "run_pipeline",
    "save_model",
    "split_sentences",
    "train",
    "__version__",
]
