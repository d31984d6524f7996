"""Post-hoc open-set recognition scoring and evaluation.

Scores exported classifier features/logits with four confidence rules
(costarr, msp, maxlogit, energy) and evaluates them with OOSA threshold
tables and OSCR curves, independent of any deep-learning framework.
"""

from .errors import (
    ConfigError,
    EmptySplitError,
    InvariantError,
    MissingFileError,
    NonFiniteDataError,
    OsrBenchError,
    PackError,
    PackFormatError,
    SizeMismatchError,
    UnsupportedVersionError,
)
from .metrics import (
    DEFAULT_GRID,
    OosaTable,
    OscrCurve,
    normalize_scores,
    oosa_at,
    oosa_table,
    oscr_curve,
)
from .pack import FeaturePack, apply_class_split, derive_logits, read_pack, write_pack
from .pipeline import RunConfig, evaluate_pack, run_eval
from .rng import PortableRng
from .scoring import (
    CalibrationModel,
    ScoredSet,
    ScoreMethod,
    concat_features,
    costarr_components,
    fit_calibration,
    gnl,
    hadamard_features,
    score_all,
    score_costarr,
    score_energy,
    score_maxlogit,
    score_msp,
    softmax,
)
from .splits import SplitSpec, split_classes, split_samples
from .synth import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "CalibrationModel",
    "ConfigError",
    "DEFAULT_GRID",
    "EmptySplitError",
    "FeaturePack",
    "InvariantError",
    "MissingFileError",
    "NonFiniteDataError",
    "OosaTable",
    "OscrCurve",
    "OsrBenchError",
    "PackError",
    "PackFormatError",
    "PortableRng",
    "RunConfig",
    "ScoreMethod",
    "ScoredSet",
    "SizeMismatchError",
    "SplitSpec",
    "SynthSpec",
    "UnsupportedVersionError",
    "apply_class_split",
    "concat_features",
    "costarr_components",
    "derive_logits",
    "evaluate_pack",
    "fit_calibration",
    "generate",
    "gnl",
    "hadamard_features",
    "normalize_scores",
    "oosa_at",
    "oosa_table",
    "oscr_curve",
    "read_pack",
    "run_eval",
    "score_all",
    "score_costarr",
    "score_energy",
    "score_maxlogit",
    "score_msp",
    "softmax",
    "split_classes",
    "split_samples",
    "write_pack",
]
