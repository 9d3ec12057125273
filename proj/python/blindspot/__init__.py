"""Find regions of feature space where a binary classifier performs poorly."""

from ._core import (  # noqa: F401
    BlindspotError,
    CallablePredictor,
    Condition,
    ConditionStats,
    Discretizer,
    Explanation,
    ExternalPredictor,
    FeatureKind,
    FeatureSpec,
    GbdtModel,
    GbdtParams,
    LabeledTable,
    LimeConfig,
    Metrics,
    Predictor,
    RegionConfig,
    RegionReport,
    SynthSpec,
    build_report,
    evaluate,
    explain,
    generate,
    load_csv,
    load_external_predictions,
    split,
    train_gbdt,
    write_csv,
    write_report_files,
)

__version__ = "0.1.0"
