//! A geometric model of inflectional morphology.
//!
//! Paradigm cells are corners of a hypercube in feature-value space and
//! morphemes are unit vectors in the same space. A cell is realized by the
//! morpheme with the largest inner product. Around that core the crate offers
//! smart initialization from a paradigm, delta-rule training, stem and affix
//! composition by vector sum, and inflection classes derived by rotating one
//! rigid configuration.

pub mod composition;
pub mod delta;
pub mod exponence;
pub mod features;
pub mod fixtures;
pub mod format;
pub mod report;
pub mod rotation;

pub use composition::{
    angle_of_sum, learn_angles, select_affix_for_stem, select_pair, wrap_angle, AngleData, AngleForm,
    AngleLearnConfig, AngleLearnOutcome, AngleModel, Axis, Choice, CompositionError, CompositionInventory, GoldForm,
    Labeled, Plane, PolarSum,
};
pub use delta::{delta_step, train, IterationRecord, TrainConfig, TrainOutcome, TrainTrace, UpdateSchedule};
pub use exponence::{
    competition, count_features, evaluate, max_rows, normalize_columns, smart_init, CellOutcome, CompetitionMatrix,
    CountArray, Evaluation, ExponenceError, ExponentMatrix, Selection, Tie, TotalParadigmMatrix,
};
pub use features::{
    build_phi, corner_vector, validate_feature_blocks, BlockViolation, Feature, FeatureError, FeatureSystem,
    ParadigmCell, PhiMatrix,
};
pub use format::{parse_str, ContentError, ParadigmFile, ParseError, NULL_MORPHEME};
pub use report::{LabeledTable, RunReport, RunStatus, REPORT_SCHEMA};
pub use rotation::{
    apply_rotation, base_configuration, class_of_base, deponent_transform, learn_class_rotation, run_class_batch,
    sigmoid_gain, BaseConfiguration, ClassBatchSummary, ClassInventory, InflectionClass, PlaneRotation,
    RotationError, RotationLearnConfig, RotationOutcome, RotationPlan,
};
