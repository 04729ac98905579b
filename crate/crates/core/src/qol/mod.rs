//! Quality-of-life classification: feature assembly, oversampling, a small
//! neural network, evaluation metrics and per-feature significance.

pub mod crosscheck;
pub mod features;
pub mod metrics;
pub mod mlp;
pub mod model_file;
pub mod pipeline;
pub mod significance;
pub mod smote;

pub use features::{
    assemble_features, feature_columns, stratified_split, FeatureMatrix, FeatureSet, MinMaxScaler,
    Split, UnknownPolicy,
};
pub use mlp::{argmax, loss_and_gradient, predict_proba, train, MlpConfig, MlpParams, TrainedModel};
pub use smote::{smote_oversample, smote_with_origins, SmoteOutput, SyntheticOrigin};
pub use metrics::{evaluate, evaluate_probabilities, ClassMetrics, EvalReport, RocPoint};
pub use significance::{
    feature_significance, fit_multinomial_logit, FeatureSignificance, LogitFit, SignificanceReport,
};
pub use crosscheck::{optimal_gain_crosscheck, CrosscheckRow};
pub use pipeline::{results_rows, run_experiment, run_on_matrix, ExperimentResult, PipelineConfig, ResultsRow, Sampling, PROTOCOL};
pub use model_file::{Layer, ModelFile, MODEL_FORMAT, MODEL_VERSION};
