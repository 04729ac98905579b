//! Top-k legitimacy curves, knee selection and optimal-k portfolios.

pub mod curve;
pub mod knee;
pub mod map;

pub use curve::{curve_from_weights, legitimacy, legitimacy_curve, legitimacy_of_weights, LegitimacyCurve};
pub use knee::{chord_distances, knee_index, optimal_k, KneeResult, KNEE_METHOD};
pub use map::{
    analyze_axis, analyze_counts, analyze_scope, axis_scopes, legitimacy_map, Demand,
    LegitimacyMap, MapItem, ScopeAnalysis,
};
