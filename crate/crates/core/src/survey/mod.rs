//! Survey data model, ingestion and aggregation.

pub mod aggregate;
pub mod load;
pub mod model;
pub mod schema;

pub use aggregate::{
    mean_satisfaction, proposal_counts, sector_totals, Axis, CountEntry, CountTable,
    SatisfactionCell, SatisfactionMatrix,
};
pub use load::{
    canonical_schema, export_canonical, load_survey, parse_survey, FlaggedRow, LoadReport,
    RejectedRow,
};
pub use model::{
    merge_qol_classes, Demographics, ParticipationCodes, ParticipationItem, QolAnswer, QolClass,
    SatisfactionCodes, SatisfactionSector, SurveyDataset, SurveyResponse,
};
pub use schema::{SchemaConfig, CANONICAL_COLUMNS};
