//! Shared domain types for the tidy-up stack: object and receptacle names,
//! placements, primitives, benchmark scenarios, and the dataset file format.

pub mod dataset;
pub mod names;
pub mod types;

pub use dataset::{
    criteria_tally, load_dataset, parse_dataset, validate_dataset, DatasetError, DatasetStats,
    Finding, Invariant, ValidationReport,
};
pub use names::{NameError, ObjectName, ReceptacleName};
pub use types::{
    Dataset, Placement, Primitive, PrimitiveChoice, RoomType, Scenario, SortingCriterion, Split,
};
