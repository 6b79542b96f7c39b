pub mod dynamics;
pub mod error;
pub mod fairness;
pub mod generator;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod spin;
