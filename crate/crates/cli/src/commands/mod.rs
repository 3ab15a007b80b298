pub mod eval;
pub mod fixture;
pub mod ingest;
pub mod labels;
pub mod split;
pub mod sweep;
pub mod theory;
pub mod train;
