pub mod cli;
pub mod corpus_db;
pub mod detector;
pub mod encoder;
pub mod eval;
pub mod fm_index;
pub mod metadata;
pub mod ref_filter;
pub mod report;
pub mod service;
pub mod synth;
