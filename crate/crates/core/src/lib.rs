//! Synthetic text-to-SQL data generation over relational databases.

pub mod db;
pub mod filler;
pub mod filters;
pub mod pipeline;
pub mod question;
pub mod ring;
pub mod samples;
pub mod simplifier;
pub mod sqlgen;
pub mod sqr;
pub mod stats;
pub mod templates;
