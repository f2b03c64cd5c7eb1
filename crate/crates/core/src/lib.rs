#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ann;
pub mod annotation;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod detector;
pub mod error;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod signal;

pub use config::PipelineConfig;
pub use error::{Error, Result};
