//! Text genre recognition from simple stylometric parameters.
//!
//! The pipeline reads part-of-speech tagged documents ([`corpus`]),
//! computes twenty counts and ratios per document ([`features`]), fits
//! linear discriminant functions over precategorized documents
//! ([`discriminant`]), tabulates classification errors per category
//! ([`evaluation`]) and draws ASCII territorial maps of the first two
//! discriminant functions ([`terrmap`]).

pub mod corpus;
pub mod discriminant;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod linalg;
mod model_file;
pub mod table;
pub mod taxonomy;
pub mod terrmap;

pub use error::{Error, Result};
