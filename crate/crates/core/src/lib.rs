//! Correspondence analysis (CA), its rotated Gini-covariance formulation and
//! kernel correspondence analysis (KCA), for classical contingency tables and
//! for word-context co-occurrence tables used to build word vectors.
//!
//! Pipeline for text:
//! [`corpus::count_cooccurrences`] → [`ca::fit_linear_ca`] /
//! [`kca::fit_kca`] / [`kca::fit_ws_kca`] → [`eval::evaluate`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ca;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod gini;
pub mod kca;
pub mod linalg;
pub mod tables;

pub use ca::{fit_linear_ca, EmbeddingSet, PointSet};
pub use error::{Error, Result};
pub use kca::{fit_kca, fit_ws_kca, KcaMethod};
pub use tables::{ContingencyTable, ObservationList};
