//! Exact-rational ontological factorizations of data tables.
//!
//! A data table `D` records, for `s` preparations and `m` measurements with
//! `d` outcomes each, the probability of every outcome. An ontological
//! factorization writes `D = MP` through a finite set of ontic states. This
//! crate builds, verifies, compresses and analyses such factorizations with
//! exact rational arithmetic.

pub mod analysis;
pub mod cli;
pub mod compression;
pub mod error;
pub mod factorization;
pub mod matrix;
pub mod quantum;
pub mod rational;
pub mod render;
pub mod table;

pub use error::{Error, Result};
pub use factorization::{
    bounds_report, determinize, model1, model2, model2_with_limits, model3, parse_factorization,
    serialize_factorization, verify_of, BoundsReport, DeterminizePolicy, Model2Limits,
    OntFactorization,
};
pub use matrix::RatMatrix;
pub use rational::Rational;
pub use table::{
    binary_worst_case_table, parse_table, random_table, serialize_table, DataTable, Target,
    ValidationReport, Violation, ViolationKind,
};
