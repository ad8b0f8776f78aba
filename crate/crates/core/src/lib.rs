//! Infinitesimal Krammer representations of ADE reflection groups: exact
//! constructions over the rationals and Lie closures over small prime fields.

#![allow(clippy::needless_range_loop)]

pub mod branching;
pub mod closure;
pub mod coxeter;
pub mod error;
pub mod field;
pub mod form;
pub mod holonomy;
pub mod krammer;
pub mod matrix;
pub mod poly;
pub mod report;
pub mod suite;

pub use error::{Error, Result};

pub use closure::{ClosureBasis, ClosureOptions, ClosureOutcome, GeneratorSet, PrimeFieldMatrix};
pub use coxeter::{build_system, CoxeterSystem, Family, FoldSource, TypeSpec};
pub use matrix::{parse_rational, Rational, RationalMatrix};
pub use poly::{FactoredDiscriminant, UnivariatePolynomial};
pub use report::{CheckReport, Status, Verification};
pub use suite::{run_suite, CheckKind, SuiteConfig};
