//! Numerical toolkit for Cauchy singular integrals on Carleson curves in
//! weighted variable Lebesgue spaces.
//!
//! The modules build on one another:
//!
//! - [`geometry`]: polyline curves, portions `Γ(t,R)` and the Carleson constant.
//! - [`exponent`]: variable exponents, conjugates and the Dini–Lipschitz modulus.
//! - [`vlebesgue`]: modulars and Luxemburg–Nakano norms.
//! - [`weights`]: radial rules, composite weights and their indices.
//! - [`submult`]: submultiplicative profiles and the regularity checks built on them.
//! - [`conditions`]: Muckenhoupt-type suprema and the index conditions.
//! - [`operator`]: discretized Cauchy integrals and weighted operator norms.
//! - [`harness`]: configuration files and report generation for the CLI.

pub mod conditions;
pub mod error;
pub mod exponent;
pub mod geometry;
pub mod harness;
pub mod operator;
pub mod quadrature;
pub mod submult;
pub mod vlebesgue;
pub mod weights;

pub use error::{Error, Result};
