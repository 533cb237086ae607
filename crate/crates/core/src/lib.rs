//! Exact p-adic computer algebra for the Moser path method.
//!
//! Everything here works over the rationals with exact arithmetic; p-adic
//! sizes are read off as valuations. The layers build on each other:
//!
//! - [`padic`]: the [`Context`] (prime, truncation orders), valuations,
//!   norms and ball membership.
//! - [`series`]: truncated sparse multivariate power series.
//! - [`exterior`]: differential forms and vector fields with series
//!   coefficients in a single chart.
//! - [`solver`]: the power-series initial value problem solver and the
//!   rational-function expansion with Newton-polygon root bounds.
//! - [`darboux`]: linear symplectic normalization, homotopy primitives,
//!   the Moser vector field, its flow, and the exact pullback check.
//! - [`salerno`]: the Ablowitz-Ladik/Salerno symplectic form and its
//!   closed-form Moser field.
//!
//! All identities are checked coefficient-wise up to the truncation order
//! of the objects involved.

pub mod certificate;
pub mod darboux;
pub mod error;
pub mod exterior;
pub mod format;
pub mod linalg;
pub mod padic;
pub mod salerno;
pub mod series;
pub mod solver;

pub use certificate::{Certificate, Check, Verdict};
pub use error::{Error, Result};
pub use exterior::{FormMatrix, KForm, VectorField};
pub use padic::{Context, Rational, Valuation};
pub use series::MultiSeries;
