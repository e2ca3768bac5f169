//! Exact computations for the formal classification of unipotent
//! parameterized diffeomorphisms of `(ℂⁿ⁺¹, 0)` that fix every parameter
//! coordinate.
//!
//! - [`series`]: truncated multivariate power series over ℚ(i)
//! - [`diffeo`]: exponential/logarithm of nilpotent vertical fields,
//!   composition, inversion, one-dimensional linearization
//! - [`residue`]: contact order and residues of the dual form
//! - [`homeq`]: homological equations, the special solver, evil sets
//! - [`classify`]: verdicts, the path-method conjugation and the CLI

pub mod boundary;
pub mod classify;
pub mod cli;
pub mod coeff;
pub mod diffeo;
pub mod error;
pub mod homeq;
pub mod linalg;
pub mod par;
pub mod residue;
pub mod roots;
pub mod series;

pub use boundary::{Factor, FactoredBoundary};
pub use coeff::Coefficient;
pub use diffeo::{OneDimDiffeo, ParamDiffeo, VerticalField};
pub use error::{Error, Result};
pub use series::{Monomial, MultiSeries};
