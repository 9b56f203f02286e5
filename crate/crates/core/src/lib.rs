//! Exact construction of the Shephard–Todd group G32 from the Weyl group of
//! type E6 through the exterior square `Λ: GL(V) → GL(∧²V)`, `dim V = 4`,
//! together with a battery of machine checks on the resulting group.

pub mod battery;
pub mod cache;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod field;
pub mod forms;
pub mod groups;
pub mod matrix;
pub mod pipeline;
pub mod rational;
pub mod reflection;

pub use error::{Error, Result};
pub use exterior::{exterior_square, wedge_form, wedge_gram, Bivector};
pub use field::{adjoin_sqrt, sqrt_rational, Field, FieldDescriptor, TowerElement};
pub use rational::Rational;
pub use matrix::{to_integer_matrix, CharPoly, IntMatrix, MatrixK};
pub use forms::{congruence_diagonalize, solve_form_transport, FormTransport, SymmetricForm};
pub use groups::{ConjClassTable, FiniteMatrixGroup, GroupElement};
pub use reflection::{RootSystemModel, MolienSeries, DegreeList};
pub use battery::{run_battery, BatteryConfig, VerificationReport};
pub use pipeline::ConstructionContext;
