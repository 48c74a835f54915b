//! Exact computer algebra for twisted (Hom-) Lie algebroid geometry over a
//! truncated jet model of the base manifold.
//!
//! The crate constructs Hom-Lie algebroids, Hom-bundles, twisted connections
//! and the twisted gauge group over the finite-dimensional ring of truncated
//! polynomials with rational coefficients, and mechanically verifies the
//! algebraic identities these structures are required to satisfy: bracket
//! axioms, the square-zero property of the twisted Chevalley-Eilenberg
//! differential, connection laws, gauge action properties, irreducibility
//! via exact kernel computation, and the orthogonal slice decomposition —
//! all as exact rational linear algebra, no floating point anywhere.
//!
//! Derivative-like operators cannot see past the truncation order, so each
//! one carries an order budget; identities are asserted with `budget_eq`
//! below the degree where truncation could lie. Kernels, decompositions and
//! dimensions, in contrast, are exact statements about the model itself and
//! are computed with full exact matrices.
//!
//! All values are immutable after construction and all operations are pure;
//! everything is safe to evaluate concurrently.

// index loops mirror the matrix formulas throughout
#![allow(clippy::needless_range_loop)]

pub mod algebroid;
pub mod bundle;
pub mod cedram;
pub mod coeff;
pub mod connection;
pub mod error;
pub mod forms;
pub mod gauge;
pub mod jet;
pub mod linalg;
pub mod polymat;
pub mod rat;
pub mod report;
pub mod scenario;
pub mod slice;

pub use error::Error;
pub use jet::{Base, BaseEndo, JetPoly, JetShape, MultiIndex};
pub use rat::Rat;
