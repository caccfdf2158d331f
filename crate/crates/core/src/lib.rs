//! Numerical experiments on Hardy spaces of Dirichlet series.
//!
//! Dirichlet polynomials, their Bohr lifts to the polytorus, `H^p` norms,
//! vertical-line means and the Kronecker flow, the embedding problem on the
//! critical line, and the bidisc constructions of singular inner functions.

pub mod arith;
pub mod bidisc;
pub mod dirichlet;
pub mod embedding;
pub mod ergodic;
pub mod error;
pub mod norms;
pub mod quadrature;
pub mod reduce;

pub use arith::{
    dirichlet_convolve, factorize, multiindex_to_integer, nth_prime, CoefficientMap, MultiIndex, PrimeTable,
};
pub use dirichlet::{bohr_lift, bohr_push, DirichletPolynomial, PolytorusPolynomial};
pub use error::{Error, Result};
pub use norms::{ErrorBound, NormEstimate, NormMethod};
