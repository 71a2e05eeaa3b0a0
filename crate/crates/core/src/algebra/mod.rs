//! *-polynomials over the free-with-phases algebra.

mod context;
mod monomial;
pub mod parse;
mod poly;

pub use context::{mono_phase, swap_phase, Context, Star};
pub use monomial::Monomial;
pub use parse::{parse, print, print_monomial};
pub use poly::StarPolynomial;
