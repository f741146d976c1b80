//! Exact symbolic kernel: rational polynomials in the wave symbols and
//! expressions over the hyperbolic and elliptic function rings.

mod basis;
mod poly;

pub use basis::{basis_functions, BasisExpression, BasisMonomial, Family};
pub use poly::{
    parse_rational, rat, rational_to_f64, rational_to_string, ConditionPolynomial, Exponents,
    Symbol, SymbolValues, NVARS,
};
