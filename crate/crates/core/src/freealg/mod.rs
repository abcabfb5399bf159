//! Free words and free noncommutative polynomials.

mod parser;
mod polynomial;
mod word;

pub use parser::{parse, parse_expr, Expr};
pub use polynomial::{
    cesaro_sum, poly_add, poly_mul, poly_scale, CoefficientSource, FreePolynomial, LeftQuotients,
    WORD_BUDGET,
};
pub use word::{Word, WordsOfSize};
