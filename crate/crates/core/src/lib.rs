//! Noncommutative functions on operator balls.
//!
//! Free polynomials and Fornasini–Marchesini realizations are evaluated at tuples of
//! complex matrices. The crate covers membership in balls `‖Q(X)‖ < 1` cut out by a
//! linear pencil, first difference-differentials, Taylor–Taylor expansions around the
//! origin, seeded sup-norm probes and algebraic subvarieties.
//!
//! Numerical code is generic over the real type `R` (`f32` or `f64`) through
//! [`scalar::Real`]; polynomial algebra is generic over any coefficient ring, including
//! exact rationals. The aliases below fix the common choices.

pub mod cli;
pub mod error;
pub mod formats;
pub mod freealg;
pub mod linalg;
pub mod mattuple;
pub mod ncdiff;
pub mod opball;
pub mod probe;
pub mod realize;
pub mod scalar;
pub mod varieties;

pub use error::{NcError, Result};
pub use freealg::{parse, FreePolynomial, Word};
pub use mattuple::MatrixTuple;
pub use ncdiff::{
    delta_first, gleason_split, tt_check, tt_check_poly, EvaluableNcFunction, NcFunction,
};
pub use opball::{Membership, OperatorBall, Pencil};
pub use probe::{estimate_sup, ProbeReport};
pub use realize::{example_5_2, Mode, Realization, RemainderFactor};
pub use scalar::Real;
pub use varieties::{example_4_12, AlgebraicVariety};

use num_complex::Complex;
use num_rational::{BigRational, Rational64};

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;
pub type MatrixTuple64 = MatrixTuple<f64>;
pub type MatrixTuple32 = MatrixTuple<f32>;
pub type Poly64 = FreePolynomial<C64>;
pub type Poly32 = FreePolynomial<C32>;
/// Polynomials with exact Gaussian-rational coefficients of machine size.
pub type ExactPoly = FreePolynomial<Complex<Rational64>>;
/// Polynomials with exact Gaussian-rational coefficients of arbitrary size.
pub type BigExactPoly = FreePolynomial<Complex<BigRational>>;
pub type Realization64 = Realization<f64>;
pub type Realization32 = Realization<f32>;
pub type Ball64 = OperatorBall<f64>;
pub type Ball32 = OperatorBall<f32>;
