//! Scalar abstractions.
//!
//! Matrix-valued code is generic over a real field `R` (`f32` or `f64`) and
//! works with `Complex<R>` entries. Free polynomials are generic over any
//! commutative coefficient ring, which lets identities be checked exactly
//! with rational coefficients.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

/// Real scalar backing the floating-point layers.
pub trait Real:
    nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp + Send + Sync
{
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Modulus `|z|`.
pub fn modulus<R: Real>(z: Complex<R>) -> R {
    nalgebra::ComplexField::modulus(z)
}

/// Complex number over a real scalar.
pub fn cplx<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(R::of(re), R::of(im))
}

/// Coefficient ring of a free polynomial.
///
/// Any commutative ring with exact equality works; zero coefficients are
/// detected with `is_zero` and never stored.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
}

impl<T> Coefficient for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + Send
        + Sync
{
}

/// Coefficients that can be built from the literals of the polynomial grammar.
pub trait FromLiteral: Coefficient {
    /// Parses an unsigned decimal literal such as `3`, `0.25` or `.5`.
    fn from_decimal(text: &str) -> Option<Self>;

    /// The imaginary unit.
    fn imaginary_unit() -> Self;
}

/// Coefficients that render as literals which parse back to the same value.
pub trait ToLiteral: Coefficient {
    /// Literal text in the polynomial grammar, parenthesized when compound.
    fn to_literal(&self) -> String;

    /// Real and imaginary parts as `f64`, for CSV/JSON output.
    fn parts(&self) -> (f64, f64);
}

fn split_decimal(text: &str) -> Option<(&str, &str)> {
    if text.is_empty() || text == "." {
        return None;
    }
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((int, frac))
}

macro_rules! float_literals {
    ($t:ty) => {
        impl FromLiteral for Complex<$t> {
            fn from_decimal(text: &str) -> Option<Self> {
                split_decimal(text)?;
                text.parse::<$t>().ok().map(|re| Complex::new(re, 0.0))
            }

            fn imaginary_unit() -> Self {
                Complex::new(0.0, 1.0)
            }
        }

        impl ToLiteral for Complex<$t> {
            fn to_literal(&self) -> String {
                // `Display` for floats is shortest-roundtrip and never uses an exponent.
                let (re, im) = (self.re, self.im);
                match (re == 0.0, im == 0.0) {
                    (_, true) if re >= 0.0 => format!("{re}"),
                    (_, true) => format!("(-{})", -re),
                    (true, false) if im >= 0.0 => format!("{im}i"),
                    (true, false) => format!("(-{}i)", -im),
                    _ => {
                        let sign = if im < 0.0 { '-' } else { '+' };
                        let re_text = if re < 0.0 {
                            format!("-{}", -re)
                        } else {
                            format!("{re}")
                        };
                        format!("({re_text}{sign}{}i)", im.abs())
                    }
                }
            }

            fn parts(&self) -> (f64, f64) {
                (self.re as f64, self.im as f64)
            }
        }
    };
}

float_literals!(f32);
float_literals!(f64);

fn decimal_ratio(text: &str) -> Option<BigRational> {
    let (int, frac) = split_decimal(text)?;
    let digits = format!("{int}{frac}");
    let numer: num_bigint::BigInt = if digits.is_empty() {
        Zero::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = num_traits::pow(num_bigint::BigInt::from(10u8), frac.len());
    Some(BigRational::new(numer, denom))
}

impl FromLiteral for Complex<BigRational> {
    fn from_decimal(text: &str) -> Option<Self> {
        decimal_ratio(text).map(|re| Complex::new(re, Zero::zero()))
    }

    fn imaginary_unit() -> Self {
        Complex::new(Zero::zero(), One::one())
    }
}

impl FromLiteral for Complex<Ratio<i64>> {
    fn from_decimal(text: &str) -> Option<Self> {
        let r = decimal_ratio(text)?;
        let numer = r.numer().to_i64()?;
        let denom = r.denom().to_i64()?;
        Some(Complex::new(Ratio::new(numer, denom), Zero::zero()))
    }

    fn imaginary_unit() -> Self {
        Complex::new(Zero::zero(), One::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals() {
        assert_eq!(
            Complex::<f64>::from_decimal("0.25"),
            Some(Complex::new(0.25, 0.0))
        );
        assert_eq!(
            Complex::<f64>::from_decimal(".5"),
            Some(Complex::new(0.5, 0.0))
        );
        assert_eq!(Complex::<f64>::from_decimal("1e3"), None);
        assert_eq!(Complex::<f64>::from_decimal("."), None);
        let r = Complex::<Ratio<i64>>::from_decimal("0.125").unwrap();
        assert_eq!(r.re, Ratio::new(1, 8));
    }

    #[test]
    fn float_literal_text() {
        assert_eq!(Complex::new(2.0f64, 0.0).to_literal(), "2");
        assert_eq!(Complex::new(-0.5f64, 0.0).to_literal(), "(-0.5)");
        assert_eq!(Complex::new(0.0f64, -3.0).to_literal(), "(-3i)");
        assert_eq!(Complex::new(1.5f64, -0.25).to_literal(), "(1.5-0.25i)");
        assert_eq!(
            Complex::new(1e-20f64, 0.0).to_literal(),
            "0.00000000000000000001"
        );
    }

    #[test]
    fn real_conversions() {
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(0.25f32.as_f64(), 0.25);
        let z: Complex<f32> = cplx(1.0, -2.0);
        assert_eq!(z, Complex::new(1.0f32, -2.0));
    }
}
