//! Difference-differential calculus by block upper-triangular evaluation.
//!
//! For an nc function `f`, `f([[X, H], [0, Y]]) = [[f(X), Δf(X, Y)[H]], [0, f(Y)]]`.
//! Order-one differences are read off the `(1, 2)` block; higher-order ones at
//! the origin come from the power-series coefficients of a realization.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{NcError, Result};
use crate::freealg::{FreePolynomial, Word};
use crate::linalg::{self, CMat};
use crate::mattuple::MatrixTuple;
use crate::realize::{Realization, RemainderFactor};
use crate::scalar::{modulus, Real};

/// Separation below which difference quotients switch to block evaluation.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Budget on `d^N` for Taylor–Taylor checks.
pub const TT_WORD_BUDGET: f64 = 1e5;

/// A graded function that can be evaluated at matrix tuples.
pub trait NcFunction<R: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>>;

    fn describe(&self) -> String {
        format!("nc function (d={})", self.dim())
    }
}

impl<R: Real> NcFunction<R> for FreePolynomial<Complex<R>> {
    fn dim(&self) -> usize {
        FreePolynomial::dim(self)
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        x.eval_poly(self)
    }

    fn describe(&self) -> String {
        format!(
            "polynomial of degree {} (d={})",
            self.degree(),
            FreePolynomial::dim(self)
        )
    }
}

impl<R: Real> NcFunction<R> for Realization<R> {
    fn dim(&self) -> usize {
        Realization::dim(self)
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        Realization::eval(self, x)
    }

    fn describe(&self) -> String {
        format!(
            "{} realization (d={}, m={})",
            self.mode().as_str(),
            Realization::dim(self),
            self.state_dim()
        )
    }
}

impl<R: Real> NcFunction<R> for RemainderFactor<R> {
    fn dim(&self) -> usize {
        self.realization().dim()
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        RemainderFactor::eval(self, x)
    }

    fn describe(&self) -> String {
        format!("remainder factor g_{}", self.word())
    }
}

impl<R: Real, F: NcFunction<R> + ?Sized> NcFunction<R> for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        (**self).eval(x)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<R: Real, F: NcFunction<R> + ?Sized> NcFunction<R> for Box<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        (**self).eval(x)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// The evaluable classes the library can represent.
#[derive(Clone, Debug)]
pub enum EvaluableNcFunction<R: Real> {
    Polynomial(FreePolynomial<Complex<R>>),
    Realization(Arc<Realization<R>>),
    Remainder(RemainderFactor<R>),
}

impl<R: Real> NcFunction<R> for EvaluableNcFunction<R> {
    fn dim(&self) -> usize {
        match self {
            Self::Polynomial(p) => FreePolynomial::dim(p),
            Self::Realization(f) => f.dim(),
            Self::Remainder(g) => g.realization().dim(),
        }
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        match self {
            Self::Polynomial(p) => x.eval_poly(p),
            Self::Realization(f) => f.eval(x),
            Self::Remainder(g) => g.eval(x),
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::Polynomial(p) => NcFunction::<R>::describe(p),
            Self::Realization(f) => NcFunction::describe(f.as_ref()),
            Self::Remainder(g) => NcFunction::describe(g),
        }
    }
}

/// `Z ↦ [1 − D(I ⊗ Q(Z))]^{-1} C`, a column-valued nc function.
#[derive(Clone, Debug)]
pub struct ResolventTerm<R: Real>(pub Arc<Realization<R>>);

impl<R: Real> NcFunction<R> for ResolventTerm<R> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        self.0.resolvent_term(x)
    }

    fn describe(&self) -> String {
        "resolvent term".into()
    }
}

/// `x ↦ Δf(0, x)[h]` as a function of scalar points, evaluated by [`delta_first`].
///
/// At level `n > 1` the base point is `0_n` and the direction is `h · I_n`.
#[derive(Clone)]
pub struct FirstDifference<R: Real, F> {
    pub f: F,
    pub direction: Vec<Complex<R>>,
}

impl<R: Real, F: NcFunction<R>> NcFunction<R> for FirstDifference<R, F> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        let n = x.level();
        let h = MatrixTuple::scalar_at_level(&self.direction, n)?;
        let block = upper_triangular(&MatrixTuple::zeros(n, x.dim()), &h, x)?;
        let fx = self.f.eval(&block)?;
        if fx.shape() != (2 * n, 2 * n) {
            return Err(NcError::Shape(
                "difference needs a square-valued function".into(),
            ));
        }
        Ok(fx.view((0, n), (n, n)).into_owned())
    }

    fn describe(&self) -> String {
        format!("first difference of {}", self.f.describe())
    }
}

/// The block tuple `[[X_j, H_j], [0, Y_j]]`; all three tuples share one level.
pub fn upper_triangular<R: Real>(
    x: &MatrixTuple<R>,
    h: &MatrixTuple<R>,
    y: &MatrixTuple<R>,
) -> Result<MatrixTuple<R>> {
    let n = x.level();
    for t in [h, y] {
        if t.dim() != x.dim() {
            return Err(NcError::DimensionMismatch {
                expected: x.dim(),
                found: t.dim(),
            });
        }
        if t.level() != n {
            return Err(NcError::LevelMismatch {
                expected: n,
                found: t.level(),
            });
        }
    }
    let mats = (0..x.dim())
        .map(|j| {
            let mut b = CMat::zeros(2 * n, 2 * n);
            b.view_mut((0, 0), (n, n)).copy_from(x.coord(j));
            b.view_mut((0, n), (n, n)).copy_from(h.coord(j));
            b.view_mut((n, n), (n, n)).copy_from(y.coord(j));
            b
        })
        .collect();
    MatrixTuple::new(mats)
}

fn scalar_valued<R: Real>(m: &CMat<R>, at: (usize, usize)) -> Result<Complex<R>> {
    if m.nrows() != m.ncols() {
        return Err(NcError::Shape(format!(
            "expected a square value, got {:?}",
            m.shape()
        )));
    }
    Ok(m[at])
}

/// `Δf(0, x)[h]`: the `(1, 2)` entry of `f` at `X_j = [[0, h_j], [0, x_j]]`.
pub fn delta_first<R: Real, F: NcFunction<R> + ?Sized>(
    f: &F,
    x: &[Complex<R>],
    h: &[Complex<R>],
) -> Result<Complex<R>> {
    let d = f.dim();
    if x.len() != d || h.len() != d {
        return Err(NcError::DimensionMismatch {
            expected: d,
            found: if x.len() != d { x.len() } else { h.len() },
        });
    }
    let block = upper_triangular(
        &MatrixTuple::zeros(1, d),
        &MatrixTuple::scalar(h)?,
        &MatrixTuple::scalar(x)?,
    )?;
    scalar_valued(&f.eval(&block)?, (0, 1))
}

/// The coordinate direction `e_j` (1-based).
pub fn unit_direction<R: Real>(d: usize, j: usize) -> Vec<Complex<R>> {
    (1..=d)
        .map(|k| {
            if k == j {
                Complex::one()
            } else {
                Complex::zero()
            }
        })
        .collect()
}

/// Both sides of the Taylor–Taylor identity at a point.
#[derive(Clone, Debug)]
pub struct TtReport<R: Real> {
    pub order: usize,
    pub lhs: CMat<R>,
    pub rhs: CMat<R>,
    /// Operator norm of `lhs − rhs`.
    pub defect: f64,
    pub passed: bool,
}

fn tt_precheck(d: usize, order: usize) -> Result<()> {
    if order == 0 {
        return Err(NcError::Invalid(
            "expansion order N must be positive".into(),
        ));
    }
    let count = Word::count_of_size(d, order);
    if count > TT_WORD_BUDGET {
        return Err(NcError::EnumerationBudget {
            required: count,
            limit: TT_WORD_BUDGET,
        });
    }
    Ok(())
}

fn report<R: Real>(order: usize, lhs: CMat<R>, rhs: CMat<R>, tol: f64) -> TtReport<R> {
    let defect = linalg::op_norm(&(&lhs - &rhs)).as_f64();
    TtReport {
        order,
        lhs,
        rhs,
        defect,
        passed: defect <= tol,
    }
}

/// Checks `f(X) = Σ_{|v|<N} c_v X^v + Σ_{|w|=N} X^w g_w(X)` for a realization.
///
/// The left side is the resolvent formula; the right side uses power-series
/// coefficients and remainder factors.
pub fn tt_check<R: Real>(
    f: &Arc<Realization<R>>,
    x: &MatrixTuple<R>,
    order: usize,
    tol: f64,
) -> Result<TtReport<R>> {
    tt_precheck(f.dim(), order)?;
    let membership = f.ball().membership(x)?;
    if !membership.is_inside() {
        return Err(NcError::OutsideBall {
            excess: -membership.distance().as_f64(),
        });
    }
    let lhs = f.eval(x)?;
    let mut rhs = x.eval_poly(&f.taylor_polynomial(order - 1)?)?;
    for w in Word::all_of_size(f.dim(), order) {
        let g = f.remainder_factor(&w)?;
        rhs += x.eval_word(&w)? * g.eval(x)?;
    }
    Ok(report(order, lhs, rhs, tol))
}

/// Polynomial version of [`tt_check`]; the remainder factors are left quotients.
pub fn tt_check_poly<R: Real>(
    p: &FreePolynomial<Complex<R>>,
    x: &MatrixTuple<R>,
    order: usize,
    tol: f64,
) -> Result<TtReport<R>> {
    tt_precheck(p.dim(), order)?;
    let lhs = x.eval_poly(p)?;
    let mut low = FreePolynomial::zero(p.dim());
    for k in 0..order {
        low = low.add(&p.homogeneous_component(k))?;
    }
    let high = p.sub(&low)?;
    let mut rhs = x.eval_poly(&low)?;
    for (w, fw) in high.left_divide(order)?.nonzero() {
        rhs += x.eval_word(w)? * x.eval_poly(fw)?;
    }
    Ok(report(order, lhs, rhs, tol))
}

/// `Δf(x, y) = (f(x) − f(y)) / (x − y)` for `d = 1`; the `(1, 2)` entry of
/// `f([[x, 1], [0, y]])` when `|x − y| ≤ 1e-12`.
pub fn d1_difference_quotient<R: Real, F: NcFunction<R> + ?Sized>(
    f: &F,
    x: Complex<R>,
    y: Complex<R>,
) -> Result<Complex<R>> {
    if f.dim() != 1 {
        return Err(NcError::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    if modulus(x - y).as_f64() > COINCIDENCE_TOL {
        let fx = scalar_valued(&f.eval(&MatrixTuple::scalar(&[x])?)?, (0, 0))?;
        let fy = scalar_valued(&f.eval(&MatrixTuple::scalar(&[y])?)?, (0, 0))?;
        return Ok((fx - fy) / (x - y));
    }
    d1_block_quotient(f, x, y)
}

/// The `(1, 2)` entry of `f([[x, 1], [0, y]])` for `d = 1`.
pub fn d1_block_quotient<R: Real, F: NcFunction<R> + ?Sized>(
    f: &F,
    x: Complex<R>,
    y: Complex<R>,
) -> Result<Complex<R>> {
    let block = CMat::from_row_slice(2, 2, &[x, Complex::one(), Complex::zero(), y]);
    scalar_valued(&f.eval(&MatrixTuple::new(vec![block])?)?, (0, 1))
}

/// Solves the bidisk division problem `f(x) = f(0) + g₁(x) x₁ + g₂(x) x₂` with
/// `g₁ = (f(x₁, 0) − f(0, 0)) / x₁` and `g₂ = (f(x₁, x₂) − f(x₁, 0)) / x₂`.
pub fn gleason_split<R: Real, F: NcFunction<R> + ?Sized>(
    f: &F,
    x: [Complex<R>; 2],
) -> Result<(Complex<R>, Complex<R>)> {
    if f.dim() != 2 {
        return Err(NcError::DimensionMismatch {
            expected: 2,
            found: f.dim(),
        });
    }
    let [x1, x2] = x;
    let zero = Complex::zero();
    let at = |a: Complex<R>, b: Complex<R>| -> Result<Complex<R>> {
        scalar_valued(&f.eval(&MatrixTuple::scalar(&[a, b])?)?, (0, 0))
    };
    let g1 = if modulus(x1).as_f64() >= COINCIDENCE_TOL {
        (at(x1, zero)? - at(zero, zero)?) / x1
    } else {
        // t ↦ f(t, 0) differenced between x₁ and 0
        let t = CMat::from_row_slice(2, 2, &[x1, Complex::one(), zero, zero]);
        scalar_valued(
            &f.eval(&MatrixTuple::new(vec![t, CMat::zeros(2, 2)])?)?,
            (0, 1),
        )?
    };
    let g2 = if modulus(x2).as_f64() >= COINCIDENCE_TOL {
        (at(x1, x2)? - at(x1, zero)?) / x2
    } else {
        // t ↦ f(x₁, t) differenced between x₂ and 0
        let s = CMat::identity(2, 2) * x1;
        let t = CMat::from_row_slice(2, 2, &[x2, Complex::one(), zero, zero]);
        scalar_valued(&f.eval(&MatrixTuple::new(vec![s, t])?)?, (0, 1))?
    };
    Ok((g1, g2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::parse;
    use crate::realize::example_5_2;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn delta_of_bidisk_example() {
        let f = example_5_2::<f64>();
        let e1 = unit_direction(2, 1);
        let v = delta_first(&f, &[C::zero(), C::zero()], &e1).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        let x = [c(0.3, -0.4), c(-0.1, 0.5)];
        let v = delta_first(&f, &x, &e1).unwrap();
        assert!((v - (x[1] - 1.0) / (x[0] + x[1] - 2.0)).norm() < 1e-14);
    }

    #[test]
    fn delta_of_polynomials() {
        let p = parse::<C>("z1*z2", 2).unwrap();
        let (x, h) = ([c(0.3, 0.1), c(-0.6, 0.2)], [c(1.5, 0.0), c(-0.5, 2.0)]);
        assert!((delta_first(&p, &x, &h).unwrap() - h[0] * x[1]).norm() < 1e-15);
        assert!(delta_first(&p, &x, &unit_direction(2, 2)).unwrap().norm() < 1e-15);
        for j in 1..=3 {
            let zj = FreePolynomial::<C>::variable(3, j).unwrap();
            let h = [c(0.1, 0.0), c(0.2, 0.3), c(-0.7, 0.0)];
            assert_eq!(delta_first(&zj, &[C::zero(); 3], &h).unwrap(), h[j - 1]);
        }
        assert!(delta_first(&p, &[C::zero()], &[C::zero(); 2]).is_err());
    }

    #[test]
    fn first_difference_as_function() {
        let f = Arc::new(example_5_2::<f64>());
        let g = FirstDifference {
            f: Arc::clone(&f),
            direction: unit_direction(2, 1),
        };
        let x = MatrixTuple::scalar(&[c(0.2, 0.1), c(0.4, -0.3)]).unwrap();
        let expected = f
            .remainder_factor(&Word::letter(2, 1).unwrap())
            .unwrap()
            .eval(&x)
            .unwrap();
        assert!(linalg::max_abs_diff(&g.eval(&x).unwrap(), &expected) < 1e-14);
    }

    #[test]
    fn tt_identity_for_polynomials() {
        let p = parse::<C>("1 + z1 - 2*z2*z1 + (0.5+i)*z1*z2*z2", 2).unwrap();
        let x = MatrixTuple::new(vec![
            CMat::from_row_slice(
                2,
                2,
                &[c(0.1, 0.2), c(0.3, 0.0), c(-0.2, 0.1), c(0.0, -0.4)],
            ),
            CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.1), c(0.0, 0.3), c(-0.2, 0.0)]),
        ])
        .unwrap();
        for order in 1..=4 {
            let r = tt_check_poly(&p, &x, order, 1e-12).unwrap();
            assert!(r.passed, "order {order}: defect {}", r.defect);
        }
        // beyond the degree the remainder vanishes and the identity is exact
        let r = tt_check_poly(&p, &x, 5, 0.0).unwrap();
        assert_eq!(r.defect, 0.0);
    }

    #[test]
    fn tt_identity_order_one_at_scalars() {
        let f = Arc::new(example_5_2::<f64>());
        let x = MatrixTuple::scalar(&[c(0.6, 0.2), c(-0.3, 0.7)]).unwrap();
        let r = tt_check(&f, &x, 1, 1e-12).unwrap();
        assert!(r.passed, "defect {}", r.defect);
        let outside = MatrixTuple::scalar(&[c(1.2, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            tt_check(&f, &outside, 1, 1e-9),
            Err(NcError::OutsideBall { .. })
        ));
        assert!(matches!(
            tt_check(&f, &x, 17, 1e-9),
            Err(NcError::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn one_variable_quotients() {
        let sq = parse::<C>("z1^2", 1).unwrap();
        let (x, y) = (c(0.3, 0.1), c(-0.5, 0.2));
        assert!((d1_difference_quotient(&sq, x, y).unwrap() - (x + y)).norm() < 1e-15);
        assert!((d1_difference_quotient(&sq, x, x).unwrap() - x * 2.0).norm() < 1e-15);
        let id = parse::<C>("z1", 1).unwrap();
        assert!((d1_difference_quotient(&id, x, y).unwrap() - C::one()).norm() < 1e-15);
        let k = parse::<C>("3 - 2i", 1).unwrap();
        assert!(d1_difference_quotient(&k, x, y).unwrap().norm() < 1e-15);
        // block route agrees away from the diagonal
        let cube = parse::<C>("z1^3 - z1", 1).unwrap();
        let a = d1_difference_quotient(&cube, x, y).unwrap();
        let b = d1_block_quotient(&cube, x, y).unwrap();
        assert!((a - b).norm() < 1e-14);
        assert!(d1_difference_quotient(&parse::<C>("z1", 2).unwrap(), x, y).is_err());
    }

    #[test]
    fn gleason_examples() {
        let p = parse::<C>("z1*z2", 2).unwrap();
        let x = [c(0.4, 0.1), c(-0.3, 0.2)];
        let (g1, g2) = gleason_split(&p, x).unwrap();
        assert!(g1.norm() < 1e-15);
        assert!((g2 - x[0]).norm() < 1e-15);

        let f = example_5_2::<f64>();
        let (g1, _) = gleason_split(&f, x).unwrap();
        assert!((g1 - C::one() / (c(2.0, 0.0) - x[0])).norm() < 1e-14);

        let k = parse::<C>("0.25", 2).unwrap();
        assert_eq!(gleason_split(&k, x).unwrap(), (C::zero(), C::zero()));
    }

    #[test]
    fn gleason_at_coordinate_axes_uses_limits() {
        let f = example_5_2::<f64>();
        let (g1, g2) = gleason_split(&f, [C::zero(), C::zero()]).unwrap();
        // g₁(0) = 1/2 and g₂(0, 0) = ∂₂f(0, 0) = 1/2
        assert!((g1 - c(0.5, 0.0)).norm() < 1e-14);
        assert!((g2 - c(0.5, 0.0)).norm() < 1e-14);
        let x = [c(0.3, 0.2), C::zero()];
        let (g1, g2) = gleason_split(&f, x).unwrap();
        let f0 = f
            .eval(&MatrixTuple::scalar(&[C::zero(), C::zero()]).unwrap())
            .unwrap()[(0, 0)];
        let fx = f.eval(&MatrixTuple::scalar(&x).unwrap()).unwrap()[(0, 0)];
        assert!((f0 + g1 * x[0] + g2 * x[1] - fx).norm() < 1e-14);
        // ∂₂f(x₁, 0) against a central difference
        let h = 1e-6;
        let fp = f
            .eval(&MatrixTuple::scalar(&[x[0], c(h, 0.0)]).unwrap())
            .unwrap()[(0, 0)];
        let fm = f
            .eval(&MatrixTuple::scalar(&[x[0], c(-h, 0.0)]).unwrap())
            .unwrap()[(0, 0)];
        assert!((g2 - (fp - fm) / (2.0 * h)).norm() < 1e-8);
    }
}
