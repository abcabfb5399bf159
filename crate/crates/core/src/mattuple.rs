//! Points of the nc universe: `d`-tuples of `n × n` complex matrices.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{NcError, Result};
use crate::freealg::{FreePolynomial, Word};
use crate::linalg::{self, CMat, COND_LIMIT};
use crate::scalar::Real;

/// Default tolerance for norm-based predicates.
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

/// A point `X = (X_1, …, X_d)` at level `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple<R: Real> {
    n: usize,
    mats: Vec<CMat<R>>,
}

impl<R: Real> MatrixTuple<R> {
    pub fn new(mats: Vec<CMat<R>>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| NcError::Invalid("a tuple needs d >= 1 matrices".into()))?;
        let n = first.nrows();
        if n == 0 {
            return Err(NcError::Shape("level n must be positive".into()));
        }
        for (j, m) in mats.iter().enumerate() {
            if m.shape() != (n, n) {
                return Err(NcError::Shape(format!(
                    "entry {} has shape {:?}, expected {n}x{n}",
                    j + 1,
                    m.shape()
                )));
            }
        }
        Ok(Self { n, mats })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            mats: vec![CMat::zeros(n, n); d],
        }
    }

    /// Level-1 point from scalars.
    pub fn scalar(coords: &[Complex<R>]) -> Result<Self> {
        Self::new(
            coords
                .iter()
                .map(|&x| CMat::from_element(1, 1, x))
                .collect(),
        )
    }

    /// `x · I_n` in every coordinate.
    pub fn scalar_at_level(coords: &[Complex<R>], n: usize) -> Result<Self> {
        Self::new(coords.iter().map(|&x| CMat::identity(n, n) * x).collect())
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    /// 0-based coordinate access.
    pub fn coord(&self, j: usize) -> &CMat<R> {
        &self.mats[j]
    }

    pub fn coords(&self) -> &[CMat<R>] {
        &self.mats
    }

    pub fn into_coords(self) -> Vec<CMat<R>> {
        self.mats
    }

    /// Entries of a level-1 point.
    pub fn as_scalars(&self) -> Option<Vec<Complex<R>>> {
        (self.n == 1).then(|| self.mats.iter().map(|m| m[(0, 0)]).collect())
    }

    pub fn scale(&self, lambda: Complex<R>) -> Self {
        Self {
            n: self.n,
            mats: self.mats.iter().map(|m| m * lambda).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&CMat<R>) -> CMat<R>) -> Result<Self> {
        Self::new(self.mats.iter().map(f).collect())
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(NcError::DimensionMismatch {
                expected: d,
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// `‖X‖_∞ = max_j ‖X_j‖`.
    pub fn sup_norm(&self) -> R {
        self.mats
            .iter()
            .map(linalg::op_norm)
            .fold(R::zero(), |a, b| if b > a { b } else { a })
    }

    /// `X^w = X_{w_1} ⋯ X_{w_k}`; the unit word gives `I_n`.
    pub fn eval_word(&self, w: &Word) -> Result<CMat<R>> {
        self.check_dim(w.dim())?;
        let mut out = linalg::identity(self.n);
        for j in w.indices() {
            out *= &self.mats[j];
        }
        Ok(out)
    }

    /// `Σ_w c_w X^w`.
    pub fn eval_poly(&self, p: &FreePolynomial<Complex<R>>) -> Result<CMat<R>> {
        self.check_dim(p.dim())?;
        let mut out = CMat::zeros(self.n, self.n);
        for (w, c) in p.terms() {
            out += self.eval_word(w)? * *c;
        }
        Ok(out)
    }

    /// Block-diagonal `X ⊕ Y` at level `n + m`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Self::new(
            self.mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| linalg::block_diag(a, b))
                .collect(),
        )
    }

    /// `S · X = (S^{-1} X_j S)_j`, computed by LU solves.
    pub fn similarity(&self, s: &CMat<R>) -> Result<Self> {
        if s.shape() != (self.n, self.n) {
            return Err(NcError::LevelMismatch {
                expected: self.n,
                found: s.nrows(),
            });
        }
        let cond = linalg::condition(s);
        if cond.is_nan() || cond > COND_LIMIT {
            return Err(NcError::Singular { cond });
        }
        let lu = s.clone().lu();
        let mats = self
            .mats
            .iter()
            .map(|x| lu.solve(&(x * s)).ok_or(NcError::Singular { cond }))
            .collect::<Result<_>>()?;
        Ok(Self { n: self.n, mats })
    }

    /// `X^{(m)} = X ⊕ ⋯ ⊕ X`.
    pub fn ampliation(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(NcError::Invalid(
                "ampliation multiplicity must be positive".into(),
            ));
        }
        let id = linalg::identity::<R>(m);
        Self::new(self.mats.iter().map(|x| id.kronecker(x)).collect())
    }

    /// `true` iff `‖X^w‖ ≤ tol` for every word of size exactly `k`.
    pub fn is_nilpotent(&self, k: usize, tol: R) -> Result<bool> {
        if k == 0 {
            return Err(NcError::Invalid("nilpotency order must be positive".into()));
        }
        let count = Word::count_of_size(self.dim(), k);
        if count > 1e6 {
            return Err(NcError::EnumerationBudget {
                required: count,
                limit: 1e6,
            });
        }
        for w in Word::all_of_size(self.dim(), k) {
            if linalg::op_norm(&self.eval_word(&w)?) > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact zero test on every entry.
    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(|m| m.iter().all(Zero::is_zero))
    }
}

/// `P(X)`.
pub fn eval_poly<R: Real>(p: &FreePolynomial<Complex<R>>, x: &MatrixTuple<R>) -> Result<CMat<R>> {
    x.eval_poly(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::parse;
    use crate::scalar::cplx;

    type C = Complex<f64>;

    fn m2(a: [f64; 4]) -> CMat<f64> {
        CMat::from_row_slice(2, 2, &a.map(|x| C::new(x, 0.0)))
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(MatrixTuple::<f64>::zeros(3, 2).sup_norm(), 0.0);
        let x = MatrixTuple::scalar(&[cplx::<f64>(0.8, 0.0), cplx(0.7, 0.0)]).unwrap();
        assert!((x.sup_norm() - 0.8).abs() < 1e-15);
        let x = MatrixTuple::new(vec![m2([0.0, 2.0, 0.0, 0.0]), m2([0.0; 4])]).unwrap();
        assert!((x.sup_norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn shape_validation() {
        assert!(MatrixTuple::<f64>::new(vec![]).is_err());
        assert!(MatrixTuple::new(vec![m2([0.0; 4]), CMat::zeros(3, 3)]).is_err());
        assert!(MatrixTuple::<f64>::new(vec![CMat::zeros(2, 3)]).is_err());
    }

    #[test]
    fn evaluation_at_scalars() {
        let x = MatrixTuple::scalar(&[cplx::<f64>(0.3, 0.1), cplx(-0.2, 0.4)]).unwrap();
        let comm = parse::<C>("z1*z2 - z2*z1", 2).unwrap();
        assert_eq!(x.eval_poly(&comm).unwrap()[(0, 0)], C::new(0.0, 0.0));

        let half = MatrixTuple::scalar(&[cplx::<f64>(0.5, 0.0), cplx(0.5, 0.0)]).unwrap();
        let p = parse::<C>("2*z1*z2 - z1 - z2", 2).unwrap();
        assert!((half.eval_poly(&p).unwrap()[(0, 0)] - C::new(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!(
            half.eval_word(&Word::unit(2)).unwrap(),
            CMat::identity(1, 1)
        );
        assert!(half.eval_poly(&parse::<C>("z1", 3).unwrap()).is_err());
    }

    #[test]
    fn direct_sum_pads_with_zero() {
        let x = MatrixTuple::new(vec![m2([1.0, 2.0, 3.0, 4.0]), m2([0.0, 1.0, 0.0, 0.0])]).unwrap();
        let z = MatrixTuple::zeros(1, 2);
        let s = x.direct_sum(&z).unwrap();
        assert_eq!(s.level(), 3);
        assert_eq!(s.coord(0)[(1, 1)], C::new(4.0, 0.0));
        assert_eq!(s.coord(0)[(2, 2)], C::new(0.0, 0.0));
        assert_eq!(s.coord(0)[(0, 2)], C::new(0.0, 0.0));
        assert!(x.direct_sum(&MatrixTuple::zeros(1, 3)).is_err());
    }

    #[test]
    fn similarity_by_scalars_is_trivial() {
        let x =
            MatrixTuple::new(vec![m2([1.0, 2.0, 3.0, 4.0]), m2([0.5, -1.0, 0.0, 2.0])]).unwrap();
        let id = x.similarity(&CMat::identity(2, 2)).unwrap();
        assert!(linalg::max_abs_diff(id.coord(0), x.coord(0)) < 1e-15);
        let two = x
            .similarity(&(CMat::identity(2, 2) * C::new(2.0, 0.0)))
            .unwrap();
        assert!(linalg::max_abs_diff(two.coord(1), x.coord(1)) < 1e-15);
        assert!(matches!(
            x.similarity(&m2([1.0, 1.0, 1.0, 1.0])),
            Err(NcError::Singular { .. })
        ));
    }

    #[test]
    fn ampliation_keeps_norm() {
        let x =
            MatrixTuple::new(vec![m2([0.1, 0.7, -0.3, 0.2]), m2([0.0, 0.4, 0.5, 0.0])]).unwrap();
        assert_eq!(x.ampliation(1).unwrap(), x);
        let a = x.ampliation(5).unwrap();
        assert_eq!(a.level(), 10);
        assert!((a.sup_norm() - x.sup_norm()).abs() < 1e-12);
    }

    #[test]
    fn nilpotency() {
        let x = MatrixTuple::new(vec![m2([0.0, 1.0, 0.0, 0.0]), m2([0.0, 3.0, 0.0, 0.0])]).unwrap();
        assert!(x.is_nilpotent(2, 1e-12).unwrap());
        assert!(!x.is_nilpotent(1, 1e-12).unwrap());
        let id = MatrixTuple::<f64>::new(vec![CMat::identity(2, 2), CMat::identity(2, 2)]).unwrap();
        assert!(!id.is_nilpotent(3, 1e-12).unwrap());
        assert!(MatrixTuple::<f64>::zeros(2, 2)
            .is_nilpotent(1, 0.0)
            .unwrap());
        assert!(matches!(
            MatrixTuple::<f64>::zeros(1, 4).is_nilpotent(11, 0.0),
            Err(NcError::EnumerationBudget { .. })
        ));
    }
}
