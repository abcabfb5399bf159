//! Linear pencils `Q(Z) = Σ Q_j Z_j` and the operator balls `{X : ‖Q(X)‖ < 1}`.
//!
//! Kronecker convention: `Q(X) = Σ_j Q_j ⊗ X_j`, so the `n × n` block `(a, b)` of
//! `Q(X)` is `Σ_j (Q_j)_{ab} X_j`. The realization layer relies on the same layout.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{NcError, Result};
use crate::linalg::{self, CMat};
use crate::mattuple::MatrixTuple;
use crate::scalar::Real;

/// Default tolerance for the boundary band of [`OperatorBall::membership`].
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// An injective linear pencil with `p × q` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil<R: Real> {
    p: usize,
    q: usize,
    coefficients: Vec<CMat<R>>,
}

impl<R: Real> Pencil<R> {
    /// Validates shapes and linear independence of the coefficients.
    pub fn new(coefficients: Vec<CMat<R>>) -> Result<Self> {
        let first = coefficients
            .first()
            .ok_or_else(|| NcError::Invalid("a pencil needs d >= 1 coefficients".into()))?;
        let (p, q) = first.shape();
        if p == 0 || q == 0 {
            return Err(NcError::Shape(
                "pencil coefficients must be non-empty".into(),
            ));
        }
        if let Some(bad) = coefficients.iter().find(|c| c.shape() != (p, q)) {
            return Err(NcError::Shape(format!(
                "coefficient shape {:?} differs from {p}x{q}",
                bad.shape()
            )));
        }
        let d = coefficients.len();
        // rank of the d × pq flattening, threshold relative to the largest singular value
        let flat = DMatrix::from_fn(d, p * q, |j, k| coefficients[j][(k / q, k % q)]);
        let sv = linalg::singular_values(&flat);
        let top = sv
            .iter()
            .copied()
            .fold(R::zero(), |a, b| if b > a { b } else { a });
        let threshold = top * R::of(1e-10);
        let rank = sv.iter().filter(|&&s| s > threshold).count();
        if rank < d || top == R::zero() {
            return Err(NcError::DependentPencil { rank, d });
        }
        Ok(Self { p, q, coefficients })
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// Rows of the codomain.
    pub fn rows(&self) -> usize {
        self.p
    }

    /// Columns of the codomain.
    pub fn cols(&self) -> usize {
        self.q
    }

    pub fn coefficients(&self) -> &[CMat<R>] {
        &self.coefficients
    }

    /// `Q(X) = Σ_j Q_j ⊗ X_j`, a `(p n) × (q n)` matrix.
    pub fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        if x.dim() != self.dim() {
            return Err(NcError::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let n = x.level();
        let mut out = CMat::zeros(self.p * n, self.q * n);
        for (qj, xj) in self.coefficients.iter().zip(x.coords()) {
            out += linalg::kron(qj, xj);
        }
        Ok(out)
    }

    /// Row pencil `Q_j = e_j^T` (`p = 1`, `q = d`).
    pub fn row(d: usize) -> Self {
        let coefficients = (0..d)
            .map(|j| {
                DMatrix::from_fn(1, d, |_, k| {
                    if k == j {
                        Complex::one()
                    } else {
                        Complex::zero()
                    }
                })
            })
            .collect();
        Self {
            p: 1,
            q: d,
            coefficients,
        }
    }

    /// Diagonal pencil `Q_j = E_jj` (`p = q = d`).
    pub fn diagonal(d: usize) -> Self {
        let coefficients = (0..d)
            .map(|j| {
                DMatrix::from_fn(d, d, |a, b| {
                    if a == j && b == j {
                        Complex::one()
                    } else {
                        Complex::zero()
                    }
                })
            })
            .collect();
        Self {
            p: d,
            q: d,
            coefficients,
        }
    }

    /// Column pencil `Q_j = e_j` (`p = d`, `q = 1`).
    pub fn column(d: usize) -> Self {
        let coefficients = (0..d)
            .map(|j| {
                DMatrix::from_fn(d, 1, |k, _| {
                    if k == j {
                        Complex::one()
                    } else {
                        Complex::zero()
                    }
                })
            })
            .collect();
        Self {
            p: d,
            q: 1,
            coefficients,
        }
    }
}

/// Three-way answer of a membership query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Membership<R> {
    /// `‖Q(X)‖ < 1 − tol`; carries the boundary distance `1 − ‖Q(X)‖`.
    Inside(R),
    /// `|‖Q(X)‖ − 1| ≤ tol`; carries the signed deviation `‖Q(X)‖ − 1`.
    Boundary(R),
    /// `‖Q(X)‖ > 1 + tol`; carries the excess `‖Q(X)‖ − 1`.
    Outside(R),
}

impl<R: Real> Membership<R> {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }

    /// `1 − ‖Q(X)‖` regardless of the variant.
    pub fn distance(&self) -> R {
        match *self {
            Membership::Inside(d) => d,
            Membership::Boundary(dev) | Membership::Outside(dev) => -dev,
        }
    }
}

/// Canonical balls, or a custom pencil.
#[derive(Clone, Debug, PartialEq)]
pub enum BallKind {
    Row(usize),
    Polydisk(usize),
    Column(usize),
    Custom,
}

/// The nc operator ball `𝔻_Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorBall<R: Real> {
    pencil: Pencil<R>,
    kind: BallKind,
}

impl<R: Real> OperatorBall<R> {
    /// Wraps a pencil, recognizing the row, polydisk and column pencils by their coefficients.
    pub fn new(pencil: Pencil<R>) -> Self {
        let d = pencil.dim();
        let kind = if pencil == Pencil::row(d) {
            BallKind::Row(d)
        } else if pencil == Pencil::diagonal(d) {
            BallKind::Polydisk(d)
        } else if pencil == Pencil::column(d) {
            BallKind::Column(d)
        } else {
            BallKind::Custom
        };
        Self { pencil, kind }
    }

    pub fn row_ball(d: usize) -> Self {
        Self {
            pencil: Pencil::row(d),
            kind: BallKind::Row(d),
        }
    }

    pub fn polydisk(d: usize) -> Self {
        Self {
            pencil: Pencil::diagonal(d),
            kind: BallKind::Polydisk(d),
        }
    }

    pub fn column_ball(d: usize) -> Self {
        Self {
            pencil: Pencil::column(d),
            kind: BallKind::Column(d),
        }
    }

    pub fn pencil(&self) -> &Pencil<R> {
        &self.pencil
    }

    pub fn kind(&self) -> &BallKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.pencil.dim()
    }

    /// `‖Q(X)‖`.
    pub fn pencil_norm(&self, x: &MatrixTuple<R>) -> Result<R> {
        Ok(linalg::op_norm(&self.pencil.eval(x)?))
    }

    pub fn membership_with_tol(&self, x: &MatrixTuple<R>, tol: R) -> Result<Membership<R>> {
        let s = self.pencil_norm(x)?;
        let one = R::one();
        Ok(if s < one - tol {
            Membership::Inside(one - s)
        } else if (s - one).abs() <= tol {
            Membership::Boundary(s - one)
        } else {
            Membership::Outside(s - one)
        })
    }

    /// Classifies `X` against `‖Q(X)‖ < 1` with the default tolerance.
    pub fn membership(&self, x: &MatrixTuple<R>) -> Result<Membership<R>> {
        self.membership_with_tol(x, R::of(DEFAULT_MEMBERSHIP_TOL))
    }

    pub fn contains(&self, x: &MatrixTuple<R>) -> Result<bool> {
        Ok(self.membership(x)?.is_inside())
    }

    /// Shorthand used by the CLI (`row:d`, `polydisk:d`, `column:d`), or `None` for custom pencils.
    pub fn shorthand(&self) -> Option<String> {
        match self.kind {
            BallKind::Row(d) => Some(format!("row:{d}")),
            BallKind::Polydisk(d) => Some(format!("polydisk:{d}")),
            BallKind::Column(d) => Some(format!("column:{d}")),
            BallKind::Custom => None,
        }
    }
}

impl<R: Real> fmt::Display for OperatorBall<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shorthand() {
            Some(s) => f.write_str(&s),
            None => write!(
                f,
                "pencil(d={}, {}x{})",
                self.dim(),
                self.pencil.p,
                self.pencil.q
            ),
        }
    }
}

impl<R: Real> FromStr for OperatorBall<R> {
    type Err = NcError;

    /// Parses `row:d`, `polydisk:d` or `column:d`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, d) = s.split_once(':').ok_or_else(|| {
            NcError::Invalid(format!(
                "ball shorthand {s:?} must look like row:d or polydisk:d"
            ))
        })?;
        let d: usize = d
            .trim()
            .parse()
            .map_err(|_| NcError::Invalid(format!("bad dimension in {s:?}")))?;
        if d == 0 {
            return Err(NcError::Invalid("ball dimension must be positive".into()));
        }
        match kind.trim() {
            "row" => Ok(Self::row_ball(d)),
            "polydisk" => Ok(Self::polydisk(d)),
            "column" | "col" => Ok(Self::column_ball(d)),
            other => Err(NcError::Invalid(format!("unknown ball kind {other:?}"))),
        }
    }
}

/// `Q(X)` as a free function.
pub fn pencil_eval<R: Real>(q: &Pencil<R>, x: &MatrixTuple<R>) -> Result<CMat<R>> {
    q.eval(x)
}

/// `(⟨X_1 v, v⟩, …, ⟨X_d v, v⟩)` for a unit vector `v`.
pub fn state_compression<R: Real>(x: &MatrixTuple<R>, v: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
    if v.len() != x.level() {
        return Err(NcError::LevelMismatch {
            expected: x.level(),
            found: v.len(),
        });
    }
    let v = nalgebra::DVector::from_column_slice(v);
    let defect = (v.norm() - R::one()).abs();
    if defect.as_f64() > 1e-12 {
        return Err(NcError::NotUnitVector {
            defect: defect.as_f64(),
        });
    }
    Ok(x.coords().iter().map(|m| v.dotc(&(m * &v))).collect())
}

/// `(V^* X_1 V, …, V^* X_d V)` for an isometry `V : ℂ^k → ℂ^n`.
pub fn ucp_compression<R: Real>(x: &MatrixTuple<R>, v: &CMat<R>) -> Result<MatrixTuple<R>> {
    if v.nrows() != x.level() {
        return Err(NcError::LevelMismatch {
            expected: x.level(),
            found: v.nrows(),
        });
    }
    let k = v.ncols();
    let gram = v.adjoint() * v;
    let defect = linalg::max_abs_diff(&gram, &linalg::identity(k));
    if defect > 1e-10 {
        return Err(NcError::NotIsometry { defect });
    }
    let vh = v.adjoint();
    MatrixTuple::new(x.coords().iter().map(|m| &vh * m * v).collect())
}

/// Checks `‖X‖_∞ < 2r` for in-ball samples, given that `r` bounds the level-1 slice.
///
/// Level-1 samples are used to validate the bound; a sample outside the ball is an error.
pub fn factor_two_check<R: Real>(
    ball: &OperatorBall<R>,
    samples: &[MatrixTuple<R>],
    r: R,
) -> Result<bool> {
    for x in samples {
        if !ball.contains(x)? {
            return Err(NcError::SampleOutsideBall);
        }
        if let Some(scalars) = x.as_scalars() {
            for z in scalars {
                let m = crate::scalar::modulus(z);
                if m > r {
                    return Err(NcError::InvalidBound {
                        r: r.as_f64(),
                        modulus: m.as_f64(),
                    });
                }
            }
        }
    }
    let bound = r + r;
    Ok(samples.iter().all(|x| x.sup_norm() < bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    type C = Complex<f64>;

    fn pt(xs: &[f64]) -> MatrixTuple<f64> {
        MatrixTuple::scalar(&xs.iter().map(|&x| C::new(x, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn canonical_pencils_at_scalars() {
        let x = pt(&[0.3, -0.4]);
        let diag = Pencil::diagonal(2).eval(&x).unwrap();
        assert_eq!(
            diag,
            CMat::from_row_slice(
                2,
                2,
                &[C::new(0.3, 0.0), C::zero(), C::zero(), C::new(-0.4, 0.0)]
            )
        );
        let row = Pencil::row(3).eval(&pt(&[0.1, 0.2, 0.3])).unwrap();
        assert_eq!(
            row,
            CMat::from_row_slice(
                1,
                3,
                &[C::new(0.1, 0.0), C::new(0.2, 0.0), C::new(0.3, 0.0)]
            )
        );
        let zero = Pencil::<f64>::row(2)
            .eval(&MatrixTuple::zeros(3, 2))
            .unwrap();
        assert_eq!(zero.shape(), (3, 6));
        assert!(zero.iter().all(|z| z.is_zero()));
    }

    #[test]
    fn membership_examples() {
        let poly = OperatorBall::polydisk(2);
        assert_eq!(
            poly.membership(&MatrixTuple::zeros(2, 2)).unwrap(),
            Membership::Inside(1.0)
        );
        match poly.membership(&pt(&[0.9, 0.5])).unwrap() {
            Membership::Inside(d) => assert!((d - 0.1).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        let row = OperatorBall::row_ball(2);
        match row.membership(&pt(&[0.8, 0.7])).unwrap() {
            Membership::Outside(e) => assert!((e - (1.13f64.sqrt() - 1.0)).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        assert!(row.contains(&pt(&[0.6, 0.6])).unwrap());
        match poly.membership(&pt(&[0.6, 0.6])).unwrap() {
            Membership::Inside(d) => assert!((d - 0.4).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            poly.membership(&pt(&[1.0, 0.0])).unwrap(),
            Membership::Boundary(_)
        ));
    }

    #[test]
    fn one_dimensional_balls_are_the_disk() {
        for x in [0.0, 0.5, 0.99, 1.01, 3.0] {
            let p = pt(&[x]);
            let expected = x < 1.0;
            assert_eq!(OperatorBall::row_ball(1).contains(&p).unwrap(), expected);
            assert_eq!(OperatorBall::polydisk(1).contains(&p).unwrap(), expected);
        }
    }

    #[test]
    fn dependent_pencils_are_rejected() {
        let e = CMat::<f64>::identity(2, 2);
        let err = Pencil::new(vec![e.clone(), e * C::new(2.0, 0.0)]).unwrap_err();
        assert_eq!(err, NcError::DependentPencil { rank: 1, d: 2 });
        assert!(Pencil::<f64>::new(vec![CMat::zeros(2, 2)]).is_err());
        assert!(Pencil::new(vec![CMat::<f64>::identity(2, 2), CMat::identity(3, 3)]).is_err());
    }

    #[test]
    fn state_compression_examples() {
        let x = MatrixTuple::new(vec![
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C::new(0.2, 0.0),
                C::new(0.5, 0.0),
            ])),
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C::new(-0.3, 0.1),
                C::new(0.0, 0.0),
            ])),
        ])
        .unwrap();
        let s = state_compression(&x, &[C::one(), C::zero()]).unwrap();
        assert_eq!(s, vec![C::new(0.2, 0.0), C::new(-0.3, 0.1)]);
        let z =
            state_compression(&MatrixTuple::<f64>::zeros(2, 3), &[C::one(), C::zero()]).unwrap();
        assert!(z.iter().all(|c| c.is_zero()));
        assert!(matches!(
            state_compression(&x, &[C::one(), C::one()]),
            Err(NcError::NotUnitVector { .. })
        ));
    }

    #[test]
    fn ucp_compression_consistency() {
        let x = MatrixTuple::new(vec![
            CMat::from_row_slice(
                2,
                2,
                &[
                    cplx(0.1, 0.2),
                    cplx(0.3, 0.0),
                    cplx(-0.2, 0.1),
                    cplx(0.0, -0.4),
                ],
            ),
            CMat::from_row_slice(
                2,
                2,
                &[
                    cplx(0.0, 0.0),
                    cplx(0.5, 0.0),
                    cplx(0.1, 0.0),
                    cplx(0.2, 0.2),
                ],
            ),
        ])
        .unwrap();
        assert_eq!(ucp_compression(&x, &CMat::identity(2, 2)).unwrap(), x);
        let e1 = CMat::from_column_slice(2, 1, &[C::one(), C::zero()]);
        let c = ucp_compression(&x, &e1).unwrap();
        let s = state_compression(&x, &[C::one(), C::zero()]).unwrap();
        assert_eq!(c.as_scalars().unwrap(), s);
        let not_iso = CMat::from_column_slice(2, 1, &[C::new(2.0, 0.0), C::zero()]);
        assert!(matches!(
            ucp_compression(&x, &not_iso),
            Err(NcError::NotIsometry { .. })
        ));
    }

    #[test]
    fn factor_two_examples() {
        let poly = OperatorBall::polydisk(2);
        let samples = vec![pt(&[0.5, -0.9]), MatrixTuple::zeros(3, 2)];
        assert!(factor_two_check(&poly, &samples, 1.0).unwrap());
        assert!(factor_two_check(&poly, &[], 1.0).unwrap());
        assert_eq!(
            factor_two_check(&poly, &[pt(&[1.5, 0.0])], 1.0),
            Err(NcError::SampleOutsideBall)
        );
        assert!(matches!(
            factor_two_check(&poly, &[pt(&[0.9, 0.0])], 0.5),
            Err(NcError::InvalidBound { .. })
        ));
    }

    #[test]
    fn shorthand_roundtrip() {
        for s in ["row:3", "polydisk:2", "column:4"] {
            let b: OperatorBall<f64> = s.parse().unwrap();
            assert_eq!(b.shorthand().unwrap(), s);
        }
        assert!("disk:2".parse::<OperatorBall<f64>>().is_err());
        assert!("row:0".parse::<OperatorBall<f64>>().is_err());
        assert!("row".parse::<OperatorBall<f64>>().is_err());
    }
}
