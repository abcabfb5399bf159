//! Fornasini–Marchesini realizations over a pencil.
//!
//! A realization is system data `(A, B, C, D)` over `M = ℂ^m` and a pencil with
//! `p × q` coefficients. With `Λ(X) = I_m ⊗ Q(X)` it evaluates as
//!
//! ```text
//! f(X) = A I_n + (B ⊗ I_n) Λ(X) [1 − (D ⊗ I_n) Λ(X)]^{-1} (C ⊗ I_n)
//! ```
//!
//! where `B` is `1 × mp`, `C` is `mq × 1` and `D` is `mq × mp`. The resolvent is
//! always obtained by a pivoted solve with condition monitoring, never by a
//! Neumann sum.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{NcError, Result};
use crate::freealg::{CoefficientSource, FreePolynomial, Word, WORD_BUDGET};
use crate::linalg::{self, CMat, COND_LIMIT};
use crate::mattuple::MatrixTuple;
use crate::opball::{OperatorBall, Pencil};
use crate::scalar::Real;

/// Validation applied to the system data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `‖D‖ ≤ 1`.
    Contraction,
    /// `‖D‖ ≤ 1` and `V = [[A, B], [C, D]]` is an isometry.
    Isometry,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Contraction => "contraction",
            Mode::Isometry => "isometry",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = NcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contraction" => Ok(Mode::Contraction),
            "isometry" => Ok(Mode::Isometry),
            other => Err(NcError::Invalid(format!(
                "unknown realization mode {other:?}"
            ))),
        }
    }
}

/// Validation tolerance: `1e-10`, widened to the precision of `R`.
fn validation_tol<R: Real>() -> f64 {
    let eps = R::default_epsilon().as_f64();
    f64::max(1e-10, 64.0 * eps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Realization<R: Real> {
    pencil: Pencil<R>,
    m: usize,
    a: Complex<R>,
    b: CMat<R>,
    c: CMat<R>,
    d: CMat<R>,
    mode: Mode,
}

impl<R: Real> Realization<R> {
    /// Validates shapes and the mode invariant.
    pub fn new(
        pencil: Pencil<R>,
        m: usize,
        a: Complex<R>,
        b: CMat<R>,
        c: CMat<R>,
        d: CMat<R>,
        mode: Mode,
    ) -> Result<Self> {
        if m == 0 {
            return Err(NcError::Shape("state dimension m must be positive".into()));
        }
        let (p, q) = (pencil.rows(), pencil.cols());
        if b.shape() != (1, m * p) {
            return Err(NcError::Shape(format!(
                "B has shape {:?}, expected 1x{}",
                b.shape(),
                m * p
            )));
        }
        if c.shape() != (m * q, 1) {
            return Err(NcError::Shape(format!(
                "C has shape {:?}, expected {}x1",
                c.shape(),
                m * q
            )));
        }
        if d.shape() != (m * q, m * p) {
            return Err(NcError::Shape(format!(
                "D has shape {:?}, expected {}x{}",
                d.shape(),
                m * q,
                m * p
            )));
        }
        let tol = validation_tol::<R>();
        let norm = linalg::op_norm(&d).as_f64();
        if norm > 1.0 + tol {
            return Err(NcError::NotContractive { norm });
        }
        let f = Self {
            pencil,
            m,
            a,
            b,
            c,
            d,
            mode,
        };
        if mode == Mode::Isometry {
            let defect = f.isometry_defect();
            if defect > tol {
                return Err(NcError::IsometryDefect { defect });
            }
        }
        Ok(f)
    }

    /// The constant function `c` over a pencil.
    pub fn constant(pencil: Pencil<R>, value: Complex<R>) -> Self {
        let (p, q) = (pencil.rows(), pencil.cols());
        Self {
            pencil,
            m: 1,
            a: value,
            b: CMat::zeros(1, p),
            c: CMat::zeros(q, 1),
            d: CMat::zeros(q, p),
            mode: Mode::Contraction,
        }
    }

    /// System matrix `V = [[A, B], [C, D]]`, of size `(1 + mq) × (1 + mp)`.
    pub fn system_matrix(&self) -> CMat<R> {
        let (rows, cols) = (1 + self.d.nrows(), 1 + self.d.ncols());
        let mut v = CMat::zeros(rows, cols);
        v[(0, 0)] = self.a;
        v.view_mut((0, 1), (1, cols - 1)).copy_from(&self.b);
        v.view_mut((1, 0), (rows - 1, 1)).copy_from(&self.c);
        v.view_mut((1, 1), (rows - 1, cols - 1)).copy_from(&self.d);
        v
    }

    /// `max |V^*V − I|` entrywise.
    pub fn isometry_defect(&self) -> f64 {
        let v = self.system_matrix();
        let gram = v.adjoint() * &v;
        linalg::max_abs_diff(&gram, &linalg::identity(v.ncols()))
    }

    pub fn pencil(&self) -> &Pencil<R> {
        &self.pencil
    }

    pub fn dim(&self) -> usize {
        self.pencil.dim()
    }

    pub fn state_dim(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn a(&self) -> Complex<R> {
        self.a
    }

    pub fn b(&self) -> &CMat<R> {
        &self.b
    }

    pub fn c(&self) -> &CMat<R> {
        &self.c
    }

    pub fn d(&self) -> &CMat<R> {
        &self.d
    }

    /// The ball on which the realization is evaluated.
    pub fn ball(&self) -> OperatorBall<R> {
        OperatorBall::new(self.pencil.clone())
    }

    /// `Λ(X) = I_m ⊗ Q(X)`.
    fn lambda(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        Ok(linalg::kron(
            &linalg::identity(self.m),
            &self.pencil.eval(x)?,
        ))
    }

    /// `L_j = I_m ⊗ Q_j`.
    fn letter_block(&self, j: usize) -> CMat<R> {
        linalg::kron(&linalg::identity(self.m), &self.pencil.coefficients()[j])
    }

    /// Returns `Λ(X)` and the resolvent term `[1 − (D ⊗ I) Λ(X)]^{-1} (C ⊗ I)`.
    fn resolvent_parts(&self, x: &MatrixTuple<R>) -> Result<(CMat<R>, CMat<R>)> {
        let n = x.level();
        let lambda = self.lambda(x)?;
        let id_n = linalg::identity::<R>(n);
        let d_amp = linalg::kron(&self.d, &id_n);
        let size = d_amp.nrows();
        let operand = linalg::identity::<R>(size) - &d_amp * &lambda;
        let cond = linalg::condition(&operand);
        if cond.is_nan() || cond > COND_LIMIT {
            return Err(NcError::IllConditioned { cond });
        }
        let rhs = linalg::kron(&self.c, &id_n);
        let y = linalg::solve(&operand, &rhs).ok_or(NcError::IllConditioned { cond })?;
        Ok((lambda, y))
    }

    /// `f(X)`.
    pub fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        let n = x.level();
        let (lambda, y) = self.resolvent_parts(x)?;
        let id_n = linalg::identity::<R>(n);
        let b_amp = linalg::kron(&self.b, &id_n);
        Ok(&id_n * self.a + b_amp * lambda * y)
    }

    /// The resolvent term `[1 − (D ⊗ I_n) Λ(X)]^{-1} (C ⊗ I_n)`, of size `(mqn) × n`.
    pub fn resolvent_term(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        Ok(self.resolvent_parts(x)?.1)
    }

    /// Row vector `B L_{w_1} D L_{w_2} ⋯ D L_{w_k}` (length `mq`); requires `|w| ≥ 1`.
    fn word_row(&self, w: &Word) -> Result<CMat<R>> {
        if w.dim() != self.dim() {
            return Err(NcError::DimensionMismatch {
                expected: self.dim(),
                found: w.dim(),
            });
        }
        let mut letters = w.indices();
        let first = letters
            .next()
            .ok_or_else(|| NcError::Invalid("word must be non-empty".into()))?;
        let mut row = &self.b * self.letter_block(first);
        for j in letters {
            row = row * &self.d * self.letter_block(j);
        }
        Ok(row)
    }

    /// Coefficient `c_w` of the power series: `A` for the unit word, else `B L_{w_1} D ⋯ D L_{w_k} C`.
    pub fn power_series_coefficient(&self, w: &Word) -> Result<Complex<R>> {
        if w.is_empty() {
            if w.dim() != self.dim() {
                return Err(NcError::DimensionMismatch {
                    expected: self.dim(),
                    found: w.dim(),
                });
            }
            return Ok(self.a);
        }
        Ok((self.word_row(w)? * &self.c)[(0, 0)])
    }

    /// The factor `g_w` of the size-`|w|` remainder in the Taylor–Taylor expansion.
    pub fn remainder_factor(self: &Arc<Self>, w: &Word) -> Result<RemainderFactor<R>> {
        let row = self.word_row(w)?;
        Ok(RemainderFactor {
            realization: Arc::clone(self),
            word: w.clone(),
            row,
        })
    }

    /// Degree-`k` homogeneous part evaluated at `X` without enumerating words:
    /// `(B ⊗ I) Λ [(D ⊗ I) Λ]^{k−1} (C ⊗ I)`.
    pub fn homogeneous_eval(&self, x: &MatrixTuple<R>, k: usize) -> Result<CMat<R>> {
        Ok(self
            .homogeneous_evals(x, k + 1)?
            .pop()
            .expect("k + 1 parts"))
    }

    /// `[f_0(X), …, f_{count−1}(X)]`.
    pub fn homogeneous_evals(&self, x: &MatrixTuple<R>, count: usize) -> Result<Vec<CMat<R>>> {
        let n = x.level();
        let id_n = linalg::identity::<R>(n);
        let lambda = self.lambda(x)?;
        let b_lambda = linalg::kron(&self.b, &id_n) * &lambda;
        let d_lambda = linalg::kron(&self.d, &id_n) * &lambda;
        let mut v = linalg::kron(&self.c, &id_n);
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            if k == 0 {
                out.push(&id_n * self.a);
            } else {
                if k > 1 {
                    v = &d_lambda * v;
                }
                out.push(&b_lambda * &v);
            }
        }
        Ok(out)
    }

    /// `Σ_N(f)(X) = Σ_{k<N} (1 − k/N) f_k(X)`.
    pub fn cesaro_eval(&self, x: &MatrixTuple<R>, order: usize) -> Result<CMat<R>> {
        if order == 0 {
            return Err(NcError::Invalid("Cesàro order N must be positive".into()));
        }
        let parts = self.homogeneous_evals(x, order)?;
        let n = R::of(order as f64);
        let mut out = CMat::zeros(x.level(), x.level());
        for (k, part) in parts.into_iter().enumerate() {
            let weight = (n - R::of(k as f64)) / n;
            out += part * Complex::new(weight, R::zero());
        }
        Ok(out)
    }

    /// Truncated power series `Σ_{|w| ≤ degree} c_w Z^w`.
    pub fn taylor_polynomial(&self, degree: usize) -> Result<FreePolynomial<Complex<R>>> {
        let mut out = FreePolynomial::zero(self.dim());
        for k in 0..=degree {
            out = out.add(&self.homogeneous_part(k)?)?;
        }
        Ok(out)
    }
}

impl<R: Real> CoefficientSource<Complex<R>> for Realization<R> {
    fn dim(&self) -> usize {
        self.pencil.dim()
    }

    fn homogeneous_part(&self, k: usize) -> Result<FreePolynomial<Complex<R>>> {
        let count = Word::count_of_size(self.dim(), k);
        if count > WORD_BUDGET {
            return Err(NcError::EnumerationBudget {
                required: count,
                limit: WORD_BUDGET,
            });
        }
        let terms = Word::all_of_size(self.dim(), k)
            .map(|w| self.power_series_coefficient(&w).map(|c| (w, c)))
            .collect::<Result<Vec<_>>>()?;
        FreePolynomial::from_terms(self.dim(), terms)
    }
}

/// `g_w(X) = (B L_{w_1} D ⋯ D L_{w_N} ⊗ I_n) [1 − (D ⊗ I_n) Λ(X)]^{-1} (C ⊗ I_n)`.
#[derive(Clone, Debug)]
pub struct RemainderFactor<R: Real> {
    realization: Arc<Realization<R>>,
    word: Word,
    row: CMat<R>,
}

impl<R: Real> RemainderFactor<R> {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn realization(&self) -> &Realization<R> {
        &self.realization
    }

    pub fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        let y = self.realization.resolvent_term(x)?;
        Ok(linalg::kron(&self.row, &linalg::identity(x.level())) * y)
    }

    /// The same function as a contraction-mode realization with `A = rC`, `B = rD`.
    pub fn as_realization(&self) -> Realization<R> {
        let f = &self.realization;
        let a = (&self.row * &f.c)[(0, 0)];
        let b = &self.row * &f.d;
        Realization {
            pencil: f.pencil.clone(),
            m: f.m,
            a,
            b,
            c: f.c.clone(),
            d: f.d.clone(),
            mode: Mode::Contraction,
        }
    }
}

/// Validated constructor mirroring the field order `(pencil, m, A, B, C, D, mode)`.
pub fn make_realization<R: Real>(
    pencil: Pencil<R>,
    m: usize,
    a: Complex<R>,
    b: CMat<R>,
    c: CMat<R>,
    d: CMat<R>,
    mode: Mode,
) -> Result<Realization<R>> {
    Realization::new(pencil, m, a, b, c, d, mode)
}

/// The bidisk example: `M = ℂ`, polydisk pencil, `A = 0`, `B = [s, s]`, `C = [s; s]`,
/// `D = [[1/2, −1/2], [−1/2, 1/2]]` with `s = 1/√2`. Its system matrix is unitary and at
/// scalar points it equals `(2x₁x₂ − x₁ − x₂)/(x₁ + x₂ − 2)`.
pub fn example_5_2<R: Real>() -> Realization<R> {
    let s = Complex::new(R::one() / R::of(2.0).sqrt(), R::zero());
    let h = Complex::new(R::of(0.5), R::zero());
    let b = CMat::from_row_slice(1, 2, &[s, s]);
    let c = CMat::from_column_slice(2, 1, &[s, s]);
    let d = CMat::from_row_slice(2, 2, &[h, -h, -h, h]);
    Realization::new(
        Pencil::diagonal(2),
        1,
        Complex::zero(),
        b,
        c,
        d,
        Mode::Isometry,
    )
    .expect("bidisk example is a valid isometric realization")
}

/// Closed form of [`example_5_2`] at a scalar point.
pub fn example_5_2_closed_form<R: Real>(x1: Complex<R>, x2: Complex<R>) -> Complex<R> {
    let two = Complex::new(R::of(2.0), R::zero());
    (two * x1 * x2 - x1 - x2) / (x1 + x2 - two)
}
