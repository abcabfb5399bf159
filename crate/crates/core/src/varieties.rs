//! Algebraic nc subvarieties of operator balls.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{NcError, Result};
use crate::freealg::{parse, FreePolynomial};
use crate::linalg;
use crate::mattuple::MatrixTuple;
use crate::opball::OperatorBall;
use crate::probe::{sample_in_ball, sample_rng};
use crate::scalar::{Coefficient, FromLiteral, Real};

pub const DEFAULT_VARIETY_TOL: f64 = 1e-10;

/// Common zero set of finitely many free polynomials inside an operator ball.
#[derive(Clone, Debug)]
pub struct AlgebraicVariety<R: Real> {
    ambient: OperatorBall<R>,
    generators: Vec<FreePolynomial<Complex<R>>>,
}

impl<R: Real> AlgebraicVariety<R> {
    pub fn new(
        ambient: OperatorBall<R>,
        generators: Vec<FreePolynomial<Complex<R>>>,
    ) -> Result<Self> {
        let d = ambient.dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != d) {
            return Err(NcError::DimensionMismatch {
                expected: d,
                found: g.dim(),
            });
        }
        Ok(Self {
            ambient,
            generators,
        })
    }

    /// Parses each generator in the polynomial grammar.
    pub fn from_strings(ambient: OperatorBall<R>, generators: &[impl AsRef<str>]) -> Result<Self>
    where
        Complex<R>: FromLiteral,
    {
        let d = ambient.dim();
        let gens = generators
            .iter()
            .map(|g| parse(g.as_ref(), d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient, gens)
    }

    pub fn ambient(&self) -> &OperatorBall<R> {
        &self.ambient
    }

    pub fn generators(&self) -> &[FreePolynomial<Complex<R>>] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    /// Largest `‖P(X)‖` over the generators; `0` without generators.
    pub fn residual(&self, x: &MatrixTuple<R>) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(NcError::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        self.generators.iter().try_fold(0.0f64, |acc, g| {
            Ok(acc.max(linalg::op_norm(&x.eval_poly(g)?).as_f64()))
        })
    }

    pub fn contains_with_tol(&self, x: &MatrixTuple<R>, tol: f64) -> Result<bool> {
        let residual = self.residual(x)?;
        Ok(self.ambient.contains(x)? && residual <= tol)
    }

    pub fn contains(&self, x: &MatrixTuple<R>) -> Result<bool> {
        self.contains_with_tol(x, DEFAULT_VARIETY_TOL)
    }
}

/// `X ∈ V` at tolerance `tol`: inside the ambient ball and every generator vanishes.
pub fn variety_membership<R: Real>(
    v: &AlgebraicVariety<R>,
    x: &MatrixTuple<R>,
    tol: f64,
) -> Result<bool> {
    v.contains_with_tol(x, tol)
}

/// Result of a sampled homogeneity test.
#[derive(Clone, Debug, PartialEq)]
pub enum Homogeneity<R: Real> {
    /// Every `λX` stayed in the variety.
    Homogeneous { checked: usize },
    /// `λ · point` left the variety (residual reported).
    Witness {
        point: MatrixTuple<R>,
        lambda: Complex<R>,
        residual: f64,
    },
}

impl<R: Real> Homogeneity<R> {
    pub fn is_homogeneous(&self) -> bool {
        matches!(self, Self::Homogeneous { .. })
    }
}

/// Samples `count` points from `sampler` (seeded `seed + i`) and tests `λX ∈ V` for every `λ`.
pub fn homogeneity_sample<R: Real>(
    v: &AlgebraicVariety<R>,
    sampler: impl Fn(&mut ChaCha8Rng) -> Result<MatrixTuple<R>>,
    count: usize,
    lambdas: &[Complex<R>],
    seed: u64,
) -> Result<Homogeneity<R>> {
    let mut checked = 0;
    for i in 0..count {
        let x = sampler(&mut sample_rng(seed, i as u64))?;
        if !v.contains(&x)? {
            return Err(NcError::NotInVariety);
        }
        for &lambda in lambdas {
            let y = x.scale(lambda);
            if !v.contains(&y)? {
                let residual = v.residual(&y)?;
                return Ok(Homogeneity::Witness {
                    point: x,
                    lambda,
                    residual,
                });
            }
            checked += 1;
        }
    }
    Ok(Homogeneity::Homogeneous { checked })
}

/// `count` seeded scalars drawn uniformly from the open unit disk.
pub fn sample_disk_scalars<R: Real>(count: usize, seed: u64) -> Vec<Complex<R>> {
    (0..count)
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let r: f64 = rng.random::<f64>().sqrt() * 0.999;
            let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            Complex::new(R::of(r * t.cos()), R::of(r * t.sin()))
        })
        .collect()
}

/// A tuple of free polynomials viewed as a map `𝕄^d → 𝕄^e`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialMap<T: Coefficient> {
    components: Vec<FreePolynomial<T>>,
}

impl<T: Coefficient> PolynomialMap<T> {
    pub fn new(components: Vec<FreePolynomial<T>>) -> Result<Self> {
        let d = components
            .first()
            .map(|p| p.dim())
            .ok_or_else(|| NcError::Invalid("empty polynomial map".into()))?;
        if let Some(p) = components.iter().find(|p| p.dim() != d) {
            return Err(NcError::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        Ok(Self { components })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            components: (1..=d)
                .map(|j| FreePolynomial::variable(d, j).expect("1 ≤ j ≤ d"))
                .collect(),
        }
    }

    pub fn components(&self) -> &[FreePolynomial<T>] {
        &self.components
    }

    pub fn source_dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    /// `self ∘ inner`, i.e. `X ↦ self(inner(X))`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|p| p.substitute(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    /// Componentwise difference `self − other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.target_dim() != other.target_dim() {
            return Err(NcError::DimensionMismatch {
                expected: self.target_dim(),
                found: other.target_dim(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(p, q)| p.sub(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    pub fn map_coefficients<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> PolynomialMap<U> {
        PolynomialMap {
            components: self
                .components
                .iter()
                .map(|p| p.map_coefficients(&f))
                .collect(),
        }
    }
}

impl<R: Real> PolynomialMap<Complex<R>> {
    pub fn apply(&self, x: &MatrixTuple<R>) -> Result<MatrixTuple<R>> {
        MatrixTuple::new(
            self.components
                .iter()
                .map(|p| x.eval_poly(p))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// The graph varieties `V1 = {(X, X²)}`, `V2 = {(X, X³)}` of the bidisk and the maps between them.
#[derive(Clone, Debug)]
pub struct GraphPair<R: Real> {
    pub v1: AlgebraicVariety<R>,
    pub v2: AlgebraicVariety<R>,
    /// `G(X1, X2) = (X1, X1³)`, mapping `V1` onto `V2`.
    pub forward: PolynomialMap<Complex<R>>,
    /// `F(X1, X2) = (X1, X1²)`, mapping `V2` onto `V1`.
    pub backward: PolynomialMap<Complex<R>>,
}

/// Generators and maps of the graph pair over any coefficient ring.
pub fn graph_pair_polynomials<T: FromLiteral>() -> (
    FreePolynomial<T>,
    FreePolynomial<T>,
    PolynomialMap<T>,
    PolynomialMap<T>,
) {
    let p = |s: &str| parse::<T>(s, 2).expect("builtin polynomial");
    let forward = PolynomialMap::new(vec![p("z1"), p("z1^3")]).expect("same dimension");
    let backward = PolynomialMap::new(vec![p("z1"), p("z1^2")]).expect("same dimension");
    (p("z2 - z1^2"), p("z2 - z1^3"), forward, backward)
}

pub fn example_4_12<R: Real>() -> GraphPair<R>
where
    Complex<R>: FromLiteral,
{
    let (g1, g2, forward, backward) = graph_pair_polynomials::<Complex<R>>();
    GraphPair {
        v1: AlgebraicVariety::new(OperatorBall::polydisk(2), vec![g1]).expect("dimension 2"),
        v2: AlgebraicVariety::new(OperatorBall::polydisk(2), vec![g2]).expect("dimension 2"),
        forward,
        backward,
    }
}

/// `(T, T^k)` for a single matrix `T`.
pub fn graph_point<R: Real>(t: &linalg::CMat<R>, k: u32) -> Result<MatrixTuple<R>> {
    let mut power = linalg::identity::<R>(t.nrows());
    for _ in 0..k {
        power = &power * t;
    }
    MatrixTuple::new(vec![t.clone(), power])
}

/// Random strict contraction at level `n` with `‖T‖ = 1 − margin`.
pub fn sample_contraction<R: Real>(
    n: usize,
    margin: f64,
    rng: &mut impl Rng,
) -> Result<linalg::CMat<R>> {
    Ok(
        sample_in_ball(&OperatorBall::<R>::polydisk(1), n, margin, rng)?
            .coord(0)
            .clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    type C = Complex<f64>;

    fn scalar(a: f64, b: f64) -> MatrixTuple<f64> {
        MatrixTuple::scalar(&[C::new(a, 0.0), C::new(b, 0.0)]).unwrap()
    }

    #[test]
    fn membership_on_graph_variety() {
        let pair = example_4_12::<f64>();
        let t = sample_contraction::<f64>(3, 0.2, &mut sample_rng(3, 0)).unwrap();
        assert!(pair.v1.contains(&graph_point(&t, 2).unwrap()).unwrap());
        assert!(!pair.v1.contains(&scalar(0.5, 0.125)).unwrap());
        assert!((pair.v1.residual(&scalar(0.5, 0.125)).unwrap() - 0.125).abs() < 1e-15);
        assert!(pair.v1.contains(&MatrixTuple::zeros(2, 2)).unwrap());
        let outside = scalar(1.5, 2.25);
        assert!(!pair.v1.contains(&outside).unwrap());
        assert!(pair.v1.contains(&MatrixTuple::<f64>::zeros(1, 3)).is_err());
    }

    #[test]
    fn graph_variety_is_not_homogeneous() {
        let pair = example_4_12::<f64>();
        let half = [C::new(0.5, 0.0)];
        let out = homogeneity_sample(&pair.v1, |_| Ok(scalar(0.5, 0.25)), 1, &half, 0).unwrap();
        match out {
            Homogeneity::Witness { residual, .. } => assert!((residual - 0.0625).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let bad = homogeneity_sample(&pair.v1, |_| Ok(scalar(0.5, 0.125)), 1, &half, 0);
        assert_eq!(bad, Err(NcError::NotInVariety));
    }

    #[test]
    fn coordinate_subspace_is_homogeneous() {
        let v = AlgebraicVariety::<f64>::from_strings(OperatorBall::polydisk(2), &["z2"]).unwrap();
        let lambdas = sample_disk_scalars::<f64>(5, 11);
        let sampler = |rng: &mut ChaCha8Rng| {
            let t = sample_contraction::<f64>(2, 0.1, rng)?;
            MatrixTuple::new(vec![t, linalg::CMat::zeros(2, 2)])
        };
        let out = homogeneity_sample(&v, sampler, 20, &lambdas, 4).unwrap();
        assert_eq!(out, Homogeneity::Homogeneous { checked: 100 });
        let zero = homogeneity_sample(&v, sampler, 3, &[C::new(0.0, 0.0)], 4).unwrap();
        assert!(zero.is_homogeneous());
    }

    #[test]
    fn roundtrips_are_exact_as_polynomials() {
        let (g1, g2, forward, backward) = graph_pair_polynomials::<Complex<Rational64>>();
        let id = PolynomialMap::identity(2);
        let fg = backward.compose(&forward).unwrap().sub(&id).unwrap();
        assert!(fg.components()[0].is_zero());
        assert_eq!(fg.components()[1], g1.neg());
        let gf = forward.compose(&backward).unwrap().sub(&id).unwrap();
        assert!(gf.components()[0].is_zero());
        assert_eq!(gf.components()[1], g2.neg());
    }

    #[test]
    fn roundtrips_at_matrix_points() {
        let pair = example_4_12::<f64>();
        for n in 1..=4 {
            let t = sample_contraction::<f64>(n, 0.05, &mut sample_rng(9, n as u64)).unwrap();
            let x = graph_point(&t, 2).unwrap();
            let y = pair.forward.apply(&x).unwrap();
            assert!(pair.v2.contains(&y).unwrap());
            let back = pair.backward.apply(&y).unwrap();
            for j in 0..2 {
                assert!(linalg::max_abs_diff(back.coord(j), x.coord(j)) <= 1e-12);
            }
        }
    }
}
