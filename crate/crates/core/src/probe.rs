//! Seeded numerical probes of sup-norms over ball levels.
//!
//! Every random draw comes from a ChaCha stream seeded with `seed + index`, so a
//! run is reproducible bit-for-bit and parallel evaluation matches serial order.
//! Reported values are lower bounds for the true supremum, never certificates.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{NcError, Result};
use crate::freealg::{FreePolynomial, Word};
use crate::linalg::{self, CMat};
use crate::mattuple::MatrixTuple;
use crate::ncdiff::NcFunction;
use crate::opball::{OperatorBall, Pencil};
use crate::realize::Realization;
use crate::scalar::Real;

/// Margins cycled through by the multistart phase.
pub const MARGINS: [f64; 4] = [0.5, 0.1, 0.01, 0.001];

/// Minimal boundary distance kept by the hill-climbing projection.
pub const CLIMB_MARGIN: f64 = 1e-6;

const INITIAL_STEP: f64 = 0.1;
const STEP_FLOOR: f64 = 1e-6;
const MAX_DRAWS: usize = 100;

/// Deterministic generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

fn gaussian_matrix<R: Real>(n: usize, rng: &mut impl Rng) -> CMat<R> {
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(R::of(re), R::of(im))
    })
}

/// Draws a complex-Gaussian tuple and rescales it so that `‖Q(X)‖ = 1 − margin`.
pub fn sample_in_ball<R: Real>(
    ball: &OperatorBall<R>,
    n: usize,
    margin: f64,
    rng: &mut impl Rng,
) -> Result<MatrixTuple<R>> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(NcError::Invalid(format!(
            "margin {margin} must lie in (0, 1)"
        )));
    }
    if n == 0 {
        return Err(NcError::Invalid("level must be positive".into()));
    }
    for _ in 0..MAX_DRAWS {
        let x = MatrixTuple::new((0..ball.dim()).map(|_| gaussian_matrix(n, rng)).collect())?;
        let s = ball.pencil_norm(&x)?;
        if s > R::zero() {
            return Ok(rescale(&x, s, R::of(1.0 - margin)));
        }
    }
    Err(NcError::DegenerateSample {
        attempts: MAX_DRAWS,
    })
}

fn rescale<R: Real>(x: &MatrixTuple<R>, current: R, target: R) -> MatrixTuple<R> {
    x.scale(Complex::new(target / current, R::zero()))
}

/// Random isometry `ℂ^k → ℂ^n` from the QR factorization of a Gaussian matrix.
pub fn random_isometry<R: Real>(n: usize, k: usize, rng: &mut impl Rng) -> Result<CMat<R>> {
    if k == 0 || k > n {
        return Err(NcError::Invalid(format!(
            "no isometry from C^{k} into C^{n}"
        )));
    }
    let g = CMat::<R>::from_fn(n, k, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(R::of(re), R::of(im))
    });
    Ok(g.qr().q())
}

/// Random invertible matrix `I + t G` with a Gaussian `G`, scaled to keep conditioning moderate.
pub fn random_similarity<R: Real>(n: usize, rng: &mut impl Rng) -> CMat<R> {
    let g = gaussian_matrix::<R>(n, rng);
    let scale = R::of(0.5) / (linalg::op_norm(&g) + R::one());
    linalg::identity::<R>(n) + g * Complex::new(scale, R::zero())
}

/// Where an evaluated point came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSource {
    /// Multistart slot `s` drawn with seed `seed + s`.
    Sample(usize),
    /// Injected pool point `k`.
    Injected(usize),
    /// Hill-climbing candidate.
    Climb,
}

impl PointSource {
    pub fn label(&self) -> String {
        match self {
            PointSource::Sample(s) => format!("sample-{s}"),
            PointSource::Injected(k) => format!("injected-{k}"),
            PointSource::Climb => "climb".into(),
        }
    }
}

/// One improvement of the running maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub source: PointSource,
    pub value: f64,
    pub boundary_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport<R: Real> {
    pub target: String,
    pub level: usize,
    pub budget: usize,
    pub seed: u64,
    /// Largest `‖f(X)‖` seen; a lower bound for the supremum.
    pub best: f64,
    pub argmax: Option<MatrixTuple<R>>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub evaluations: usize,
    pub failures: usize,
}

impl<R: Real> ProbeReport<R> {
    /// Re-evaluates the stored argmax and returns `|‖f(argmax)‖ − best|`.
    pub fn replay_defect<F: NcFunction<R> + ?Sized>(&self, f: &F) -> Result<f64> {
        match &self.argmax {
            Some(x) => Ok((linalg::op_norm(&f.eval(x)?).as_f64() - self.best).abs()),
            None => Ok(if self.best == 0.0 { 0.0 } else { f64::INFINITY }),
        }
    }
}

struct Scored<R: Real> {
    point: MatrixTuple<R>,
    value: f64,
    distance: f64,
}

fn score<R: Real, F: NcFunction<R> + ?Sized>(
    f: &F,
    ball: &OperatorBall<R>,
    x: MatrixTuple<R>,
) -> Option<Scored<R>> {
    let distance = ball.membership(&x).ok()?.distance().as_f64();
    let value = linalg::op_norm(&f.eval(&x).ok()?).as_f64();
    value.is_finite().then_some(Scored {
        point: x,
        value,
        distance,
    })
}

/// Hill-climbing cursor over the real and imaginary parts of every entry.
struct Climber {
    coordinate: usize,
    negative: bool,
    step: f64,
    improved_in_sweep: bool,
}

impl Climber {
    fn new() -> Self {
        Self {
            coordinate: 0,
            negative: false,
            step: INITIAL_STEP,
            improved_in_sweep: false,
        }
    }

    fn candidate<R: Real>(
        &self,
        ball: &OperatorBall<R>,
        x: &MatrixTuple<R>,
    ) -> Result<MatrixTuple<R>> {
        let n = x.level();
        let per_matrix = 2 * n * n;
        let j = self.coordinate / per_matrix;
        let rest = self.coordinate % per_matrix;
        let (entry, imaginary) = (rest / 2, rest % 2 == 1);
        let (r, c) = (entry / n, entry % n);
        let delta = R::of(if self.negative { -self.step } else { self.step });
        let mut mats = x.coords().to_vec();
        if imaginary {
            mats[j][(r, c)].im += delta;
        } else {
            mats[j][(r, c)].re += delta;
        }
        let y = MatrixTuple::new(mats)?;
        let s = ball.pencil_norm(&y)?;
        let cap = R::of(1.0 - CLIMB_MARGIN);
        Ok(if s > cap { rescale(&y, s, cap) } else { y })
    }

    fn advance(&mut self, accepted: bool, coordinates: usize) {
        if accepted {
            self.improved_in_sweep = true;
        } else if !self.negative {
            self.negative = true;
            return;
        }
        self.negative = false;
        self.coordinate += 1;
        if self.coordinate == coordinates {
            self.coordinate = 0;
            if !self.improved_in_sweep {
                self.step = (self.step / 2.0).max(STEP_FLOOR);
            }
            self.improved_in_sweep = false;
        }
    }
}

/// Multistart slot `s` that receives injected pool point `k` (slots `2^k − 1`).
fn injected_index(slot: usize) -> Option<usize> {
    let s = slot + 1;
    s.is_power_of_two().then(|| s.trailing_zeros() as usize)
}

/// [`estimate_sup`] with a pool of extra starting points.
///
/// Even evaluations consume multistart slots (random draws at the margins in
/// [`MARGINS`], or pool point `k` at slot `2^k − 1`); odd evaluations take one
/// hill-climbing step from the incumbent. A larger budget therefore replays a
/// smaller one as a prefix.
pub fn estimate_sup_with_pool<R: Real, F: NcFunction<R> + ?Sized>(
    f: &F,
    ball: &OperatorBall<R>,
    n: usize,
    budget: usize,
    seed: u64,
    pool: &[MatrixTuple<R>],
) -> Result<ProbeReport<R>> {
    if budget == 0 {
        return Err(NcError::Invalid("budget must be at least 1".into()));
    }
    if f.dim() != ball.dim() {
        return Err(NcError::DimensionMismatch {
            expected: ball.dim(),
            found: f.dim(),
        });
    }
    let slots = budget.div_ceil(2);
    let starts: Vec<(PointSource, Option<Scored<R>>)> = (0..slots)
        .into_par_iter()
        .map(|s| {
            if let Some(k) = injected_index(s).filter(|&k| k < pool.len()) {
                let x = pool[k].clone();
                let inside = x.level() == n && ball.contains(&x).unwrap_or(false);
                return (
                    PointSource::Injected(k),
                    if inside { score(f, ball, x) } else { None },
                );
            }
            let mut rng = sample_rng(seed, s as u64);
            let margin = MARGINS[s % MARGINS.len()];
            let scored = sample_in_ball(ball, n, margin, &mut rng)
                .ok()
                .and_then(|x| score(f, ball, x));
            (PointSource::Sample(s), scored)
        })
        .collect();

    let coordinates = 2 * ball.dim() * n * n;
    let mut incumbent: Option<Scored<R>> = None;
    let mut climber = Climber::new();
    let mut trajectory = Vec::new();
    let mut failures = 0;
    let mut starts = starts.into_iter();

    for i in 0..budget {
        if i % 2 == 0 {
            let (source, scored) = starts.next().expect("one slot per even evaluation");
            let Some(scored) = scored else {
                failures += 1;
                continue;
            };
            if incumbent.as_ref().is_none_or(|b| scored.value > b.value) {
                trajectory.push(TrajectoryPoint {
                    iteration: i,
                    source,
                    value: scored.value,
                    boundary_distance: scored.distance,
                });
                incumbent = Some(scored);
                climber = Climber::new();
            }
        } else if let Some(best) = incumbent.as_ref() {
            let accepted = match climber
                .candidate(ball, &best.point)
                .ok()
                .and_then(|y| score(f, ball, y))
            {
                Some(scored) if scored.value > best.value => {
                    trajectory.push(TrajectoryPoint {
                        iteration: i,
                        source: PointSource::Climb,
                        value: scored.value,
                        boundary_distance: scored.distance,
                    });
                    incumbent = Some(scored);
                    true
                }
                Some(_) => false,
                None => {
                    failures += 1;
                    false
                }
            };
            climber.advance(accepted, coordinates);
        }
    }

    let (best, argmax) = match incumbent {
        Some(s) => (s.value, Some(s.point)),
        None => (0.0, None),
    };
    Ok(ProbeReport {
        target: f.describe(),
        level: n,
        budget,
        seed,
        best,
        argmax,
        trajectory,
        evaluations: budget,
        failures,
    })
}

/// Lower estimate of `sup_{X ∈ 𝔻_Q(n)} ‖f(X)‖` by seeded multistart plus hill climbing.
pub fn estimate_sup<R: Real, F: NcFunction<R> + ?Sized>(
    f: &F,
    ball: &OperatorBall<R>,
    n: usize,
    budget: usize,
    seed: u64,
) -> Result<ProbeReport<R>> {
    estimate_sup_with_pool(f, ball, n, budget, seed, &[])
}

/// The approach path `x(ε) = (1 − ε² + iε, 1 − ε² − iε)` to the distinguished boundary of the bidisk.
pub fn builtin_path<R: Real>(eps: f64) -> Vec<Complex<R>> {
    let re = 1.0 - eps * eps;
    vec![
        Complex::new(R::of(re), R::of(eps)),
        Complex::new(R::of(re), R::of(-eps)),
    ]
}

/// Points `x(ε_k) · I_n` with `ε_k = 0.1 · 2^{-k}`, stopping before `ε < 1e-5`.
pub fn builtin_path_pool<R: Real>(n: usize) -> Vec<MatrixTuple<R>> {
    (0..)
        .map(|k| 0.1 * 0.5f64.powi(k))
        .take_while(|&e| e >= 1e-5)
        .map(|e| MatrixTuple::scalar_at_level(&builtin_path::<R>(e), n).expect("two coordinates"))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupRow {
    pub eps: f64,
    pub value: f64,
    pub boundary_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupTable {
    pub rows: Vec<BlowupRow>,
    /// Values strictly increase along the supplied order of `ε`.
    pub monotone_growth: bool,
}

/// Evaluates `‖g(x(ε))‖` along a path of scalar points, checking membership first.
pub fn blowup_scan<R: Real, G: NcFunction<R> + ?Sized>(
    g: &G,
    ball: &OperatorBall<R>,
    path: impl Fn(f64) -> Vec<Complex<R>>,
    eps_list: &[f64],
) -> Result<BlowupTable> {
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let x = MatrixTuple::scalar(&path(eps))?;
        let m = ball.membership(&x)?;
        if !m.is_inside() {
            return Err(NcError::OutsideBall {
                excess: -m.distance().as_f64(),
            });
        }
        let value = linalg::op_norm(&g.eval(&x)?).as_f64();
        rows.push(BlowupRow {
            eps,
            value,
            boundary_distance: m.distance().as_f64(),
        });
    }
    let monotone_growth = rows.len() > 1 && rows.windows(2).all(|w| w[1].value > w[0].value);
    Ok(BlowupTable {
        rows,
        monotone_growth,
    })
}

/// Outcome of a boundary-value scan.
#[derive(Clone, Debug, PartialEq)]
pub enum Dichotomy {
    /// Every sampled image is strictly inside the target ball.
    AllInterior { max: f64 },
    /// Every sampled image is on (or within `1e-6` of) the boundary.
    AllBoundary { min: f64 },
    /// Numerical evidence of both behaviours.
    Mixed {
        min: f64,
        max: f64,
        interior_witness: usize,
        boundary_witness: usize,
    },
}

const DICHOTOMY_BAND: f64 = 1e-6;

/// Classifies `s_i = ‖P(F(X_i))‖` over the given points.
pub fn dichotomy_scan_points<R: Real>(
    components: &[&dyn NcFunction<R>],
    target: &Pencil<R>,
    points: &[MatrixTuple<R>],
) -> Result<Dichotomy> {
    if components.len() != target.dim() {
        return Err(NcError::DimensionMismatch {
            expected: target.dim(),
            found: components.len(),
        });
    }
    let values = points
        .par_iter()
        .map(|x| {
            let image = MatrixTuple::new(
                components
                    .iter()
                    .map(|c| c.eval(x))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            Ok(linalg::op_norm(&target.eval(&image)?).as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(NcError::Invalid(
            "dichotomy scan needs at least one sample".into(),
        ));
    }
    let threshold = 1.0 - DICHOTOMY_BAND;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in values.iter().enumerate() {
        if v < min {
            min = v;
            imin = i;
        }
        if v > max {
            max = v;
            imax = i;
        }
    }
    Ok(if max < threshold {
        Dichotomy::AllInterior { max }
    } else if min > threshold {
        Dichotomy::AllBoundary { min }
    } else {
        Dichotomy::Mixed {
            min,
            max,
            interior_witness: imin,
            boundary_witness: imax,
        }
    })
}

/// Samples the source ball at level `n` (margins cycling through [`MARGINS`]) and classifies.
pub fn dichotomy_scan<R: Real>(
    components: &[&dyn NcFunction<R>],
    source: &OperatorBall<R>,
    target: &Pencil<R>,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Dichotomy> {
    let points = (0..samples)
        .into_par_iter()
        .map(|i| {
            sample_in_ball(
                source,
                n,
                MARGINS[i % MARGINS.len()],
                &mut sample_rng(seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    dichotomy_scan_points(components, target, &points)
}

/// `X ↦ row(X^w)_{|w| = N}`, an `n × (d^N n)` matrix in length-lex order.
#[derive(Clone, Debug)]
pub struct WordRow {
    pub d: usize,
    pub order: usize,
}

impl<R: Real> NcFunction<R> for WordRow {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        let n = x.level();
        let words: Vec<Word> = Word::all_of_size(self.d, self.order).collect();
        let mut out = CMat::zeros(n, n * words.len());
        for (i, w) in words.iter().enumerate() {
            out.view_mut((0, i * n), (n, n)).copy_from(&x.eval_word(w)?);
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        format!("row of words of size {}", self.order)
    }
}

/// Vertical stack of square-valued functions.
pub struct ColumnStack<R: Real> {
    d: usize,
    parts: Vec<Box<dyn NcFunction<R>>>,
    label: String,
}

impl<R: Real> NcFunction<R> for ColumnStack<R> {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &MatrixTuple<R>) -> Result<CMat<R>> {
        let n = x.level();
        if self.parts.is_empty() {
            return Ok(CMat::zeros(n, n));
        }
        let mut out = CMat::zeros(n * self.parts.len(), n);
        for (i, part) in self.parts.iter().enumerate() {
            out.view_mut((i * n, 0), (n, n)).copy_from(&part.eval(x)?);
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Functions whose size-`N` remainder factors can be stacked.
#[derive(Clone, Debug)]
pub enum RegularitySubject<R: Real> {
    Realization(std::sync::Arc<Realization<R>>),
    Polynomial(FreePolynomial<Complex<R>>),
}

impl<R: Real> RegularitySubject<R> {
    fn dim(&self) -> usize {
        match self {
            Self::Realization(f) => f.dim(),
            Self::Polynomial(p) => p.dim(),
        }
    }

    /// `col(Δ^w f(0, …, 0, X))_{|w| = N}`.
    pub fn remainder_column(&self, order: usize) -> Result<ColumnStack<R>> {
        let d = self.dim();
        let parts: Vec<Box<dyn NcFunction<R>>> = match self {
            Self::Realization(f) => Word::all_of_size(d, order)
                .map(|w| {
                    f.remainder_factor(&w)
                        .map(|g| Box::new(g) as Box<dyn NcFunction<R>>)
                })
                .collect::<Result<_>>()?,
            Self::Polynomial(p) => {
                let quotients = p.left_divide(order)?;
                Word::all_of_size(d, order)
                    .map(|w| Box::new(quotients.get(&w)) as Box<dyn NcFunction<R>>)
                    .collect()
            }
        };
        Ok(ColumnStack {
            d,
            parts,
            label: format!("column of size-{order} remainder factors"),
        })
    }
}

/// Row and column suprema of the right-regularity test, with a budget trend for the column.
#[derive(Clone, Debug)]
pub struct RegularityReport<R: Real> {
    pub order: usize,
    pub row: ProbeReport<R>,
    pub column: ProbeReport<R>,
    /// `(budget, best)` for the column at budgets `B/4`, `B/2`, `B`.
    pub column_trend: Vec<(usize, f64)>,
    /// `false` when the column estimate still grows by more than 1% from `B/4` to `B`.
    pub column_settled: bool,
}

impl<R: Real> RegularityReport<R> {
    pub fn row_factor(&self) -> f64 {
        self.row.best
    }

    pub fn column_factor(&self) -> f64 {
        self.column.best
    }
}

pub const REGULARITY_WORD_BUDGET: f64 = 1e4;

/// Estimates `sup ‖row(X^w)‖` and `sup ‖col(Δ^w f(0, …, 0, X))‖` over `|w| = N`.
///
/// `pool` points (for example [`builtin_path_pool`]) are injected into the column search.
pub fn regularity_factors<R: Real>(
    subject: &RegularitySubject<R>,
    order: usize,
    ball: &OperatorBall<R>,
    n: usize,
    budget: usize,
    seed: u64,
    pool: &[MatrixTuple<R>],
) -> Result<RegularityReport<R>> {
    let d = ball.dim();
    if subject.dim() != d {
        return Err(NcError::DimensionMismatch {
            expected: d,
            found: subject.dim(),
        });
    }
    if order == 0 {
        return Err(NcError::Invalid("order N must be positive".into()));
    }
    let count = Word::count_of_size(d, order);
    if count > REGULARITY_WORD_BUDGET {
        return Err(NcError::EnumerationBudget {
            required: count,
            limit: REGULARITY_WORD_BUDGET,
        });
    }
    let row = estimate_sup(&WordRow { d, order }, ball, n, budget, seed)?;
    let column_fn = subject.remainder_column(order)?;
    let mut column_trend = Vec::new();
    let mut column = None;
    for b in [budget / 4, budget / 2, budget] {
        if b == 0 {
            continue;
        }
        let report = estimate_sup_with_pool(&column_fn, ball, n, b, seed, pool)?;
        column_trend.push((b, report.best));
        column = Some(report);
    }
    let column = column.expect("budget >= 1");
    let first = column_trend.first().map(|t| t.1).unwrap_or(0.0);
    let column_settled = column.best <= first * 1.01 + 1e-12;
    Ok(RegularityReport {
        order,
        row,
        column,
        column_trend,
        column_settled,
    })
}
