//! Command-line front end.
//!
//! Exit codes: `0` success, `2` usage or input error, `1` numerical failure.

use std::io::Write;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;

use crate::error::{NcError, Result};
use crate::formats::{self, csv_float, CsvTable, PointJson, VarietyJson};
use crate::freealg::{parse, FreePolynomial, Word};
use crate::linalg;
use crate::mattuple::MatrixTuple;
use crate::ncdiff::{self, FirstDifference, NcFunction, ResolventTerm};
use crate::opball::OperatorBall;
use crate::probe::{self, Dichotomy, RegularitySubject, MARGINS};
use crate::realize::{example_5_2_closed_form, Realization};
use crate::varieties::{self, example_4_12, AlgebraicVariety, Homogeneity};

type C = Complex<f64>;
type CoefficientFn = Box<dyn Fn(&Word) -> Result<C>>;

#[derive(Parser, Debug)]
#[command(
    name = "ncball",
    version,
    about = "Noncommutative functions on operator balls"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a polynomial, realization or target at a point.
    Eval(FunctionArgs),
    /// Power-series coefficients of a realization or polynomial.
    Coeff(CoeffArgs),
    /// First difference-differential Δf(0, x)[h] at a scalar point.
    Delta(DeltaArgs),
    /// Check the Taylor–Taylor identity at a point.
    TtCheck(TtArgs),
    /// Seeded lower estimate of a sup-norm, or of the regularity factors with --order.
    Probe(ProbeArgs),
    /// Evaluate along a path approaching the boundary.
    Blowup(BlowupArgs),
    /// Classify boundary behaviour of a polynomial map between balls.
    Dichotomy(DichotomyArgs),
    /// Variety membership or sampled homogeneity.
    Variety(VarietyArgs),
    /// Reproduce a builtin example: ex52, ex53 or ex412.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct FunctionArgs {
    /// Free polynomial, e.g. "z1*z2 - z2*z1".
    #[arg(long)]
    poly: Option<String>,
    /// Realization JSON file or the builtin "ex52".
    #[arg(long)]
    realization: Option<String>,
    /// Target: ex52, realization:FILE, poly:EXPR, resolvent:BASE, deltaJ:BASE, remainder:WORD:BASE.
    #[arg(long)]
    target: Option<String>,
    /// Point JSON file.
    #[arg(long)]
    point: Option<String>,
    /// Scalar point as comma-separated complex literals, e.g. "0.5+0.1i,0.2".
    #[arg(long)]
    at: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct CoeffArgs {
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    realization: Option<String>,
    /// Single word, e.g. "12"; "e" is the empty word.
    #[arg(long)]
    word: Option<String>,
    /// All words of size at most N.
    #[arg(long, short = 'N', default_value_t = 2)]
    order: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct DeltaArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Direction h as comma-separated complex literals; defaults to e_1.
    #[arg(long)]
    direction: Option<String>,
}

#[derive(Args, Debug)]
struct TtArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long, short = 'N', default_value_t = 1)]
    order: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Ball for random points when no point is given.
    #[arg(long)]
    ball: Option<String>,
    #[arg(long, default_value_t = 2)]
    level: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    margin: f64,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    realization: Option<String>,
    #[arg(long)]
    ball: Option<String>,
    #[arg(long, default_value_t = 1)]
    level: usize,
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate the regularity factors of size N instead of a sup-norm.
    #[arg(long, short = 'N')]
    order: Option<usize>,
    /// Inject the builtin boundary path into the column search ("builtin").
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct BlowupArgs {
    #[arg(long)]
    target: String,
    /// "builtin" or "poly:P1;P2;…" with ε as z1.
    #[arg(long, default_value = "builtin")]
    path: String,
    #[arg(long, default_value = "0.1,0.01,0.001")]
    eps: String,
    #[arg(long)]
    ball: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct DichotomyArgs {
    /// Builtin case: half, identity or boundary-constant.
    #[arg(long)]
    case: Option<String>,
    /// Components of the map separated by ';'.
    #[arg(long)]
    map: Option<String>,
    /// Source ball.
    #[arg(long, default_value = "polydisk:2")]
    ball: String,
    /// Target ball; defaults to the source.
    #[arg(long)]
    into: Option<String>,
    #[arg(long, default_value_t = 2)]
    level: usize,
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct VarietyArgs {
    /// Variety JSON file, or builtin "ex412-v1" / "ex412-v2".
    #[arg(long)]
    variety: String,
    #[arg(long)]
    point: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 2)]
    level: usize,
    #[arg(long, default_value_t = 20)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    example: String,
    #[arg(long, default_value_t = 10)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

/// Runs the CLI on `argv` (including the program name), writing to stdout/stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with_output(argv, &mut lock)
}

/// [`run`] with an explicit standard-output sink.
pub fn run_with_output<I, S>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &NcError) -> i32 {
    match e {
        NcError::Syntax { .. }
        | NcError::VariableOutOfRange { .. }
        | NcError::NegativeExponent { .. }
        | NcError::Format(_)
        | NcError::Invalid(_) => 2,
        _ => 1,
    }
}

fn io_err(e: std::io::Error) -> NcError {
    NcError::Format(e.to_string())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Coeff(a) => cmd_coeff(a, out),
        Command::Delta(a) => cmd_delta(a, out),
        Command::TtCheck(a) => cmd_tt(a, out),
        Command::Probe(a) => cmd_probe(a, out),
        Command::Blowup(a) => cmd_blowup(a, out),
        Command::Dichotomy(a) => cmd_dichotomy(a, out),
        Command::Variety(a) => cmd_variety(a, out),
        Command::Reproduce(a) => cmd_reproduce(a, out),
    }
}

/// Largest `k` with `zk` in the expression, at least 1.
fn infer_dim(expr: &str) -> usize {
    let bytes = expr.as_bytes();
    let mut best = 1;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'z' || bytes[i] == b'Z' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(k) = expr[start..j].parse::<usize>() {
                best = best.max(k);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

fn parse_poly(expr: &str, d: Option<usize>) -> Result<FreePolynomial<C>> {
    parse(expr, d.unwrap_or_else(|| infer_dim(expr)))
}

/// Comma-separated complex literals, each a constant expression.
fn parse_scalars(text: &str) -> Result<Vec<C>> {
    text.split(',')
        .map(|s| {
            let p: FreePolynomial<C> = parse(s.trim(), 1)?;
            if p.degree() > 0 {
                return Err(NcError::Invalid(format!("{s:?} is not a constant")));
            }
            Ok(p.coefficient(&Word::unit(1)))
        })
        .collect()
}

/// An evaluable function together with its natural ball, when it has one.
struct Target {
    func: Box<dyn NcFunction<f64>>,
    ball: Option<OperatorBall<f64>>,
    subject: Option<RegularitySubject<f64>>,
}

fn load_realization(spec: &str) -> Result<Arc<Realization<f64>>> {
    Ok(Arc::new(formats::load_realization(spec)?))
}

fn realization_target(f: Arc<Realization<f64>>) -> Target {
    Target {
        ball: Some(f.ball()),
        subject: Some(RegularitySubject::Realization(f.clone())),
        func: Box::new(f),
    }
}

fn parse_target(spec: &str, d_hint: Option<usize>) -> Result<Target> {
    if spec == "ex52" {
        return Ok(realization_target(load_realization("ex52")?));
    }
    if let Some(path) = spec.strip_prefix("realization:") {
        return Ok(realization_target(load_realization(path)?));
    }
    if let Some(expr) = spec.strip_prefix("poly:") {
        let p = parse_poly(expr, d_hint)?;
        return Ok(Target {
            func: Box::new(p.clone()),
            ball: None,
            subject: Some(RegularitySubject::Polynomial(p)),
        });
    }
    if let Some(base) = spec.strip_prefix("resolvent:") {
        let f = load_realization(base)?;
        return Ok(Target {
            ball: Some(f.ball()),
            func: Box::new(ResolventTerm(f)),
            subject: None,
        });
    }
    if let Some(rest) = spec.strip_prefix("remainder:") {
        let (word, base) = rest.split_once(':').ok_or_else(|| {
            NcError::Invalid("remainder target must look like remainder:WORD:BASE".into())
        })?;
        let f = load_realization(base)?;
        let g = f.remainder_factor(&Word::parse(f.dim(), word)?)?;
        return Ok(Target {
            ball: Some(f.ball()),
            func: Box::new(g),
            subject: None,
        });
    }
    if let Some(rest) = spec.strip_prefix("delta") {
        if let Some((j, base)) = rest.split_once(':') {
            let j: usize = j
                .parse()
                .map_err(|_| NcError::Invalid(format!("bad direction index in {spec:?}")))?;
            let inner = parse_target(base, d_hint)?;
            let d = inner.func.dim();
            if j == 0 || j > d {
                return Err(NcError::Invalid(format!(
                    "direction index {j} out of range 1..={d}"
                )));
            }
            let direction = ncdiff::unit_direction(d, j);
            return Ok(Target {
                ball: inner.ball,
                func: Box::new(FirstDifference {
                    f: inner.func,
                    direction,
                }),
                subject: None,
            });
        }
    }
    Err(NcError::Invalid(format!("unknown target {spec:?}")))
}

fn function_from(args: &FunctionArgs, d_hint: Option<usize>) -> Result<Target> {
    match (&args.poly, &args.realization, &args.target) {
        (Some(p), None, None) => parse_target(&format!("poly:{p}"), d_hint),
        (None, Some(r), None) => Ok(realization_target(load_realization(r)?)),
        (None, None, Some(t)) => parse_target(t, d_hint),
        _ => Err(NcError::Invalid(
            "give exactly one of --poly, --realization, --target".into(),
        )),
    }
}

fn point_from(args: &FunctionArgs) -> Result<Option<MatrixTuple<f64>>> {
    match (&args.point, &args.at) {
        (Some(path), None) => Ok(Some(formats::read_json::<PointJson>(path)?.to_tuple()?)),
        (None, Some(at)) => Ok(Some(MatrixTuple::scalar(&parse_scalars(at)?)?)),
        (None, None) => Ok(None),
        _ => Err(NcError::Invalid("give at most one of --point, --at".into())),
    }
}

fn emit(table: &CsvTable, path: Option<&str>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => table.write_to(p),
        None => out.write_all(table.render().as_bytes()).map_err(io_err),
    }
}

fn cmd_eval(a: FunctionArgs, out: &mut dyn Write) -> Result<i32> {
    let x = point_from(&a)?.ok_or_else(|| NcError::Invalid("eval needs --point or --at".into()))?;
    let t = function_from(&a, Some(x.dim()))?;
    let value = t.func.eval(&x)?;
    match &a.out {
        Some(path) => {
            let mut table = CsvTable::new(None, &["row", "col", "re", "im"]);
            for i in 0..value.nrows() {
                for j in 0..value.ncols() {
                    table.push(vec![
                        i.to_string(),
                        j.to_string(),
                        csv_float(value[(i, j)].re),
                        csv_float(value[(i, j)].im),
                    ]);
                }
            }
            table.write_to(path)?;
        }
        None => {
            let json = serde_json::to_string(&formats::matrix_to_json(&value))
                .map_err(|e| NcError::Format(e.to_string()))?;
            writeln!(out, "{json}").map_err(io_err)?;
        }
    }
    Ok(0)
}

fn word_label(w: &Word) -> String {
    if w.is_empty() {
        "e".into()
    } else {
        w.key()
    }
}

fn cmd_coeff(a: CoeffArgs, out: &mut dyn Write) -> Result<i32> {
    let coefficient: CoefficientFn = match (&a.poly, &a.realization) {
        (Some(p), None) => {
            let p = parse_poly(p, None)?;
            Box::new(move |w| Ok(p.coefficient(w)))
        }
        (None, r) => {
            let f = load_realization(r.as_deref().unwrap_or("ex52"))?;
            Box::new(move |w| f.power_series_coefficient(w))
        }
        _ => {
            return Err(NcError::Invalid(
                "give at most one of --poly, --realization".into(),
            ))
        }
    };
    let d = match (&a.poly, &a.realization) {
        (Some(p), _) => infer_dim(p),
        (None, r) => load_realization(r.as_deref().unwrap_or("ex52"))?.dim(),
    };
    let words: Vec<Word> = match &a.word {
        Some(w) => vec![Word::parse(d, w)?],
        None => {
            let total: f64 = (0..=a.order).map(|k| Word::count_of_size(d, k)).sum();
            if total > crate::freealg::WORD_BUDGET {
                return Err(NcError::EnumerationBudget {
                    required: total,
                    limit: crate::freealg::WORD_BUDGET,
                });
            }
            (0..=a.order)
                .flat_map(|k| Word::all_of_size(d, k))
                .collect()
        }
    };
    let mut table = CsvTable::new(None, &["word", "re", "im"]);
    for w in &words {
        let c = coefficient(w)?;
        table.push(vec![word_label(w), csv_float(c.re), csv_float(c.im)]);
    }
    emit(&table, a.out.as_deref(), out)?;
    Ok(0)
}

fn cmd_delta(a: DeltaArgs, out: &mut dyn Write) -> Result<i32> {
    let x = point_from(&a.function)?
        .ok_or_else(|| NcError::Invalid("delta needs --point or --at".into()))?;
    let x = x
        .as_scalars()
        .ok_or_else(|| NcError::Invalid("delta needs a scalar (level-1) base point".into()))?;
    let t = function_from(&a.function, Some(x.len()))?;
    let h = match &a.direction {
        Some(text) => parse_scalars(text)?,
        None => ncdiff::unit_direction(x.len(), 1),
    };
    let v = ncdiff::delta_first(t.func.as_ref(), &x, &h)?;
    let mut table = CsvTable::new(None, &["re", "im", "modulus"]);
    table.push(vec![csv_float(v.re), csv_float(v.im), csv_float(v.norm())]);
    emit(&table, a.function.out.as_deref(), out)?;
    Ok(0)
}

fn cmd_tt(a: TtArgs, out: &mut dyn Write) -> Result<i32> {
    let given = point_from(&a.function)?;
    let report = match (
        &a.function.poly,
        &a.function.realization,
        &a.function.target,
    ) {
        (Some(p), None, None) => {
            let p = parse_poly(p, given.as_ref().map(MatrixTuple::dim))?;
            let x = match given {
                Some(x) => x,
                None => random_point(&a, p.dim())?,
            };
            ncdiff::tt_check_poly(&p, &x, a.order, a.tol)?
        }
        (None, r, None) => {
            let f = load_realization(r.as_deref().unwrap_or("ex52"))?;
            let x = match given {
                Some(x) => x,
                None => random_point(&a, f.dim())?,
            };
            ncdiff::tt_check(&f, &x, a.order, a.tol)?
        }
        _ => {
            return Err(NcError::Invalid(
                "tt-check takes --poly or --realization".into(),
            ))
        }
    };
    let mut table = CsvTable::new(
        Some(a.seed),
        &["order", "lhs_norm", "rhs_norm", "defect", "passed"],
    );
    table.push(vec![
        report.order.to_string(),
        csv_float(linalg::op_norm(&report.lhs)),
        csv_float(linalg::op_norm(&report.rhs)),
        csv_float(report.defect),
        report.passed.to_string(),
    ]);
    emit(&table, a.function.out.as_deref(), out)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn random_point(a: &TtArgs, d: usize) -> Result<MatrixTuple<f64>> {
    let ball = match &a.ball {
        Some(b) => formats::load_ball(b)?,
        None => OperatorBall::polydisk(d),
    };
    probe::sample_in_ball(&ball, a.level, a.margin, &mut probe::sample_rng(a.seed, 0))
}

fn resolve_ball(spec: Option<&str>, hint: Option<OperatorBall<f64>>) -> Result<OperatorBall<f64>> {
    match (spec, hint) {
        (Some(s), _) => formats::load_ball(s),
        (None, Some(b)) => Ok(b),
        (None, None) => Err(NcError::Invalid(
            "--ball is required for this target".into(),
        )),
    }
}

fn cmd_probe(a: ProbeArgs, out: &mut dyn Write) -> Result<i32> {
    let ball_spec = a
        .ball
        .as_deref()
        .map(formats::load_ball::<f64>)
        .transpose()?;
    let args = FunctionArgs {
        poly: a.poly.clone(),
        realization: a.realization.clone(),
        target: a.target.clone(),
        ..Default::default()
    };
    let t = function_from(&args, ball_spec.as_ref().map(OperatorBall::dim))?;
    let ball = resolve_ball(a.ball.as_deref(), t.ball.clone())?;
    let pool = match a.path.as_deref() {
        None => Vec::new(),
        Some("builtin") => probe::builtin_path_pool(a.level),
        Some(other) => {
            return Err(NcError::Invalid(format!(
                "unknown injection path {other:?}"
            )))
        }
    };
    match a.order {
        None => {
            let report = probe::estimate_sup_with_pool(
                t.func.as_ref(),
                &ball,
                a.level,
                a.budget,
                a.seed,
                &pool,
            )?;
            let mut table = CsvTable::new(
                Some(a.seed),
                &[
                    "iteration",
                    "sample_id",
                    "value",
                    "boundary_distance",
                    "seed",
                ],
            );
            for p in &report.trajectory {
                table.push(vec![
                    p.iteration.to_string(),
                    p.source.label(),
                    csv_float(p.value),
                    csv_float(p.boundary_distance),
                    a.seed.to_string(),
                ]);
            }
            emit(&table, a.out.as_deref(), out)?;
            if a.out.is_some() {
                writeln!(
                    out,
                    "best {} over {} evaluations ({} failures)",
                    csv_float(report.best),
                    report.evaluations,
                    report.failures
                )
                .map_err(io_err)?;
            }
        }
        Some(order) => {
            let subject = t.subject.ok_or_else(|| {
                NcError::Invalid("regularity needs a realization or polynomial target".into())
            })?;
            let report = probe::regularity_factors(
                &subject, order, &ball, a.level, a.budget, a.seed, &pool,
            )?;
            let mut table = CsvTable::new(Some(a.seed), &["quantity", "budget", "value", "seed"]);
            table.push(vec![
                "row".into(),
                a.budget.to_string(),
                csv_float(report.row_factor()),
                a.seed.to_string(),
            ]);
            for (b, v) in &report.column_trend {
                table.push(vec![
                    "column".into(),
                    b.to_string(),
                    csv_float(*v),
                    a.seed.to_string(),
                ]);
            }
            emit(&table, a.out.as_deref(), out)?;
            if !report.column_settled {
                writeln!(
                    out,
                    "column factor still growing with budget (no convergence)"
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(0)
}

fn parse_eps(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| NcError::Invalid(format!("bad epsilon {s:?}")))
        })
        .collect()
}

fn cmd_blowup(a: BlowupArgs, out: &mut dyn Write) -> Result<i32> {
    let ball_spec = a
        .ball
        .as_deref()
        .map(formats::load_ball::<f64>)
        .transpose()?;
    let t = parse_target(&a.target, ball_spec.as_ref().map(OperatorBall::dim))?;
    let ball = resolve_ball(
        a.ball.as_deref(),
        t.ball.clone().or_else(|| Some(OperatorBall::polydisk(2))),
    )?;
    let eps = parse_eps(&a.eps)?;
    let path: Box<dyn Fn(f64) -> Vec<C>> = if a.path == "builtin" {
        Box::new(probe::builtin_path::<f64>)
    } else if let Some(spec) = a.path.strip_prefix("poly:") {
        let comps = spec
            .split(';')
            .map(|p| parse::<C>(p, 1))
            .collect::<Result<Vec<_>>>()?;
        Box::new(move |e| {
            let x = MatrixTuple::scalar(&[C::new(e, 0.0)]).expect("one coordinate");
            comps
                .iter()
                .map(|p| x.eval_poly(p).expect("level 1")[(0, 0)])
                .collect()
        })
    } else {
        return Err(NcError::Invalid(format!("unknown path {:?}", a.path)));
    };
    let scan = probe::blowup_scan(t.func.as_ref(), &ball, &path, &eps)?;
    let mut table = CsvTable::new(None, &["eps", "re", "im", "modulus", "boundary_distance"]);
    for (row, &e) in scan.rows.iter().zip(&eps) {
        let v = t.func.eval(&MatrixTuple::scalar(&path(e))?)?;
        table.push(vec![
            csv_float(row.eps),
            csv_float(v[(0, 0)].re),
            csv_float(v[(0, 0)].im),
            csv_float(row.value),
            csv_float(row.boundary_distance),
        ]);
    }
    emit(&table, a.out.as_deref(), out)?;
    if a.out.is_some() {
        writeln!(out, "monotone growth: {}", scan.monotone_growth).map_err(io_err)?;
    }
    Ok(0)
}

fn cmd_dichotomy(a: DichotomyArgs, out: &mut dyn Write) -> Result<i32> {
    let source = formats::load_ball::<f64>(&a.ball)?;
    let target = match &a.into {
        Some(b) => formats::load_ball::<f64>(b)?,
        None => source.clone(),
    };
    let d = source.dim();
    let comps: Vec<FreePolynomial<C>> = match (a.case.as_deref(), &a.map) {
        (Some(case), None) => builtin_case(case, d, target.dim())?,
        (None, Some(map)) => map
            .split(';')
            .map(|p| parse(p.trim(), d))
            .collect::<Result<_>>()?,
        _ => return Err(NcError::Invalid("give exactly one of --case, --map".into())),
    };
    let refs: Vec<&dyn NcFunction<f64>> = comps.iter().map(|p| p as &dyn NcFunction<f64>).collect();
    let verdict =
        probe::dichotomy_scan(&refs, &source, target.pencil(), a.level, a.budget, a.seed)?;
    let line = match verdict {
        Dichotomy::AllInterior { max } => format!("AllInterior max={}", csv_float(max)),
        Dichotomy::AllBoundary { min } => format!("AllBoundary min={}", csv_float(min)),
        Dichotomy::Mixed {
            min,
            max,
            interior_witness,
            boundary_witness,
        } => format!(
            "Mixed min={} (sample {interior_witness}) max={} (sample {boundary_witness})",
            csv_float(min),
            csv_float(max)
        ),
    };
    writeln!(out, "{line}").map_err(io_err)?;
    Ok(0)
}

fn builtin_case(case: &str, d: usize, e: usize) -> Result<Vec<FreePolynomial<C>>> {
    let var = |j: usize| FreePolynomial::<C>::variable(d, j);
    match case {
        "half" if d == e => (1..=d)
            .map(|j| Ok(var(j)?.scale(&C::new(0.5, 0.0))))
            .collect(),
        "identity" if d == e => (1..=d).map(var).collect(),
        "boundary-constant" => Ok((0..e)
            .map(|i| {
                if i == 0 {
                    FreePolynomial::one(d)
                } else {
                    FreePolynomial::zero(d)
                }
            })
            .collect()),
        "half" | "identity" => Err(NcError::Invalid(format!(
            "case {case:?} needs equal source and target dimensions"
        ))),
        other => Err(NcError::Invalid(format!(
            "unknown dichotomy case {other:?}"
        ))),
    }
}

fn load_variety(spec: &str) -> Result<AlgebraicVariety<f64>> {
    match spec {
        "ex412-v1" => Ok(example_4_12::<f64>().v1),
        "ex412-v2" => Ok(example_4_12::<f64>().v2),
        path => formats::read_json::<VarietyJson>(path)?.to_variety(),
    }
}

fn cmd_variety(a: VarietyArgs, out: &mut dyn Write) -> Result<i32> {
    let v = load_variety(&a.variety)?;
    if let Some(path) = &a.point {
        let x: MatrixTuple<f64> = formats::read_json::<PointJson>(path)?.to_tuple()?;
        let member = varieties::variety_membership(&v, &x, a.tol)?;
        writeln!(
            out,
            "member={member} residual={}",
            csv_float(v.residual(&x)?)
        )
        .map_err(io_err)?;
        return Ok(0);
    }
    let power = match a.variety.as_str() {
        "ex412-v1" => 2,
        "ex412-v2" => 3,
        _ => {
            return Err(NcError::Invalid(
                "homogeneity sampling needs a builtin variety or --point".into(),
            ))
        }
    };
    let mut lambdas = vec![C::new(0.5, 0.0)];
    lambdas.extend(varieties::sample_disk_scalars::<f64>(7, a.seed));
    let level = a.level;
    let sampler = move |rng: &mut rand_chacha::ChaCha8Rng| {
        let t = varieties::sample_contraction::<f64>(level, 0.1, rng)?;
        varieties::graph_point(&t, power)
    };
    match varieties::homogeneity_sample(&v, sampler, a.budget, &lambdas, a.seed)? {
        Homogeneity::Homogeneous { checked } => {
            writeln!(out, "homogeneous on {checked} sampled pairs")
        }
        Homogeneity::Witness {
            lambda, residual, ..
        } => {
            writeln!(
                out,
                "not homogeneous: lambda={} residual={}",
                lambda,
                csv_float(residual)
            )
        }
    }
    .map_err(io_err)?;
    Ok(0)
}

fn cmd_reproduce(a: ReproduceArgs, out: &mut dyn Write) -> Result<i32> {
    match a.example.as_str() {
        "ex52" => reproduce_ex52(&a, out),
        "ex53" => {
            let args = BlowupArgs {
                target: "delta1:ex52".into(),
                path: "builtin".into(),
                eps: "0.1,0.01,0.001".into(),
                ball: None,
                out: a.out.clone(),
            };
            cmd_blowup(args, out)
        }
        "ex412" => reproduce_ex412(&a, out),
        other => Err(NcError::Invalid(format!(
            "unknown example {other:?}; expected ex52, ex53 or ex412"
        ))),
    }
}

fn reproduce_ex52(a: &ReproduceArgs, out: &mut dyn Write) -> Result<i32> {
    let f = load_realization("ex52")?;
    let ball = OperatorBall::<f64>::polydisk(2);
    let mut table = CsvTable::new(
        Some(a.seed),
        &[
            "sample",
            "x1_re",
            "x1_im",
            "x2_re",
            "x2_im",
            "realization_re",
            "realization_im",
            "closed_re",
            "closed_im",
            "abs_diff",
        ],
    );
    let mut worst = 0.0f64;
    for i in 0..a.budget {
        let margin = MARGINS[i % MARGINS.len()];
        let x = probe::sample_in_ball(&ball, 1, margin, &mut probe::sample_rng(a.seed, i as u64))?;
        let s = x.as_scalars().expect("level 1");
        let v = f.eval(&x)?[(0, 0)];
        let closed = example_5_2_closed_form(s[0], s[1]);
        let diff = (v - closed).norm();
        worst = worst.max(diff);
        table.push(vec![
            i.to_string(),
            csv_float(s[0].re),
            csv_float(s[0].im),
            csv_float(s[1].re),
            csv_float(s[1].im),
            csv_float(v.re),
            csv_float(v.im),
            csv_float(closed.re),
            csv_float(closed.im),
            csv_float(diff),
        ]);
    }
    emit(&table, a.out.as_deref(), out)?;
    Ok(if worst <= 1e-10 { 0 } else { 1 })
}

fn reproduce_ex412(a: &ReproduceArgs, out: &mut dyn Write) -> Result<i32> {
    let pair = example_4_12::<f64>();
    let mut table = CsvTable::new(
        Some(a.seed),
        &["sample", "level", "in_v1", "image_in_v2", "roundtrip_error"],
    );
    let mut ok = true;
    for i in 0..a.budget {
        let level = 1 + i % 4;
        let t = varieties::sample_contraction::<f64>(
            level,
            0.05,
            &mut probe::sample_rng(a.seed, i as u64),
        )?;
        let x = varieties::graph_point(&t, 2)?;
        let y = pair.forward.apply(&x)?;
        let back = pair.backward.apply(&y)?;
        let err = (0..2)
            .map(|j| linalg::max_abs_diff(back.coord(j), x.coord(j)))
            .fold(0.0, f64::max);
        let (in_v1, in_v2) = (pair.v1.contains(&x)?, pair.v2.contains(&y)?);
        ok &= in_v1 && in_v2 && err <= 1e-12;
        table.push(vec![
            i.to_string(),
            level.to_string(),
            in_v1.to_string(),
            in_v2.to_string(),
            csv_float(err),
        ]);
    }
    emit(&table, a.out.as_deref(), out)?;
    Ok(if ok { 0 } else { 1 })
}
