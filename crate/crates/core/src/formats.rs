//! JSON input formats and CSV output.
//!
//! Matrices are lists of rows, each entry a `[re, im]` pair. Numbers are decimal text and
//! round-trip `f64` exactly.

use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};
use crate::freealg::FreePolynomial;
use crate::linalg::CMat;
use crate::mattuple::MatrixTuple;
use crate::opball::{OperatorBall, Pencil};
use crate::realize::{example_5_2, Mode, Realization};
use crate::scalar::{FromLiteral, Real, ToLiteral};
use crate::varieties::AlgebraicVariety;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn fmt_err(e: impl std::fmt::Display) -> NcError {
    NcError::Format(e.to_string())
}

pub fn matrix_to_json<R: Real>(m: &CMat<R>) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect()
}

/// Reads a matrix and checks its shape when `shape` is given.
pub fn matrix_from_json<R: Real>(
    rows: &JsonMatrix,
    shape: Option<(usize, usize)>,
    what: &str,
) -> Result<CMat<R>> {
    let r = rows.len();
    let c = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|row| row.len() != c) {
        return Err(NcError::Format(format!("{what}: ragged rows")));
    }
    if let Some(expected) = shape {
        if (r, c) != expected {
            return Err(NcError::Format(format!(
                "{what}: shape {r}x{c}, expected {}x{}",
                expected.0, expected.1
            )));
        }
    }
    Ok(CMat::from_fn(r, c, |i, j| {
        Complex::new(R::of(rows[i][j][0]), R::of(rows[i][j][1]))
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub n: usize,
    pub d: usize,
    pub entries: Vec<JsonMatrix>,
}

impl PointJson {
    pub fn from_tuple<R: Real>(x: &MatrixTuple<R>) -> Self {
        Self {
            n: x.level(),
            d: x.dim(),
            entries: x.coords().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_tuple<R: Real>(&self) -> Result<MatrixTuple<R>> {
        if self.entries.len() != self.d {
            return Err(NcError::Format(format!(
                "point: d = {} but {} matrices given",
                self.d,
                self.entries.len()
            )));
        }
        let mats = self
            .entries
            .iter()
            .enumerate()
            .map(|(j, m)| {
                matrix_from_json(m, Some((self.n, self.n)), &format!("point entry {}", j + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixTuple::new(mats)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilJson {
    pub d: usize,
    pub p: usize,
    pub q: usize,
    pub coefficients: Vec<JsonMatrix>,
}

impl PencilJson {
    pub fn from_pencil<R: Real>(q: &Pencil<R>) -> Self {
        Self {
            d: q.dim(),
            p: q.rows(),
            q: q.cols(),
            coefficients: q.coefficients().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_pencil<R: Real>(&self) -> Result<Pencil<R>> {
        if self.coefficients.len() != self.d {
            return Err(NcError::Format(format!(
                "pencil: d = {} but {} coefficients given",
                self.d,
                self.coefficients.len()
            )));
        }
        let coefficients = self
            .coefficients
            .iter()
            .map(|m| matrix_from_json(m, Some((self.p, self.q)), "pencil coefficient"))
            .collect::<Result<Vec<_>>>()?;
        Pencil::new(coefficients)
    }
}

/// A pencil given inline or by ball shorthand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PencilSpec {
    Shorthand(String),
    Inline(PencilJson),
}

impl PencilSpec {
    pub fn to_ball<R: Real>(&self) -> Result<OperatorBall<R>> {
        match self {
            PencilSpec::Shorthand(s) => s.parse(),
            PencilSpec::Inline(p) => Ok(OperatorBall::new(p.to_pencil()?)),
        }
    }

    pub fn from_ball<R: Real>(ball: &OperatorBall<R>) -> Self {
        match ball.shorthand() {
            Some(s) => PencilSpec::Shorthand(s),
            None => PencilSpec::Inline(PencilJson::from_pencil(ball.pencil())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationJson {
    pub pencil: PencilSpec,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: [f64; 2],
    #[serde(rename = "B")]
    pub b: JsonMatrix,
    #[serde(rename = "C")]
    pub c: JsonMatrix,
    #[serde(rename = "D")]
    pub d: JsonMatrix,
    pub mode: String,
}

impl RealizationJson {
    pub fn from_realization<R: Real>(f: &Realization<R>) -> Self {
        Self {
            pencil: PencilSpec::from_ball(&f.ball()),
            m: f.state_dim(),
            a: [f.a().re.as_f64(), f.a().im.as_f64()],
            b: matrix_to_json(f.b()),
            c: matrix_to_json(f.c()),
            d: matrix_to_json(f.d()),
            mode: f.mode().as_str().to_string(),
        }
    }

    pub fn to_realization<R: Real>(&self) -> Result<Realization<R>> {
        let pencil = self.pencil.to_ball::<R>()?.pencil().clone();
        let mode: Mode = self.mode.parse()?;
        Realization::new(
            pencil,
            self.m,
            Complex::new(R::of(self.a[0]), R::of(self.a[1])),
            matrix_from_json(&self.b, None, "B")?,
            matrix_from_json(&self.c, None, "C")?,
            matrix_from_json(&self.d, None, "D")?,
            mode,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarietyJson {
    pub ball: String,
    pub generators: Vec<String>,
}

impl VarietyJson {
    pub fn to_variety<R: Real>(&self) -> Result<AlgebraicVariety<R>>
    where
        Complex<R>: FromLiteral,
    {
        AlgebraicVariety::from_strings(self.ball.parse()?, &self.generators)
    }

    pub fn from_variety<R: Real>(v: &AlgebraicVariety<R>) -> Result<Self>
    where
        Complex<R>: ToLiteral,
    {
        let ball = v
            .ambient()
            .shorthand()
            .ok_or_else(|| NcError::Format("variety JSON needs a shorthand ball".into()))?;
        Ok(Self {
            ball,
            generators: v.generators().iter().map(FreePolynomial::format).collect(),
        })
    }
}

pub fn from_json_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(fmt_err)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(fmt_err)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| NcError::Format(format!("{path}: {e}")))?;
    from_json_str(&text)
}

/// Resolves the builtin name `ex52` or reads a realization file.
pub fn load_realization<R: Real>(spec: &str) -> Result<Realization<R>> {
    if spec == "ex52" {
        return Ok(example_5_2());
    }
    read_json::<RealizationJson>(spec)?.to_realization()
}

/// Resolves `row:d`, `polydisk:d`, `column:d` or `pencil:FILE`.
pub fn load_ball<R: Real>(spec: &str) -> Result<OperatorBall<R>> {
    match spec.strip_prefix("pencil:") {
        Some(path) => Ok(OperatorBall::new(
            read_json::<PencilJson>(path)?.to_pencil()?,
        )),
        None => spec.parse(),
    }
}

/// Fixed-width float rendering with 17 significant digits.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table with a provenance comment line and a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub seed: Option<u64>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(seed: Option<u64>, header: &[&str]) -> Self {
        Self {
            seed,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("# ncball {}", env!("CARGO_PKG_VERSION"));
        match self.seed {
            Some(s) => out.push_str(&format!(" seed={s}\n")),
            None => out.push_str(" seed=none\n"),
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &str) -> Result<()> {
        let mut file =
            std::fs::File::create(path).map_err(|e| NcError::Format(format!("{path}: {e}")))?;
        file.write_all(self.render().as_bytes())
            .map_err(|e| NcError::Format(format!("{path}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_roundtrip_is_bit_exact() {
        let x = MatrixTuple::<f64>::new(vec![
            CMat::from_row_slice(1, 1, &[Complex::new(0.1, -1.0 / 3.0)]),
            CMat::from_row_slice(1, 1, &[Complex::new(std::f64::consts::PI, 1e-300)]),
        ])
        .unwrap();
        let text = to_json_string(&PointJson::from_tuple(&x)).unwrap();
        let back: MatrixTuple<f64> = from_json_str::<PointJson>(&text)
            .unwrap()
            .to_tuple()
            .unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn point_shape_errors() {
        let bad = r#"{"n": 2, "d": 1, "entries": [[[[1, 0]]]]}"#;
        let p: PointJson = from_json_str(bad).unwrap();
        assert!(matches!(p.to_tuple::<f64>(), Err(NcError::Format(_))));
        assert!(matches!(
            from_json_str::<PointJson>("{"),
            Err(NcError::Format(_))
        ));
    }

    #[test]
    fn realization_roundtrip() {
        let f = example_5_2::<f64>();
        let json = RealizationJson::from_realization(&f);
        assert_eq!(json.pencil, PencilSpec::Shorthand("polydisk:2".into()));
        let text = to_json_string(&json).unwrap();
        let back: Realization<f64> = from_json_str::<RealizationJson>(&text)
            .unwrap()
            .to_realization()
            .unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn inline_pencil_and_variety() {
        let text =
            r#"{"d": 2, "p": 1, "q": 2, "coefficients": [[[[1,0],[0,0]]], [[[0,0],[1,0]]]]}"#;
        let q: Pencil<f64> = from_json_str::<PencilJson>(text)
            .unwrap()
            .to_pencil()
            .unwrap();
        assert_eq!(q, Pencil::row(2));
        let v: VarietyJson =
            from_json_str(r#"{"ball": "polydisk:2", "generators": ["z2 - z1^2"]}"#).unwrap();
        let var = v.to_variety::<f64>().unwrap();
        assert_eq!(VarietyJson::from_variety(&var).unwrap().generators.len(), 1);
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(Some(7), &["eps", "value"]);
        t.push(vec![csv_float(0.1), csv_float(5.0)]);
        let text = t.render();
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[0].starts_with("# ncball ") && lines[0].ends_with("seed=7"));
        assert_eq!(lines[1], "eps,value");
        assert_eq!(lines[2], "1.0000000000000001e-1,5.0000000000000000e0");
        assert_eq!(
            lines[2].split(',').next().unwrap().parse::<f64>().unwrap(),
            0.1
        );
    }
}
