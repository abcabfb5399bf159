use std::collections::BTreeMap;
use std::fmt;
use std::ops::Div;

use num_traits::FromPrimitive;

use super::word::Word;
use crate::error::{NcError, Result};
use crate::scalar::{Coefficient, ToLiteral};

/// Enumeration cap for word-indexed expansions.
pub const WORD_BUDGET: f64 = 1e6;

/// A free noncommutative polynomial `Σ c_w Z^w` with finitely many nonzero coefficients.
///
/// Terms are kept in a length-lex ordered map and zero coefficients are never stored,
/// so structural equality is coefficient equality.
#[derive(Clone, PartialEq)]
pub struct FreePolynomial<T> {
    d: usize,
    terms: BTreeMap<Word, T>,
}

impl<T: Coefficient> FreePolynomial<T> {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: T) -> Self {
        Self::monomial(Word::unit(d), c)
    }

    pub fn one(d: usize) -> Self {
        Self::constant(d, T::one())
    }

    /// `c · Z^w`.
    pub fn monomial(word: Word, c: T) -> Self {
        let d = word.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(word, c);
        }
        Self { d, terms }
    }

    /// The coordinate `Z_j` (1-based).
    pub fn variable(d: usize, j: usize) -> Result<Self> {
        Ok(Self::monomial(Word::letter(d, j)?, T::one()))
    }

    /// Builds a polynomial from `(word, coefficient)` pairs, summing repeated words.
    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Word, T)>) -> Result<Self> {
        let mut p = Self::zero(d);
        for (w, c) in terms {
            if w.dim() != d {
                return Err(NcError::DimensionMismatch {
                    expected: d,
                    found: w.dim(),
                });
            }
            p.accumulate(w, c);
        }
        Ok(p)
    }

    fn accumulate(&mut self, w: Word, c: T) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word size, or `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|w| w.len() as i64)
            .max()
            .unwrap_or(-1)
    }

    /// Smallest word size present, `None` for the zero polynomial.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).min()
    }

    pub fn coefficient(&self, w: &Word) -> T {
        self.terms.get(w).cloned().unwrap_or_else(T::zero)
    }

    /// Terms in length-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &T)> {
        self.terms.iter()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(NcError::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.accumulate(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, lambda: &T) -> Self {
        if lambda.is_zero() {
            return Self::zero(self.d);
        }
        let mut out = Self::zero(self.d);
        for (w, c) in &self.terms {
            out.accumulate(w.clone(), lambda.clone() * c.clone());
        }
        out
    }

    /// Free convolution: `c^{PQ}_w = Σ_{w = uv} c^P_u c^Q_v`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.d);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.accumulate(u.concat(v)?, a.clone() * b.clone());
            }
        }
        Ok(out)
    }

    /// `k`-fold noncommutative product; `P^0 = 1`.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.d);
        for _ in 0..k {
            out = out.mul(self).expect("equal dimensions");
        }
        out
    }

    /// `Σ_{|w|=k} c_w Z^w`.
    pub fn homogeneous_component(&self, k: usize) -> Self {
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == k)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// All homogeneous components, indexed by degree `0..=degree`.
    pub fn homogeneous_components(&self) -> Vec<Self> {
        let top = self.degree();
        (0..=top.max(-1))
            .map(|k| self.homogeneous_component(k as usize))
            .collect()
    }

    /// Left division by the words of size `order`: `P = Σ_{|w|=order} Z^w · f_w`.
    ///
    /// Requires every word of `P` to have size at least `order`.
    pub fn left_divide(&self, order: usize) -> Result<LeftQuotients<T>> {
        if let Some(low) = self.lowest_degree() {
            if low < order {
                return Err(NcError::NotInIdeal { size: low, order });
            }
        }
        let mut quotients: BTreeMap<Word, FreePolynomial<T>> = BTreeMap::new();
        for (w, c) in &self.terms {
            let (prefix, suffix) = w.split_at(order);
            quotients
                .entry(prefix)
                .or_insert_with(|| Self::zero(self.d))
                .accumulate(suffix, c.clone());
        }
        quotients.retain(|_, q| !q.is_zero());
        Ok(LeftQuotients {
            d: self.d,
            order,
            quotients,
        })
    }

    /// Substitutes `Z_j ↦ images[j-1]`, composing noncommutative polynomial maps.
    pub fn substitute(&self, images: &[FreePolynomial<T>]) -> Result<Self> {
        if images.len() != self.d {
            return Err(NcError::DimensionMismatch {
                expected: self.d,
                found: images.len(),
            });
        }
        let target_d = images.first().map(|p| p.d).unwrap_or(self.d);
        if let Some(bad) = images.iter().find(|p| p.d != target_d) {
            return Err(NcError::DimensionMismatch {
                expected: target_d,
                found: bad.d,
            });
        }
        let mut out = Self::zero(target_d);
        for (w, c) in &self.terms {
            let mut term = Self::constant(target_d, c.clone());
            for j in w.indices() {
                term = term.mul(&images[j])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    pub fn map_coefficients<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> FreePolynomial<U> {
        let mut out = FreePolynomial::zero(self.d);
        for (w, c) in &self.terms {
            out.accumulate(w.clone(), f(c));
        }
        out
    }
}

impl<T: Coefficient + Div<Output = T> + FromPrimitive> FreePolynomial<T> {
    /// Cesàro mean `Σ_{k<N} (1 − k/N) P_k` of the homogeneous expansion.
    pub fn cesaro(&self, order: usize) -> Result<Self> {
        cesaro_sum(self, order)
    }
}

impl<T: ToLiteral> FreePolynomial<T> {
    /// Renders in the parser grammar; `parse(format(P)) == P` for float coefficients.
    pub fn format(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(w, c)| {
                if w.is_empty() {
                    c.to_literal()
                } else {
                    format!("{}*{}", c.to_literal(), w.monomial())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Canonical serialization: `(word digits, re, im)` triples in length-lex order.
    pub fn canonical_triples(&self) -> Vec<(String, f64, f64)> {
        self.terms
            .iter()
            .map(|(w, c)| {
                let (re, im) = c.parts();
                (w.key(), re, im)
            })
            .collect()
    }
}

impl<T: fmt::Debug> fmt::Debug for FreePolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 (d={})", self.d);
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| format!("{c:?}·Z^{w:?}"))
            .collect();
        write!(f, "{} (d={})", parts.join(" + "), self.d)
    }
}

/// Result of [`FreePolynomial::left_divide`]: the quotients `f_w` for `|w| = order`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeftQuotients<T> {
    d: usize,
    order: usize,
    quotients: BTreeMap<Word, FreePolynomial<T>>,
}

impl<T: Coefficient> LeftQuotients<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `f_w`; zero for words that do not occur as prefixes.
    pub fn get(&self, w: &Word) -> FreePolynomial<T> {
        self.quotients
            .get(w)
            .cloned()
            .unwrap_or_else(|| FreePolynomial::zero(self.d))
    }

    /// Nonzero quotients in length-lex order.
    pub fn nonzero(&self) -> impl Iterator<Item = (&Word, &FreePolynomial<T>)> {
        self.quotients.iter()
    }

    /// `Σ_w Z^w · f_w`.
    pub fn reconstruct(&self) -> FreePolynomial<T> {
        let mut out = FreePolynomial::zero(self.d);
        for (w, f) in &self.quotients {
            let prefix = FreePolynomial::monomial(w.clone(), T::one());
            out = out.add(&prefix.mul(f).expect("same d")).expect("same d");
        }
        out
    }
}

/// A source of power-series coefficients indexed by words.
pub trait CoefficientSource<T: Coefficient> {
    fn dim(&self) -> usize;

    /// Degree-`k` homogeneous part as a polynomial.
    fn homogeneous_part(&self, k: usize) -> Result<FreePolynomial<T>>;
}

impl<T: Coefficient> CoefficientSource<T> for FreePolynomial<T> {
    fn dim(&self) -> usize {
        self.d
    }

    fn homogeneous_part(&self, k: usize) -> Result<FreePolynomial<T>> {
        Ok(self.homogeneous_component(k))
    }
}

/// `Σ_N(f) = Σ_{0 ≤ k < N} (1 − k/N) f_k`.
pub fn cesaro_sum<T, S>(source: &S, order: usize) -> Result<FreePolynomial<T>>
where
    T: Coefficient + Div<Output = T> + FromPrimitive,
    S: CoefficientSource<T> + ?Sized,
{
    if order == 0 {
        return Err(NcError::Invalid("Cesàro order N must be positive".into()));
    }
    let n =
        T::from_usize(order).ok_or_else(|| NcError::Invalid("order not representable".into()))?;
    let mut out = FreePolynomial::zero(source.dim());
    for k in 0..order {
        let weight = T::from_usize(order - k).expect("representable") / n.clone();
        out = out.add(&source.homogeneous_part(k)?.scale(&weight))?;
    }
    Ok(out)
}

/// `P + Q`.
pub fn poly_add<T: Coefficient>(
    p: &FreePolynomial<T>,
    q: &FreePolynomial<T>,
) -> Result<FreePolynomial<T>> {
    p.add(q)
}

/// `P · Q` (free convolution).
pub fn poly_mul<T: Coefficient>(
    p: &FreePolynomial<T>,
    q: &FreePolynomial<T>,
) -> Result<FreePolynomial<T>> {
    p.mul(q)
}

/// `λ · P`.
pub fn poly_scale<T: Coefficient>(lambda: &T, p: &FreePolynomial<T>) -> FreePolynomial<T> {
    p.scale(lambda)
}
