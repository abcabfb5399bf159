use std::cmp::Ordering;
use std::fmt;

use crate::error::{NcError, Result};

/// A word in the free monoid on the letters `1..=d`.
///
/// Words are ordered length-lexicographically: shorter words first, then
/// lexicographically with `1 < 2 < ... < d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<u32>,
    d: usize,
}

impl Word {
    /// The unit (empty) word.
    pub fn unit(d: usize) -> Self {
        Self {
            letters: Vec::new(),
            d,
        }
    }

    /// Builds a word from 1-based letters.
    pub fn new(d: usize, letters: impl IntoIterator<Item = usize>) -> Result<Self> {
        if d == 0 {
            return Err(NcError::Invalid("dimension d must be positive".into()));
        }
        let letters: Vec<u32> = letters
            .into_iter()
            .map(|l| {
                if (1..=d).contains(&l) {
                    Ok(l as u32)
                } else {
                    Err(NcError::Invalid(format!("letter {l} outside 1..={d}")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { letters, d })
    }

    /// The single-letter word `j`.
    pub fn letter(d: usize, j: usize) -> Result<Self> {
        Self::new(d, [j])
    }

    /// Parses a digit string such as `"121"`; for `d > 9` letters are dot-separated, so
    /// `"12"` is the single letter 12.
    pub fn parse(d: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(Self::unit(d));
        }
        let parse_letter = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| NcError::Invalid(format!("bad letter {s:?} in word {text:?}")))
        };
        let letters: Vec<usize> = if d > 9 || text.contains('.') || text.contains(',') {
            text.split(['.', ','])
                .map(parse_letter)
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| parse_letter(c.encode_utf8(&mut [0; 4])))
                .collect::<Result<_>>()?
        };
        Self::new(d, letters)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Size `|w|`.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// 1-based letters.
    pub fn letters(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.letters.iter().map(|&l| l as usize)
    }

    /// 0-based letter indices, convenient for indexing tuples.
    pub fn indices(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.letters.iter().map(|&l| l as usize - 1)
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.d != other.d {
            return Err(NcError::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word { letters, d: self.d })
    }

    /// Splits into the prefix of size `k` and the remaining suffix.
    pub fn split_at(&self, k: usize) -> (Word, Word) {
        let (a, b) = self.letters.split_at(k);
        (
            Word {
                letters: a.to_vec(),
                d: self.d,
            },
            Word {
                letters: b.to_vec(),
                d: self.d,
            },
        )
    }

    /// Digit-string form used in CSV/JSON output; `""` for the unit word.
    pub fn key(&self) -> String {
        let sep = if self.d > 9 { "." } else { "" };
        self.letters
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Monomial text `z1*z2*...`, or `1` for the unit word.
    pub fn monomial(&self) -> String {
        if self.is_empty() {
            return "1".into();
        }
        self.letters
            .iter()
            .map(|l| format!("z{l}"))
            .collect::<Vec<_>>()
            .join("*")
    }

    /// All words of size exactly `k` in length-lex order.
    pub fn all_of_size(d: usize, k: usize) -> WordsOfSize {
        WordsOfSize {
            d,
            current: Some(vec![1; k]),
        }
    }

    /// Number of words of size `k`, as a float so that huge counts do not overflow.
    pub fn count_of_size(d: usize, k: usize) -> f64 {
        (d as f64).powi(k as i32)
    }

    /// Position of this word among the words of its size (length-lex rank).
    pub fn rank_within_size(&self) -> usize {
        self.letters
            .iter()
            .fold(0, |acc, &l| acc * self.d + (l as usize - 1))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
            .then_with(|| self.d.cmp(&other.d))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "{}", self.key())
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Odometer over the words of a fixed size.
pub struct WordsOfSize {
    d: usize,
    current: Option<Vec<u32>>,
}

impl Iterator for WordsOfSize {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let letters = self.current.take()?;
        let word = Word {
            letters: letters.clone(),
            d: self.d,
        };
        let mut next = letters;
        let mut i = next.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if (next[i] as usize) < self.d {
                next[i] += 1;
                self.current = Some(next);
                break;
            }
            next[i] = 1;
        }
        Some(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_lex_order() {
        let w = |s: &str| Word::parse(2, s).unwrap();
        let mut words = [w("21"), w("1"), w(""), w("12"), w("2"), w("111")];
        words.sort();
        let keys: Vec<_> = words.iter().map(Word::key).collect();
        assert_eq!(keys, ["", "1", "2", "12", "21", "111"]);
    }

    #[test]
    fn enumeration_matches_order_and_rank() {
        let words: Vec<Word> = Word::all_of_size(3, 2).collect();
        assert_eq!(words.len(), 9);
        assert!(words.windows(2).all(|p| p[0] < p[1]));
        for (i, w) in words.iter().enumerate() {
            assert_eq!(w.rank_within_size(), i);
        }
        assert_eq!(
            Word::all_of_size(2, 0).collect::<Vec<_>>(),
            vec![Word::unit(2)]
        );
    }

    #[test]
    fn letters_are_validated() {
        assert!(Word::new(2, [1, 3]).is_err());
        assert!(Word::new(2, [0]).is_err());
        assert!(Word::parse(12, "10.12.1").is_ok());
        assert_eq!(Word::parse(12, "10.12.1").unwrap().key(), "10.12.1");
        assert_eq!(
            Word::parse(12, "12").unwrap(),
            Word::letter(12, 12).unwrap()
        );
    }

    #[test]
    fn split_and_concat() {
        let w = Word::parse(2, "1221").unwrap();
        let (a, b) = w.split_at(1);
        assert_eq!(a.key(), "1");
        assert_eq!(b.key(), "221");
        assert_eq!(a.concat(&b).unwrap(), w);
        assert!(a.concat(&Word::unit(3)).is_err());
    }
}
