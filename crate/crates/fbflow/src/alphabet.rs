//! Finite alphabets and mixed-radix history codes.
//!
//! Every conditioning history (an input prefix, an output prefix, a feedback
//! prefix, or a concatenation of those) is flattened to a single integer so
//! kernel tables can be plain row arrays. The flattening is mixed-radix with
//! the earliest symbol most significant: for radices `[r1, r2, r3]` the
//! history `(d1, d2, d3)` becomes `(d1 * r2 + d2) * r3 + d3`. This ordering
//! is part of the on-disk table format, so it must never change.

use crate::error::{Error, Result};

/// A finite symbol alphabet `{0, 1, ..., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn symbols(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    pub fn contains(&self, symbol: usize) -> bool {
        symbol < self.size
    }
}

/// A mixed-radix code together with the radices that give it meaning.
///
/// `code` ranges over `0..capacity(radices)`. An empty radix list denotes the
/// empty history, whose only code is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryIndex {
    radices: Vec<usize>,
    code: usize,
}

impl HistoryIndex {
    /// Number of distinct histories for the given radices.
    pub fn capacity(radices: &[usize]) -> usize {
        radices.iter().product()
    }

    /// Flatten digits to a code. Digits are ordered earliest first, and the
    /// earliest digit is most significant.
    pub fn encode(radices: &[usize], digits: &[usize]) -> Result<Self> {
        if radices.len() != digits.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} digits for {} radices",
                digits.len(),
                radices.len()
            )));
        }
        let mut code = 0usize;
        for (&d, &r) in digits.iter().zip(radices) {
            if r == 0 {
                return Err(Error::EmptyAlphabet);
            }
            if d >= r {
                return Err(Error::InvalidParameter(format!(
                    "digit {d} out of range for radix {r}"
                )));
            }
            code = code * r + d;
        }
        Ok(Self {
            radices: radices.to_vec(),
            code,
        })
    }

    /// Recover digits from a code.
    pub fn decode(radices: &[usize], code: usize) -> Result<Self> {
        let cap = Self::capacity(radices);
        if radices.iter().any(|&r| r == 0) {
            return Err(Error::EmptyAlphabet);
        }
        if code >= cap {
            return Err(Error::InvalidParameter(format!(
                "code {code} out of range for capacity {cap}"
            )));
        }
        Ok(Self {
            radices: radices.to_vec(),
            code,
        })
    }

    pub fn code(&self) -> usize {
        self.code
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn digits(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.radices.len()];
        let mut c = self.code;
        for k in (0..self.radices.len()).rev() {
            out[k] = c % self.radices[k];
            c /= self.radices[k];
        }
        out
    }
}

/// Append one digit to a running history code: `code * radix + digit`.
///
/// Builders walk trajectories forward in time and maintain prefix codes with
/// this single step instead of re-encoding whole histories.
#[inline]
pub fn push_digit(code: usize, radix: usize, digit: usize) -> usize {
    debug_assert!(digit < radix);
    code * radix + digit
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_alphabet_rejected() {
        assert!(Alphabet::new(0).is_err());
        assert!(Alphabet::new(1).is_ok());
    }

    #[test]
    fn empty_history_has_code_zero() {
        let h = HistoryIndex::encode(&[], &[]).unwrap();
        assert_eq!(h.code(), 0);
        assert_eq!(HistoryIndex::capacity(&[]), 1);
    }

    #[test]
    fn earliest_digit_is_most_significant() {
        // (1, 0, 2) over radices [2, 3, 4]: ((1*3)+0)*4 + 2 = 14.
        let h = HistoryIndex::encode(&[2, 3, 4], &[1, 0, 2]).unwrap();
        assert_eq!(h.code(), 14);
        assert_eq!(h.digits(), vec![1, 0, 2]);
    }

    #[test]
    fn out_of_range_digit_rejected() {
        assert!(HistoryIndex::encode(&[2, 2], &[0, 2]).is_err());
    }

    #[test]
    fn out_of_range_code_rejected() {
        assert!(HistoryIndex::decode(&[2, 2], 4).is_err());
        assert!(HistoryIndex::decode(&[2, 2], 3).is_ok());
    }

    #[test]
    fn push_digit_matches_encode() {
        let radices = [3, 2, 4];
        let digits = [2, 1, 3];
        let mut code = 0;
        for (&r, &d) in radices.iter().zip(&digits) {
            code = push_digit(code, r, d);
        }
        assert_eq!(
            code,
            HistoryIndex::encode(&radices, &digits).unwrap().code()
        );
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(
            radices in proptest::collection::vec(1usize..5, 0..6),
        ) {
            let cap = HistoryIndex::capacity(&radices);
            prop_assume!(cap <= 4096);
            for code in 0..cap {
                let h = HistoryIndex::decode(&radices, code).unwrap();
                let back = HistoryIndex::encode(&radices, &h.digits()).unwrap();
                prop_assert_eq!(back.code(), code);
            }
        }

        #[test]
        fn codes_are_dense_and_unique(
            radices in proptest::collection::vec(1usize..4, 1..5),
        ) {
            let cap = HistoryIndex::capacity(&radices);
            prop_assume!(cap <= 1024);
            let mut seen = vec![false; cap];
            // Odometer over all digit tuples.
            let mut digits = vec![0usize; radices.len()];
            'outer: loop {
                let code = HistoryIndex::encode(&radices, &digits).unwrap().code();
                prop_assert!(!seen[code]);
                seen[code] = true;
                let mut k = radices.len();
                while k > 0 {
                    k -= 1;
                    digits[k] += 1;
                    if digits[k] < radices[k] {
                        continue 'outer;
                    }
                    digits[k] = 0;
                }
                break;
            }
            prop_assert!(seen.into_iter().all(|s| s));
        }
    }
}
