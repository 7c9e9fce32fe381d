//! Enumeration of the parity patterns behind the residue-class counts.
//!
//! An A-tuple for a given n is a word of m_of(n) zeros and n-2 ones; its
//! B-tuple prepends the fixed (1, 1). The ones of the B-tuple are the
//! positions where the trajectory term is odd, and those positions (the alpha
//! vector) feed the congruence solver. Tuples are listed in lexicographic
//! order with 0 < 1, the order used throughout, and can be unranked
//! so that disjoint index ranges partition the full listing.

use std::fmt;
use std::ops::Range;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::Zero;
use thiserror::Error;

use crate::collatz::ParityWord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TupleError {
    #[error("index {index} out of range: n = {n} has {j} tuples")]
    IndexOutOfRange { n: usize, index: BigUint, j: BigUint },
}

/// Number of zeros in an A-tuple: `floor(2(n-2)/3)`.
///
/// This is the largest zero count for which a word of n-2 ones can still
/// force a drop below the start by step sigma_n.
pub fn m_of(n: usize) -> usize {
    assert!(n >= 2, "m_of requires n >= 2");
    2 * (n - 2) / 3
}

/// Number of A-tuples for n: `C(m + n - 2, n - 2)` with m = m_of(n).
pub fn j_of(n: usize) -> BigUint {
    let m = m_of(n);
    binomial(BigUint::from(m + n - 2), BigUint::from(n - 2))
}

/// A word of m_of(n) zeros and n-2 ones; the variable part of a B-tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ATuple {
    n: usize,
    word: ParityWord,
}

impl ATuple {
    fn from_word(n: usize, word: ParityWord) -> Self {
        debug_assert_eq!(word.len(), m_of(n) + n - 2);
        debug_assert_eq!(word.ones(), n - 2);
        ATuple { n, word }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn word(&self) -> &ParityWord {
        &self.word
    }

    /// Next A-tuple in lexicographic order, if any.
    pub fn successor(&self) -> Option<ATuple> {
        next_permutation(&self.word).map(|w| ATuple::from_word(self.n, w))
    }
}

impl fmt::Display for ATuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

/// An A-tuple with the fixed (1, 1) prefix; n ones in total.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BTuple {
    n: usize,
    word: ParityWord,
}

impl BTuple {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn word(&self) -> &ParityWord {
        &self.word
    }
}

impl fmt::Display for BTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

/// The 0-based positions of the ones of a B-tuple, strictly increasing.
/// Entry i is the exponent alpha_{i+1} in the congruence term sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaVector {
    entries: Vec<usize>,
}

impl AlphaVector {
    pub fn new(entries: Vec<usize>) -> Self {
        assert!(
            entries.windows(2).all(|w| w[0] < w[1]),
            "alpha entries must be strictly increasing"
        );
        AlphaVector { entries }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Number of odd positions, the n of the tuple this came from.
    pub fn n(&self) -> usize {
        self.entries.len()
    }
}

impl fmt::Display for AlphaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// The lexicographically least A-tuple: all zeros, then all ones.
pub fn initial_a_tuple(n: usize) -> ATuple {
    let m = m_of(n);
    let mut bits = vec![false; m + n - 2];
    for b in bits.iter_mut().skip(m) {
        *b = true;
    }
    ATuple::from_word(n, ParityWord::from_bits(bits))
}

/// Next permutation of the word in lexicographic order (0 < 1), or None at
/// the maximum (all ones first).
pub fn next_permutation(word: &ParityWord) -> Option<ParityWord> {
    let mut bits = word.bits().to_vec();
    let len = bits.len();
    // rightmost ascent; none means the word is the final permutation
    let pivot = (0..len.saturating_sub(1)).rev().find(|&i| !bits[i] & bits[i + 1])?;
    // the pivot bit is 0, so any set bit to its right is larger
    let swap = (pivot + 1..len).rev().find(|&j| bits[j]).unwrap();
    bits.swap(pivot, swap);
    bits[pivot + 1..].reverse();
    Some(ParityWord::from_bits(bits))
}

/// Prepend the fixed (1, 1) head: trajectory terms 0 and 1 are always odd
/// for a start whose stopping time is sigma_n.
pub fn b_from_a(a: &ATuple) -> BTuple {
    let mut bits = Vec::with_capacity(a.word.len() + 2);
    bits.push(true);
    bits.push(true);
    bits.extend_from_slice(a.word.bits());
    BTuple {
        n: a.n,
        word: ParityWord::from_bits(bits),
    }
}

/// Positions of the ones of a B-tuple.
pub fn alpha_vector(b: &BTuple) -> AlphaVector {
    let entries = b
        .word
        .bits()
        .iter()
        .enumerate()
        .filter_map(|(i, &bit)| bit.then_some(i))
        .collect();
    AlphaVector::new(entries)
}

/// The index-th A-tuple in lexicographic order, without stepping through the
/// predecessors: at each slot there are `C(slots - 1, ones)` words that
/// continue with a zero, and the index decides which side the walk takes.
pub fn unrank_a_tuple(n: usize, index: &BigUint) -> Result<ATuple, TupleError> {
    let j = j_of(n);
    if *index >= j {
        return Err(TupleError::IndexOutOfRange {
            n,
            index: index.clone(),
            j,
        });
    }
    let len = m_of(n) + n - 2;
    let mut ones = n - 2;
    let mut rem = index.clone();
    let mut bits = Vec::with_capacity(len);
    for pos in 0..len {
        let slots = len - pos;
        if ones == 0 {
            bits.resize(len, false);
            break;
        }
        if ones == slots {
            bits.resize(len, true);
            break;
        }
        let with_zero = binomial(BigUint::from(slots - 1), BigUint::from(ones));
        if rem < with_zero {
            bits.push(false);
        } else {
            rem -= with_zero;
            bits.push(true);
            ones -= 1;
        }
    }
    debug_assert!(rem.is_zero());
    Ok(ATuple::from_word(n, ParityWord::from_bits(bits)))
}

/// Lexicographic stream of B-tuples for n, whole listing or an index
/// sub-range `lo..hi`. Disjoint ranges partition the listing, so chunks can
/// be processed independently.
#[derive(Debug)]
pub struct TupleStream {
    current: Option<ATuple>,
    remaining: BigUint,
}

pub fn tuple_stream(n: usize, range: Option<Range<BigUint>>) -> Result<TupleStream, TupleError> {
    let j = j_of(n);
    let (lo, hi) = match range {
        None => (BigUint::zero(), j.clone()),
        Some(r) => (r.start, r.end),
    };
    if hi > j {
        return Err(TupleError::IndexOutOfRange { n, index: hi, j });
    }
    if lo > hi {
        return Err(TupleError::IndexOutOfRange { n, index: lo, j });
    }
    let remaining = &hi - &lo;
    let current = if remaining.is_zero() {
        None
    } else {
        Some(unrank_a_tuple(n, &lo)?)
    };
    Ok(TupleStream { current, remaining })
}

impl Iterator for TupleStream {
    type Item = BTuple;

    fn next(&mut self) -> Option<BTuple> {
        if self.remaining.is_zero() {
            return None;
        }
        let a = self.current.take()?;
        let b = b_from_a(&a);
        self.remaining -= 1u32;
        if !self.remaining.is_zero() {
            self.current = a.successor();
            debug_assert!(self.current.is_some(), "stream ran dry before its count");
        }
        Some(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn word(bits: &[u8]) -> ParityWord {
        ParityWord::from_bits(bits.iter().map(|&b| b != 0).collect())
    }

    #[test]
    fn m_of_spot_values() {
        assert_eq!(m_of(4), 1);
        assert_eq!(m_of(7), 3);
        assert_eq!(m_of(2), 0);
        assert_eq!(m_of(5), 2);
        assert_eq!(m_of(12), 6);
    }

    #[test]
    fn j_of_spot_values() {
        assert_eq!(j_of(7), BigUint::from(56u32));
        assert_eq!(j_of(5), BigUint::from(10u32));
        assert_eq!(j_of(12), BigUint::from(8008u32));
        assert_eq!(j_of(13), BigUint::from(31824u32));
        assert_eq!(j_of(2), BigUint::one());
    }

    #[test]
    fn initial_tuple_is_zeros_then_ones() {
        assert_eq!(initial_a_tuple(7).word(), &word(&[0, 0, 0, 1, 1, 1, 1, 1]));
        assert_eq!(initial_a_tuple(4).word(), &word(&[0, 1, 1]));
        assert_eq!(initial_a_tuple(5).word(), &word(&[0, 0, 1, 1, 1]));
    }

    #[test]
    fn next_permutation_spot_values() {
        assert_eq!(
            next_permutation(&word(&[0, 0, 0, 1, 1, 1, 1, 1])),
            Some(word(&[0, 0, 1, 0, 1, 1, 1, 1]))
        );
        assert_eq!(next_permutation(&word(&[1, 1, 1, 1, 1, 0, 0, 0])), None);
        assert_eq!(next_permutation(&word(&[0, 1])), Some(word(&[1, 0])));
        assert_eq!(next_permutation(&word(&[1, 0])), None);
    }

    #[test]
    fn b_tuple_prepends_two_ones() {
        let b = b_from_a(&initial_a_tuple(4));
        assert_eq!(b.word(), &word(&[1, 1, 0, 1, 1]));
        assert_eq!(b.to_string(), "(1, 1, 0, 1, 1)");
    }

    #[test]
    fn alpha_vector_reads_one_positions() {
        let b = b_from_a(&initial_a_tuple(4));
        assert_eq!(alpha_vector(&b).entries(), &[0, 1, 3, 4]);
    }

    #[test]
    fn alpha_vector_round_trips_through_bits() {
        let mut a = Some(initial_a_tuple(6));
        while let Some(cur) = a {
            let b = b_from_a(&cur);
            let alphas = alpha_vector(&b);
            assert_eq!(alphas.n(), 6);
            let rebuilt: Vec<bool> = (0..b.word().len())
                .map(|i| alphas.entries().contains(&i))
                .collect();
            assert_eq!(rebuilt, b.word().bits());
            a = cur.successor();
        }
    }

    #[test]
    fn unrank_spot_values() {
        assert_eq!(
            unrank_a_tuple(7, &BigUint::zero()).unwrap(),
            initial_a_tuple(7)
        );
        assert_eq!(
            unrank_a_tuple(7, &BigUint::from(55u32)).unwrap().word(),
            &word(&[1, 1, 1, 1, 1, 0, 0, 0])
        );
        let err = unrank_a_tuple(7, &BigUint::from(56u32)).unwrap_err();
        assert_eq!(
            err,
            TupleError::IndexOutOfRange {
                n: 7,
                index: BigUint::from(56u32),
                j: BigUint::from(56u32),
            }
        );
    }

    #[test]
    fn unrank_agrees_with_stepping() {
        for n in [4usize, 5, 6, 7] {
            let mut a = Some(initial_a_tuple(n));
            let mut index = BigUint::zero();
            while let Some(cur) = a {
                assert_eq!(unrank_a_tuple(n, &index).unwrap(), cur, "n = {n} index = {index}");
                a = cur.successor();
                index += 1u32;
            }
            assert_eq!(index, j_of(n));
        }
    }

    #[test]
    fn stream_yields_j_tuples_in_increasing_order() {
        for n in [2usize, 3, 4, 5, 6, 7, 8] {
            let tuples: Vec<BTuple> = tuple_stream(n, None).unwrap().collect();
            assert_eq!(BigUint::from(tuples.len()), j_of(n), "n = {n}");
            for pair in tuples.windows(2) {
                assert!(pair[0].word() < pair[1].word(), "n = {n}");
            }
            for b in &tuples {
                assert!(b.word().bit(0) && b.word().bit(1));
                assert_eq!(b.word().ones(), n);
            }
        }
    }

    #[test]
    fn stream_for_n_4_listing_order() {
        let words: Vec<String> = tuple_stream(4, None)
            .unwrap()
            .map(|b| b.to_string())
            .collect();
        assert_eq!(
            words,
            vec!["(1, 1, 0, 1, 1)", "(1, 1, 1, 0, 1)", "(1, 1, 1, 1, 0)"]
        );
    }

    #[test]
    fn ranges_partition_the_stream() {
        let full: Vec<BTuple> = tuple_stream(7, None).unwrap().collect();
        let lo: Vec<BTuple> = tuple_stream(7, Some(BigUint::zero()..BigUint::from(28u32)))
            .unwrap()
            .collect();
        let hi: Vec<BTuple> = tuple_stream(7, Some(BigUint::from(28u32)..BigUint::from(56u32)))
            .unwrap()
            .collect();
        assert_eq!(lo.len(), 28);
        assert_eq!(hi.len(), 28);
        let glued: Vec<BTuple> = lo.into_iter().chain(hi).collect();
        assert_eq!(glued, full);
    }

    #[test]
    fn empty_range_is_allowed() {
        let got: Vec<BTuple> = tuple_stream(7, Some(BigUint::from(5u32)..BigUint::from(5u32)))
            .unwrap()
            .collect();
        assert!(got.is_empty());
    }

    #[test]
    fn range_past_the_end_is_rejected() {
        let err = tuple_stream(7, Some(BigUint::zero()..BigUint::from(57u32))).unwrap_err();
        assert!(matches!(err, TupleError::IndexOutOfRange { .. }));
    }

    #[test]
    fn n_2_has_the_empty_a_tuple() {
        let tuples: Vec<BTuple> = tuple_stream(2, None).unwrap().collect();
        assert_eq!(tuples.len(), 1);
        assert_eq!(tuples[0].to_string(), "(1, 1)");
    }
}
