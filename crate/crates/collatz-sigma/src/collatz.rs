//! The shortcut Collatz map and everything measured directly on its orbits:
//! trajectories, stopping times, the exact exponents `sigma_n`, parity words,
//! and the closed-form value of `T^{sigma_n}(s)` for a prescribed parity pattern.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::tuples::AlphaVector;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CollatzError {
    /// `T^k(s)` is never below s for s < 2 (the orbit of 1 is the cycle 1, 2).
    #[error("stopping time undefined for s = {s}; it is only defined for s >= 2")]
    InvalidStart { s: BigUint },
}

/// One application of T: x/2 for even x, (3x+1)/2 for odd x.
pub fn step(x: &BigUint) -> BigUint {
    assert!(!x.is_zero(), "step requires x >= 1");
    if x.is_even() {
        x >> 1usize
    } else {
        (x * 3u32 + 1u32) >> 1usize
    }
}

/// An orbit prefix under T, starting term included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    terms: Vec<BigUint>,
}

impl Trajectory {
    pub fn start(&self) -> &BigUint {
        &self.terms[0]
    }

    /// All terms `T^0(s) ..= T^a(s)`.
    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    pub fn last(&self) -> &BigUint {
        self.terms.last().expect("trajectory is never empty")
    }
}

/// The terms `T^0(s), ..., T^count(s)` (count+1 of them).
pub fn trajectory(s: &BigUint, count: usize) -> Trajectory {
    assert!(!s.is_zero(), "trajectory requires s >= 1");
    let mut terms = Vec::with_capacity(count + 1);
    terms.push(s.clone());
    for _ in 0..count {
        let next = step(terms.last().unwrap());
        terms.push(next);
    }
    Trajectory { terms }
}

/// Outcome of a capped stopping-time search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingTime {
    /// Least k with `T^k(s) < s`.
    Found(usize),
    /// No drop below s within `cap` steps.
    NotFound { cap: usize },
}

impl StoppingTime {
    pub fn found(self) -> Option<usize> {
        match self {
            StoppingTime::Found(k) => Some(k),
            StoppingTime::NotFound { .. } => None,
        }
    }
}

/// Least k <= cap with `T^k(s) < s`, or `NotFound` once the cap is exhausted.
///
/// s = 1 is rejected: T^k(1) cycles through {1, 2} and never drops below 1.
pub fn stopping_time(s: &BigUint, cap: usize) -> Result<StoppingTime, CollatzError> {
    if *s < BigUint::from(2u32) {
        return Err(CollatzError::InvalidStart { s: s.clone() });
    }
    let mut x = s.clone();
    for k in 1..=cap {
        x = step(&x);
        if x < *s {
            return Ok(StoppingTime::Found(k));
        }
    }
    Ok(StoppingTime::NotFound { cap })
}

/// A stopping-time measurement together with the parity bits that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingTimeResult {
    pub s: BigUint,
    pub sigma: StoppingTime,
    /// Parities of `T^0(s) .. T^{k-1}(s)` where k is the stopping time
    /// (or the cap when it was not found).
    pub parity_prefix: ParityWord,
}

pub fn stopping_time_result(s: &BigUint, cap: usize) -> Result<StoppingTimeResult, CollatzError> {
    let sigma = stopping_time(s, cap)?;
    let len = match sigma {
        StoppingTime::Found(k) => k,
        StoppingTime::NotFound { cap } => cap,
    };
    Ok(StoppingTimeResult {
        s: s.clone(),
        sigma,
        parity_prefix: parity_word(s, len),
    })
}

/// A trajectory prefix reduced to parities: bit k is 1 iff `T^k(s)` is odd.
///
/// Words of equal length order lexicographically with 0 < 1, which is the
/// listing order used for tuple enumeration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParityWord {
    bits: Vec<bool>,
}

impl ParityWord {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        ParityWord { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, k: usize) -> bool {
        self.bits[k]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for ParityWord {
    /// Renders in listing form: `(1, 1, 0, 1, 1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", u8::from(*b))?;
        }
        write!(f, ")")
    }
}

/// Parities of the first `length` trajectory terms of s.
pub fn parity_word(s: &BigUint, length: usize) -> ParityWord {
    assert!(!s.is_zero(), "parity_word requires s >= 1");
    let mut bits = Vec::with_capacity(length);
    let mut x = s.clone();
    for k in 0..length {
        bits.push(x.is_odd());
        if k + 1 < length {
            x = step(&x);
        }
    }
    ParityWord { bits }
}

/// The exponent pair (n, sigma_n): sigma_n is the smallest k with `2^k > 3^n`.
///
/// Every stopping time of an odd start is one of these exponents, and the
/// residue classes with stopping time sigma_n live modulo `2^sigma_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaExponent {
    pub n: usize,
    pub sigma_n: usize,
}

impl SigmaExponent {
    /// `2^sigma_n`, the modulus of the residue classes for this n.
    pub fn modulus(&self) -> BigUint {
        BigUint::one() << self.sigma_n
    }
}

/// Smallest k with `2^k > 3^n`, by exact big-integer comparison.
///
/// Equals `floor(1 + n*log2(3))`, but floating-point log flips the floor for
/// large n, so the power of three is compared exactly.
pub fn sigma_exponent(n: usize) -> SigmaExponent {
    let p = BigUint::from(3u32).pow(u32::try_from(n).expect("n fits in u32"));
    // bit length b satisfies 2^(b-1) <= p < 2^b, so b is the smallest
    // exponent with 2^b > p
    let sigma_n = usize::try_from(p.bits()).unwrap();
    debug_assert!(BigUint::one() << sigma_n > p);
    debug_assert!((BigUint::one() << (sigma_n - 1)) <= p);
    SigmaExponent { n, sigma_n }
}

/// Exact value of `(3^n s + sum_i 3^{n-i} 2^{alpha_i}) / 2^{sigma_n}`
/// for the n = alphas.len() odd-position exponents alpha_1 < ... < alpha_n.
///
/// Integral exactly when s realizes the parity pattern encoded by alphas,
/// in which case the value is `T^{sigma_n}(s)`.
pub fn term_formula_value(s: &BigUint, alphas: &AlphaVector) -> BigRational {
    let n = alphas.n();
    assert!(n >= 1, "term formula needs at least one odd term");
    let pow3: Vec<BigUint> = {
        let mut v = vec![BigUint::one()];
        for _ in 0..n {
            v.push(v.last().unwrap() * 3u32);
        }
        v
    };
    let mut numer = &pow3[n] * s;
    for (i, alpha) in alphas.entries().iter().enumerate() {
        // 1-based term index i+1 carries 3^(n-(i+1))
        numer += &pow3[n - (i + 1)] << *alpha;
    }
    let sigma = sigma_exponent(n).sigma_n;
    let denom = BigUint::one() << sigma;
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
