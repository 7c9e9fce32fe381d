//! Exact solutions of the parity-pattern congruence and the residue-class
//! statistics built from them.
//!
//! Every B-tuple fixes the term sum `S = sum_i 3^{n-i} 2^{alpha_i}`, and
//! `3^n x + S = 2^{sigma_n} y` then has exactly one solution x modulo
//! `2^{sigma_n}`, recovered with the modular inverse of `3^n`. Solving the
//! congruence for every tuple of a given n and keeping the x whose stopping
//! time is exactly sigma_n enumerates the residue classes counted by z_n.
//! Valid for n >= 4; smaller n have classes whose parity words do not fit
//! the tuple shape.

use std::collections::BTreeMap;
use std::ops::Range;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::collatz::{sigma_exponent, step};
use crate::tuples::{alpha_vector, j_of, tuple_stream, AlphaVector, BTuple, TupleError, TupleStream};

/// One solved tuple: the unique x in (0, 2^sigma_n) realizing the pattern,
/// the endpoint y = T^{sigma_n}(x), and the measured stopping time of x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionRecord {
    pub n: usize,
    pub tuple: BTuple,
    pub alphas: AlphaVector,
    pub x: BigUint,
    pub y: BigUint,
    pub sigma_x: usize,
}

/// Stopping-time counts over all j_of(n) solutions, keyed by the stopping
/// time value. Every sigma_k for k = 2..=n appears, zero counts included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionRow {
    pub n: usize,
    pub counts: BTreeMap<usize, BigUint>,
    pub total: BigUint,
}

/// The z_n residue classes: members x modulo 2^{sigma_n} with stopping time
/// exactly sigma_n, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueClassSet {
    pub n: usize,
    pub modulus: BigUint,
    pub members: Vec<BigUint>,
}

struct SolverContext {
    n: usize,
    sigma: usize,
    modulus: BigUint,
    mask: BigUint,
    /// 3^0 ..= 3^n
    pow3: Vec<BigUint>,
    /// inverse of 3^n modulo 2^sigma
    inv3n: BigUint,
}

impl SolverContext {
    fn new(n: usize) -> Self {
        assert!(n >= 2, "the congruence needs n >= 2");
        let sigma = sigma_exponent(n).sigma_n;
        let modulus = BigUint::one() << sigma;
        let mask = &modulus - 1u32;
        let mut pow3 = Vec::with_capacity(n + 1);
        pow3.push(BigUint::one());
        for _ in 0..n {
            pow3.push(pow3.last().unwrap() * 3u32);
        }
        let inv3n = inverse_mod_pow2(&pow3[n], sigma);
        debug_assert!(((&pow3[n] * &inv3n) & &mask).is_one());
        SolverContext {
            n,
            sigma,
            modulus,
            mask,
            pow3,
            inv3n,
        }
    }

    fn term_sum(&self, alphas: &AlphaVector) -> BigUint {
        let mut s = BigUint::zero();
        for (i, alpha) in alphas.entries().iter().enumerate() {
            s += &self.pow3[self.n - (i + 1)] << *alpha;
        }
        s
    }

    fn solve(&self, alphas: &AlphaVector) -> (BigUint, BigUint) {
        assert_eq!(alphas.n(), self.n, "alpha vector is for a different n");
        let s = self.term_sum(alphas);
        debug_assert!(s.is_odd());
        // 3^n x = -S mod 2^sigma; S odd makes x odd, hence nonzero
        let t = (&s * &self.inv3n) & &self.mask;
        let x = &self.modulus - t;
        debug_assert!(x.is_odd() && x < self.modulus);
        let full = &self.pow3[self.n] * &x + &s;
        debug_assert!((&full & &self.mask).is_zero());
        let y = full >> self.sigma;
        (x, y)
    }

    /// Solve and measure: walks sigma_n steps once, taking the first drop
    /// below x as the stopping time and checking the endpoint against y.
    fn record(&self, tuple: BTuple) -> SolutionRecord {
        let alphas = alpha_vector(&tuple);
        let (x, y) = self.solve(&alphas);
        assert!(y < x, "no descent after {} steps for x = {x} (n = {})", self.sigma, self.n);
        let mut cur = x.clone();
        let mut first_drop = None;
        for k in 1..=self.sigma {
            cur = step(&cur);
            if first_drop.is_none() && cur < x {
                first_drop = Some(k);
            }
        }
        assert_eq!(cur, y, "formula endpoint mismatch for x = {x} (n = {})", self.n);
        let sigma_x = first_drop.expect("endpoint is below x, so a drop occurred");
        assert!(
            sigma_x >= 4,
            "stopping time {sigma_x} < 4 for x = {x} (n = {}); every odd solution drops at 4 or later",
            self.n
        );
        SolutionRecord {
            n: self.n,
            tuple,
            alphas,
            x,
            y,
            sigma_x,
        }
    }
}

/// Inverse of an odd a modulo 2^bits by Newton lifting; each round doubles
/// the number of correct low bits.
fn inverse_mod_pow2(a: &BigUint, bits: usize) -> BigUint {
    debug_assert!(a.is_odd());
    let mut x = BigUint::one();
    let mut good = 1usize;
    while good < bits {
        good = (good * 2).min(bits);
        let mask = (BigUint::one() << good) - 1u32;
        let ax = (a * &x) & &mask;
        let two_minus = ((BigUint::one() << good) + 2u32 - ax) & &mask;
        x = (&x * two_minus) & &mask;
    }
    x
}

/// The unique (x, y) with `3^n x + S(alphas) = 2^{sigma_n} y` and
/// 0 < x < 2^{sigma_n}.
pub fn solve_unique(n: usize, alphas: &AlphaVector) -> (BigUint, BigUint) {
    let entries = alphas.entries();
    assert!(entries.len() == n && n >= 2, "need n >= 2 alpha entries");
    assert!(entries[0] == 0 && entries[1] == 1, "patterns start with two odd terms");
    SolverContext::new(n).solve(alphas)
}

/// Solved records for the tuples of n in listing order, whole listing or an
/// index sub-range.
pub struct SolutionStream {
    ctx: SolverContext,
    inner: TupleStream,
}

impl Iterator for SolutionStream {
    type Item = SolutionRecord;

    fn next(&mut self) -> Option<SolutionRecord> {
        self.inner.next().map(|b| self.ctx.record(b))
    }
}

pub fn solution_stream(n: usize, range: Option<Range<BigUint>>) -> Result<SolutionStream, TupleError> {
    assert!(n >= 4, "solution enumeration is meaningful for n >= 4");
    Ok(SolutionStream {
        ctx: SolverContext::new(n),
        inner: tuple_stream(n, range)?,
    })
}

/// Split [0, j) into chunks for independent workers; a short listing stays
/// in one chunk.
fn index_chunks(j: &BigUint) -> Vec<Range<BigUint>> {
    let chunk_count = if *j <= BigUint::from(1024u32) {
        1
    } else {
        rayon::current_num_threads() * 8
    };
    let mut out = Vec::with_capacity(chunk_count);
    let mut prev = BigUint::zero();
    for i in 1..=chunk_count {
        let end = (j * i) / chunk_count;
        if end > prev {
            out.push(prev.clone()..end.clone());
            prev = end;
        }
    }
    out
}

/// Stopping-time distribution over all solutions for n.
pub fn classify(n: usize) -> DistributionRow {
    assert!(n >= 4, "classification is meaningful for n >= 4");
    let j = j_of(n);
    let partials: Vec<BTreeMap<usize, u64>> = index_chunks(&j)
        .into_par_iter()
        .map(|range| {
            let mut counts = BTreeMap::new();
            for rec in solution_stream(n, Some(range)).expect("chunk is within the listing") {
                *counts.entry(rec.sigma_x).or_insert(0u64) += 1;
            }
            counts
        })
        .collect();

    let mut counts: BTreeMap<usize, BigUint> = (2..=n)
        .map(|k| (sigma_exponent(k).sigma_n, BigUint::zero()))
        .collect();
    for partial in partials {
        for (sigma, c) in partial {
            *counts
                .get_mut(&sigma)
                .unwrap_or_else(|| panic!("stopping time {sigma} is not a sigma_k for k <= {n}")) +=
                c;
        }
    }
    let total: BigUint = counts.values().sum();
    assert_eq!(total, j, "every tuple classifies to exactly one stopping time");
    DistributionRow { n, counts, total }
}

/// All residue classes x mod 2^{sigma_n} with stopping time exactly sigma_n,
/// via full enumeration.
pub fn residue_classes(n: usize) -> ResidueClassSet {
    assert!(n >= 4, "residue enumeration is meaningful for n >= 4");
    let sigma = sigma_exponent(n);
    let mut members: Vec<BigUint> = index_chunks(&j_of(n))
        .into_par_iter()
        .map(|range| {
            solution_stream(n, Some(range))
                .expect("chunk is within the listing")
                .filter(|rec| rec.sigma_x == sigma.sigma_n)
                .map(|rec| rec.x)
                .collect::<Vec<_>>()
        })
        .reduce(Vec::new, |mut acc, mut part| {
            acc.append(&mut part);
            acc
        });
    members.sort_unstable();
    ResidueClassSet {
        n,
        modulus: sigma.modulus(),
        members,
    }
}

/// z_n counted by enumeration: the sigma_n entry of the distribution.
pub fn zn_by_enumeration(n: usize) -> BigUint {
    let sigma_n = sigma_exponent(n).sigma_n;
    classify(n).counts[&sigma_n].clone()
}
