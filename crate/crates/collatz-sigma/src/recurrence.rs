//! The iterative recurrence for z_n, the count of residue classes modulo
//! 2^{sigma_n} with stopping time exactly sigma_n (OEIS A100982).
//!
//! For n >= 13,
//!
//! ```text
//! z_n = j_of(n) - sum_{i=2}^{n-1} C(floor((3(n-i) + delta_i)/2), n-i) * z_i
//! ```
//!
//! where the offsets delta_i follow a windowed schedule: two fixed blocks of
//! five terms at delta_base(n) and delta_base(n) - 1, then windows of six
//! (occasionally five) terms whose offset drops by one per window. The
//! window shapes and the acceptance rule that ends the schedule at i = n - 1
//! are a fixed empirical threshold table, carried over unchanged from the
//! search that found it; they are validated on every call and any mismatch
//! panics rather than returning a silently wrong z_n. The schedule constants
//! are conjectural beyond the range they were originally fitted on, so the
//! validation is the load-bearing safety net.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::collatz::sigma_exponent;
use crate::dioph::DistributionRow;
use crate::tuples::j_of;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecurrenceError {
    #[error("the series is missing z_{missing}, needed for n = {n}")]
    MissingHistory { n: usize, missing: usize },
}

/// How a z_n value entered a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// One of the twelve seed values z_1 ..= z_12.
    Initial,
    /// Computed by the recurrence.
    Iterative,
    /// Counted by solving the congruence for every tuple.
    Enumerated,
    /// Counted by scanning all residues modulo 2^{sigma_n}.
    BruteForce,
}

/// The z series indexed by n. Values are write-once: recording a different
/// value for an existing index panics.
#[derive(Debug, Clone, Default)]
pub struct ZnSeries {
    values: BTreeMap<usize, (BigUint, Provenance)>,
}

/// z_1 ..= z_12, the seed block below the reach of the recurrence.
pub const SEED_VALUES: [u32; 12] = [1, 1, 2, 3, 7, 12, 30, 85, 173, 476, 961, 2652];

impl ZnSeries {
    pub fn empty() -> Self {
        ZnSeries::default()
    }

    pub fn seeded() -> Self {
        let mut series = ZnSeries::default();
        for (i, &z) in SEED_VALUES.iter().enumerate() {
            series.insert(i + 1, BigUint::from(z), Provenance::Initial);
        }
        series
    }

    pub fn insert(&mut self, n: usize, z: BigUint, provenance: Provenance) {
        if let Some((existing, _)) = self.values.get(&n) {
            assert_eq!(existing, &z, "z_{n} is already recorded with a different value");
            return;
        }
        self.values.insert(n, (z, provenance));
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.values.get(&n).map(|(z, _)| z)
    }

    pub fn provenance(&self, n: usize) -> Option<Provenance> {
        self.values.get(&n).map(|(_, p)| *p)
    }

    pub fn max_n(&self) -> Option<usize> {
        self.values.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigUint, Provenance)> + '_ {
        self.values.iter().map(|(&n, (z, p))| (n, z, *p))
    }
}

/// `C(floor((3k + delta)/2), k)`, and 0 whenever the upper argument is below
/// k (in particular whenever it is negative).
pub fn coefficient(k: usize, delta: i64) -> BigUint {
    let a = (3 * k as i64 + delta).div_euclid(2);
    if a < k as i64 {
        return BigUint::zero();
    }
    binomial(BigUint::from(a as u64), BigUint::from(k))
}

/// Offset of the first schedule block:
/// `-1 + sum_{k=0}^{n-11} (-1)^{floor(2(k-2)/3)}`.
pub fn delta_base(n: usize) -> i64 {
    assert!(n >= 12, "delta_base feeds the recurrence, which starts at n = 12");
    let mut s: i64 = -1;
    for k in 0..=(n as i64 - 11) {
        let e = (2 * (k - 2)).div_euclid(3);
        s += if e.rem_euclid(2) == 0 { 1 } else { -1 };
    }
    s
}

/// A run of consecutive summation indices i sharing one delta offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub i_lo: usize,
    pub i_hi: usize,
    pub delta: i64,
}

/// Loop bounds the schedule ran with and where its acceptance rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleDiagnostics {
    /// Window count the search was allowed: `(n - 12)/5 + 2`. Every window
    /// advances the cover by at least five indices, so this always reaches
    /// i = n - 1; the tighter bound `(limit - 12)/6` assumes the average
    /// advance and falls short for n within about one percent of the limit.
    pub window_bound: usize,
    /// Acceptance scans t in `0 ..= n/15`.
    pub t_bound: usize,
    /// The acceptance correction terms r1, r2 accumulate over `n/50` blocks.
    pub r_block_bound: usize,
    /// Window start offsets accumulate over `n/20` threshold blocks.
    pub v_block_bound: usize,
    pub accepted_window: usize,
    pub accepted_i: usize,
    pub accepted_t: i64,
}

/// The delta offset for every summation index i in 2..=n-1, as contiguous
/// segments, plus diagnostics of the window search that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSchedule {
    pub n: usize,
    pub base: i64,
    pub segments: Vec<Segment>,
    pub diagnostics: ScheduleDiagnostics,
}

impl DeltaSchedule {
    pub fn delta_for(&self, i: usize) -> i64 {
        let pos = self.segments.partition_point(|s| s.i_hi < i);
        let seg = &self.segments[pos];
        assert!(seg.i_lo <= i && i <= seg.i_hi, "i = {i} is outside the schedule");
        seg.delta
    }
}

/// Start offset v and width parameter w of window h (the window covers
/// i = v + 6h ..= v + 6h + w). Threshold table: v loses one for each of
/// the six early thresholds 9k + 7, then one per threshold 9f + c1 + 1
/// inside each later block [c1, c2); w drops from 5 to 4 at h = 6 mod 9,
/// shifted by 2k inside block k.
fn window_shape(h: usize, n: usize) -> (i64, usize) {
    let hi = h as i64;
    let mut v: i64 = 12;
    let mut w: usize = 5;
    if h < 58 && (hi - 6).rem_euclid(9) == 0 {
        w = 4;
    }
    for k in 0..6 {
        if hi >= 9 * k + 7 {
            v -= 1;
        }
    }
    let mut c2: i64 = 58;
    for k in 1..=(n / 20) {
        let (d, e) = if k % 2 == 1 { (52, 5) } else { (61, 6) };
        let c1 = c2;
        c2 = c1 + d;
        if hi < c1 {
            // every threshold of this and later blocks exceeds h
            break;
        }
        if hi < c2 && (hi - 6 + 2 * k as i64).rem_euclid(9) == 0 {
            w = 4;
        }
        for f in 0..=e {
            if hi > 9 * f + c1 {
                v -= 1;
            }
        }
    }
    (v, w)
}

/// Acceptance corrections r1, r2 for a candidate t: each grows to 2k once t
/// clears the block-k threshold, with block widths alternating 7 and 6.
fn r1_r2(t: i64, n: usize) -> (i64, i64) {
    let (mut r1, mut r2) = (0, 0);
    let (mut c1, mut c2) = (5i64, 6i64);
    if t > c1 {
        r1 = 2;
    }
    if t > c2 {
        r2 = 2;
    }
    for k in 2..=(n / 50) {
        let d = if k % 2 == 0 { 6 } else { 7 };
        c1 += d;
        c2 += d;
        if t > c1 {
            r1 = 2 * k as i64;
        }
        if t > c2 {
            r2 = 2 * k as i64;
        }
    }
    (r1, r2)
}

fn make_segment(n: usize, lo: i64, hi: i64, delta: i64) -> Segment {
    let conv = |v: i64| {
        usize::try_from(v)
            .unwrap_or_else(|_| panic!("window schedule for n = {n} produced index {v}"))
    };
    Segment {
        i_lo: conv(lo),
        i_hi: conv(hi),
        delta,
    }
}

/// Delta schedule for one n >= 13. Panics if the acceptance rule does not
/// fire exactly at i = n - 1 or the windows fail to tile 2..=n-1; both mean
/// the conjectural window constants have stopped matching the recurrence.
pub fn delta_schedule(n: usize) -> DeltaSchedule {
    assert!(n >= 13, "the windowed schedule starts at n = 13");
    let base = delta_base(n);
    let mut segments = vec![
        Segment { i_lo: 2, i_hi: 6, delta: base },
        Segment { i_lo: 7, i_hi: 11, delta: base - 1 },
    ];
    let window_bound = (n - 12) / 5 + 2;
    let t_bound = n / 15;
    let mut accepted = None;
    'windows: for h in 0..=window_bound {
        let (v, w) = window_shape(h, n);
        let lo = v + 6 * h as i64;
        let delta = base - 2 - h as i64;
        for p in 1..=(w as i64 + 1) {
            let i = lo + p - 1;
            let t = p + 6 * (h as i64 + 2) - n as i64;
            if t < 0 || t > t_bound as i64 || n as i64 <= 6 * (h as i64 + 2) - t {
                continue;
            }
            let (r1, r2) = r1_r2(t, n);
            let k = h as i64 + 2;
            if 9 * t - r2 <= k && k <= 9 * t + 8 - r1 {
                segments.push(make_segment(n, lo, i, delta));
                accepted = Some((h, i, t));
                break 'windows;
            }
        }
        segments.push(make_segment(n, lo, lo + w as i64, delta));
    }
    let Some((accepted_window, accepted_i, accepted_t)) = accepted else {
        panic!("window schedule for n = {n} did not close within {window_bound} windows");
    };
    for pair in segments.windows(2) {
        assert_eq!(
            pair[1].i_lo,
            pair[0].i_hi + 1,
            "window schedule for n = {n} is not contiguous"
        );
    }
    let last = segments.last().unwrap();
    assert_eq!(last.i_hi, n - 1, "window schedule for n = {n} closed at the wrong index");
    DeltaSchedule {
        n,
        base,
        segments,
        diagnostics: ScheduleDiagnostics {
            window_bound,
            t_bound,
            r_block_bound: n / 50,
            v_block_bound: n / 20,
            accepted_window,
            accepted_i: accepted_i as usize,
            accepted_t,
        },
    }
}

/// One term of the recurrence sum for some n: the subtrahend for history
/// index i = n - k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerRow {
    pub k: usize,
    pub delta: i64,
    pub coefficient: BigUint,
    pub z: BigUint,
    pub product: BigUint,
}

/// The full evaluation of the recurrence at one n: every term, the tuple
/// count j it is subtracted from, and the resulting z_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermLedger {
    pub n: usize,
    pub rows: Vec<LedgerRow>,
    pub j: BigUint,
    pub z_n: BigUint,
}

/// Evaluate the recurrence at n >= 13. `history` must hold z_2 ..= z_{n-1}.
///
/// Rows are ordered by ascending i (descending k). Coefficients are carried
/// incrementally along the rows: between consecutive rows the upper binomial
/// argument falls by 1 or 2 while k falls by 1, so
/// `C(a-1, k) = C(a, k+1) * (k+1) / a` and one more factor
/// `(a-1-k)/(a-1)` covers the two-step case. Both divisions are exact.
pub fn term_ledger(n: usize, history: &ZnSeries) -> Result<TermLedger, RecurrenceError> {
    assert!(n >= 13, "the recurrence starts at n = 13");
    for i in 2..n {
        if history.get(i).is_none() {
            return Err(RecurrenceError::MissingHistory { n, missing: i });
        }
    }
    let schedule = delta_schedule(n);
    let mut heads: Vec<(usize, i64, BigUint)> = Vec::with_capacity(n - 2);
    let mut prev: Option<(i64, BigUint)> = None;
    for seg in &schedule.segments {
        for i in seg.i_lo..=seg.i_hi {
            let k = n - i;
            let a = (3 * k as i64 + seg.delta).div_euclid(2);
            let coeff = match prev {
                None => coefficient(k, seg.delta),
                Some((pa, ref pc)) => {
                    if pc.is_zero() || a < k as i64 {
                        // once the argument gap a - k goes negative it never
                        // recovers: it is preserved by one-step transitions
                        // and shrinks by two-step ones
                        debug_assert!(a < k as i64);
                        BigUint::zero()
                    } else {
                        let fall = pa - a;
                        assert!(
                            fall == 1 || fall == 2,
                            "coefficient argument fell by {fall} at i = {i} for n = {n}"
                        );
                        let mut c = pc * (k as u64 + 1);
                        debug_assert!((&c % pa as u64).is_zero());
                        c /= pa as u64;
                        if fall == 2 {
                            c *= (pa - 1 - k as i64) as u64;
                            debug_assert!((&c % (pa - 1) as u64).is_zero());
                            c /= (pa - 1) as u64;
                        }
                        c
                    }
                }
            };
            debug_assert!(k > 64 || coeff == coefficient(k, seg.delta));
            prev = Some((a, coeff.clone()));
            heads.push((k, seg.delta, coeff));
        }
    }
    let rows: Vec<LedgerRow> = heads
        .into_par_iter()
        .map(|(k, delta, coefficient)| {
            let z = history.get(n - k).expect("history checked above").clone();
            let product = &coefficient * &z;
            LedgerRow { k, delta, coefficient, z, product }
        })
        .collect();
    let j = j_of(n);
    let mut sum = BigUint::zero();
    for row in &rows {
        sum += &row.product;
    }
    assert!(
        sum <= j,
        "recurrence terms for n = {n} exceed the tuple count; the window schedule is wrong here"
    );
    let z_n = &j - sum;
    assert!(!z_n.is_zero(), "recurrence gives z_{n} = 0, which contradicts growth");
    Ok(TermLedger { n, rows, j, z_n })
}

/// Extend the seed series with the recurrence up to `limit`.
pub fn zn_iterative(limit: usize) -> ZnSeries {
    assert!(limit >= 12, "the seeds already cover n <= 12");
    let mut series = ZnSeries::seeded();
    for n in 13..=limit {
        let ledger = term_ledger(n, &series).expect("series covers everything below n");
        series.insert(n, ledger.z_n, Provenance::Iterative);
    }
    series
}

/// The stopping-time distribution over all j_of(n) congruence solutions as
/// the recurrence predicts it, without enumerating anything: count
/// coefficient * z_i at sigma_i for i = 2..=n-1, and z_n at sigma_n.
/// `history` must hold z_2 ..= z_n.
pub fn predicted_distribution(
    n: usize,
    history: &ZnSeries,
) -> Result<DistributionRow, RecurrenceError> {
    assert!(n >= 13, "predictions use the recurrence, which starts at n = 13");
    let ledger = term_ledger(n, history)?;
    let z_n = match history.get(n) {
        Some(z) => {
            assert_eq!(
                z, &ledger.z_n,
                "history value for z_{n} disagrees with the recurrence"
            );
            z.clone()
        }
        None => return Err(RecurrenceError::MissingHistory { n, missing: n }),
    };
    let mut counts: BTreeMap<usize, BigUint> = ledger
        .rows
        .iter()
        .map(|row| (sigma_exponent(n - row.k).sigma_n, row.product.clone()))
        .collect();
    counts.insert(sigma_exponent(n).sigma_n, z_n);
    debug_assert_eq!(counts.len(), n - 1, "sigma exponents are distinct");
    let total: BigUint = counts.values().sum();
    assert_eq!(total, ledger.j, "distribution must exhaust the tuple count");
    Ok(DistributionRow { n, counts, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn coefficient_spot_values() {
        assert_eq!(coefficient(6, 0), big(84));
        assert_eq!(coefficient(1, -2), BigUint::zero());
        assert_eq!(coefficient(2, 1), big(3));
        assert_eq!(coefficient(0, -4), BigUint::zero());
        assert_eq!(coefficient(0, 0), BigUint::one());
    }

    #[test]
    fn coefficient_families_match_tabulated_values() {
        let families: [(i64, &[u64]); 5] = [
            (-2, &[0, 1, 1, 5, 6, 28, 36, 165, 220, 1001, 1365, 6188, 8568, 38760]),
            (-1, &[1, 1, 4, 5, 21, 28, 120, 165, 715, 1001, 4368, 6188, 27132]),
            (0, &[1, 3, 4, 15, 21, 84, 120, 495, 715, 3003, 4368, 18564, 27132]),
            (1, &[2, 3, 10, 15, 56, 84, 330, 495, 2002, 3003, 12376, 18564, 77520]),
            (2, &[2, 6, 10, 35, 56, 210, 330, 1287, 2002, 8008, 12376, 50388, 77520]),
        ];
        for (delta, want) in families {
            for (i, &w) in want.iter().enumerate() {
                let k = i + 1;
                assert_eq!(coefficient(k, delta), big(w), "k = {k}, delta = {delta}");
            }
        }
    }

    #[test]
    fn delta_base_spot_values() {
        assert_eq!(delta_base(12), -1);
        assert_eq!(delta_base(13), 0);
        assert_eq!(delta_base(14), 1);
        assert_eq!(delta_base(19), 2);
        assert_eq!(delta_base(100), 29);
    }

    #[test]
    fn schedule_for_13_is_two_blocks_and_one_window() {
        let s = delta_schedule(13);
        assert_eq!(s.base, 0);
        assert_eq!(
            s.segments,
            vec![
                Segment { i_lo: 2, i_hi: 6, delta: 0 },
                Segment { i_lo: 7, i_hi: 11, delta: -1 },
                Segment { i_lo: 12, i_hi: 12, delta: -2 },
            ]
        );
        assert_eq!(s.diagnostics.accepted_window, 0);
        assert_eq!(s.diagnostics.accepted_i, 12);
    }

    #[test]
    fn schedule_for_19_starts_at_plus_two() {
        let s = delta_schedule(19);
        assert_eq!(s.segments[0], Segment { i_lo: 2, i_hi: 6, delta: 2 });
        assert_eq!(s.segments[1], Segment { i_lo: 7, i_hi: 11, delta: 1 });
        assert_eq!(s.segments.last().unwrap().i_hi, 18);
    }

    #[test]
    fn schedule_shape_holds_over_a_range() {
        for n in [13usize, 14, 19, 40, 100, 137, 500, 1201] {
            let s = delta_schedule(n);
            assert_eq!(s.segments[0].delta, s.base);
            assert_eq!(s.segments[1].delta, s.base - 1);
            for (idx, seg) in s.segments.iter().enumerate().skip(2) {
                assert_eq!(seg.delta, s.base - (idx as i64), "n = {n}");
                let width = seg.i_hi - seg.i_lo + 1;
                if idx + 1 < s.segments.len() {
                    assert!(width == 5 || width == 6, "n = {n}, window {idx}");
                } else {
                    assert!(width <= 6, "n = {n} final window");
                }
            }
            assert_eq!(s.delta_for(2), s.base);
            assert_eq!(s.delta_for(n - 1), s.segments.last().unwrap().delta);
        }
    }

    #[test]
    fn ledger_for_13_reproduces_every_term() {
        let series = zn_iterative(12);
        let ledger = term_ledger(13, &series).unwrap();
        let want: [(usize, u64, u64); 11] = [
            (11, 4368, 1),
            (10, 3003, 2),
            (9, 715, 3),
            (8, 495, 7),
            (7, 120, 12),
            (6, 28, 30),
            (5, 21, 85),
            (4, 5, 173),
            (3, 4, 476),
            (2, 1, 961),
            (1, 0, 2652),
        ];
        assert_eq!(ledger.rows.len(), want.len());
        for (row, (k, coeff, z)) in ledger.rows.iter().zip(want) {
            assert_eq!(row.k, k);
            assert_eq!(row.coefficient, big(coeff), "k = {k}");
            assert_eq!(row.z, big(z), "k = {k}");
            assert_eq!(row.product, big(coeff * z), "k = {k}");
        }
        assert_eq!(ledger.j, big(31824));
        assert_eq!(ledger.z_n, big(8045));
    }

    #[test]
    fn ledger_for_16_head_row() {
        let series = zn_iterative(15);
        let ledger = term_ledger(16, &series).unwrap();
        assert_eq!(ledger.rows[0].k, 14);
        assert_eq!(ledger.rows[0].coefficient, big(116280));
        assert_eq!(ledger.rows[0].z, big(1));
        assert_eq!(ledger.z_n, big(108950));
    }

    #[test]
    fn ledger_requires_full_history() {
        let err = term_ledger(13, &ZnSeries::empty()).unwrap_err();
        assert_eq!(err, RecurrenceError::MissingHistory { n: 13, missing: 2 });

        let mut partial = ZnSeries::seeded();
        partial.insert(13, big(8045), Provenance::Iterative);
        let err = term_ledger(15, &partial).unwrap_err();
        assert_eq!(err, RecurrenceError::MissingHistory { n: 15, missing: 14 });
    }

    #[test]
    fn incremental_coefficients_match_direct_evaluation() {
        let series = zn_iterative(300);
        for n in (13..=300).step_by(7) {
            let ledger = term_ledger(n, &series).unwrap();
            for row in &ledger.rows {
                assert_eq!(
                    row.coefficient,
                    coefficient(row.k, row.delta),
                    "n = {n}, k = {}",
                    row.k
                );
            }
        }
    }

    #[test]
    fn iterative_series_matches_known_continuation() {
        let series = zn_iterative(19);
        let want: [(usize, u64); 7] = [
            (13, 8045),
            (14, 17637),
            (15, 51033),
            (16, 108950),
            (17, 312455),
            (18, 663535),
            (19, 1900470),
        ];
        for (n, z) in want {
            assert_eq!(series.get(n), Some(&big(z)), "n = {n}");
            assert_eq!(series.provenance(n), Some(Provenance::Iterative));
        }
    }

    #[test]
    fn iterative_series_regression_to_24() {
        // continuation of the verified prefix, frozen from the first run
        // that agreed with enumeration through n = 16
        let series = zn_iterative(24);
        let want: [(usize, u64); 5] = [
            (20, 5936673),
            (21, 13472296),
            (22, 39993895),
            (23, 87986917),
            (24, 257978502),
        ];
        for (n, z) in want {
            assert_eq!(series.get(n), Some(&big(z)), "n = {n}");
        }
    }

    #[test]
    fn limit_12_returns_the_seeds() {
        let series = zn_iterative(12);
        assert_eq!(series.len(), 12);
        assert_eq!(series.max_n(), Some(12));
        assert_eq!(series.get(12), Some(&big(2652)));
        assert_eq!(series.provenance(12), Some(Provenance::Initial));
        assert_eq!(series.get(13), None);
    }

    #[test]
    fn series_grows_from_n_6_onward() {
        let series = zn_iterative(300);
        for n in 6..300 {
            assert!(series.get(n + 1).unwrap() > series.get(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn predicted_distribution_for_13() {
        let series = zn_iterative(13);
        let row = predicted_distribution(13, &series).unwrap();
        assert_eq!(row.counts[&4], big(4368));
        assert_eq!(row.counts[&5], big(6006));
        assert_eq!(row.counts[&20], BigUint::zero());
        assert_eq!(row.counts[&21], big(8045));
        assert_eq!(row.total, big(31824));
        assert_eq!(row.counts.len(), 12);
    }

    #[test]
    fn predicted_distribution_for_14() {
        let series = zn_iterative(14);
        let row = predicted_distribution(14, &series).unwrap();
        assert_eq!(row.counts[&sigma_exponent(14).sigma_n], big(17637));
        assert_eq!(row.total, big(125970));
    }

    #[test]
    fn predicted_distribution_needs_z_n_itself() {
        let series = zn_iterative(12);
        let err = predicted_distribution(13, &series).unwrap_err();
        assert_eq!(err, RecurrenceError::MissingHistory { n: 13, missing: 13 });
    }
}
