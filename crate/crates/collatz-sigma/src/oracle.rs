//! Independent ground truth for the enumeration and the recurrence: a
//! direct scan over all residues modulo 2^{sigma_n}, OEIS b-file ingestion,
//! and a three-way (plus b-file) cross-check report.
//!
//! The scan shares no code with the tuple pipeline: it steps the map in
//! plain machine arithmetic and measures every residue class by a
//! representative, so an agreement between the two routes checks the
//! mathematics, not one implementation against itself.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::collatz::sigma_exponent;
use crate::dioph::zn_by_enumeration;
use crate::recurrence::zn_iterative;
use crate::tuples::j_of;

/// Cap on scan size: scans run over 2^bits residues with bits <= max_bits.
/// The default keeps a full scan in the minutes range on desk hardware.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanBudget {
    pub max_bits: usize,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget { max_bits: 26 }
    }
}

impl ScanBudget {
    pub fn bits(max_bits: usize) -> Self {
        ScanBudget { max_bits }
    }
}

/// Tuple-count cap for the enumeration leg of cross_check.
pub const DEFAULT_TUPLE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("scan over 2^{bits} residues exceeds the budget of 2^{max_bits}")]
    BudgetExceeded { bits: usize, max_bits: usize },
}

/// Stopping time in machine arithmetic, capped; None when no step drops
/// below the start within cap steps.
fn stop_time_u64(start: u64, cap: usize) -> Option<usize> {
    debug_assert!(start >= 2);
    let mut x = start;
    for k in 1..=cap {
        x = if x.is_multiple_of(2) {
            x / 2
        } else {
            // (3x + 1) / 2, kept overflow-checked: a budget large enough to
            // overflow u64 must fail loudly, not wrap
            x.checked_add(x.div_ceil(2))
                .expect("orbit exceeded u64; lower the scan budget")
        };
        if x < start {
            return Some(k);
        }
    }
    None
}

/// The stopping time of the class x mod 2^sigma, measured on the smallest
/// member that has one: x itself, or x + 2^sigma for x <= 1 (0 has stopping
/// time only as a class of larger even numbers, 1 has none at all).
fn class_stop_time(x: u64, modulus: u64, cap: usize) -> Option<usize> {
    let rep = if x <= 1 { x + modulus } else { x };
    stop_time_u64(rep, cap)
}

/// z_n by exhaustive scan: count the residues modulo 2^{sigma_n} whose class
/// stopping time is exactly sigma_n.
pub fn brute_force_zn(n: usize, budget: ScanBudget) -> Result<BigUint, OracleError> {
    assert!(n >= 1, "z_n starts at n = 1");
    let sigma = sigma_exponent(n).sigma_n;
    if sigma > budget.max_bits {
        return Err(OracleError::BudgetExceeded {
            bits: sigma,
            max_bits: budget.max_bits,
        });
    }
    let modulus = 1u64 << sigma;
    let count = (0..modulus)
        .into_par_iter()
        .filter(|&x| class_stop_time(x, modulus, sigma) == Some(sigma))
        .count();
    Ok(BigUint::from(count))
}

/// All residues x < 2^sigma whose class stopping time is exactly sigma,
/// ascending. `modulus` must equal 2^sigma; it is part of the call shape
/// because the result only means anything relative to it.
pub fn brute_force_residues(
    sigma: usize,
    modulus: &BigUint,
    budget: ScanBudget,
) -> Result<Vec<BigUint>, OracleError> {
    assert!(sigma >= 1, "stopping times start at 1");
    assert_eq!(
        *modulus,
        BigUint::one() << sigma,
        "modulus must be 2^sigma"
    );
    if sigma > budget.max_bits {
        return Err(OracleError::BudgetExceeded {
            bits: sigma,
            max_bits: budget.max_bits,
        });
    }
    let m = 1u64 << sigma;
    let mut members: Vec<u64> = (0..m)
        .into_par_iter()
        .filter(|&x| class_stop_time(x, m, sigma) == Some(sigma))
        .collect();
    members.sort_unstable();
    Ok(members.into_iter().map(BigUint::from).collect())
}

/// One line of an OEIS b-file: "index value".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BFileEntry {
    pub index: i64,
    pub value: BigInt,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BFileError {
    #[error("line {line}: not an \"index value\" pair: {content:?}")]
    MalformedLine { line: usize, content: String },
    #[error("line {line}: index {index} does not increase over {previous}")]
    NonMonotonicIndex { line: usize, index: i64, previous: i64 },
}

/// Parse OEIS b-file content: '#' comments and blank lines are skipped,
/// data lines are whitespace-separated "index value" pairs with strictly
/// increasing indices. Line numbers in errors are 1-based.
pub fn parse_bfile(text: &str) -> Result<Vec<BFileEntry>, BFileError> {
    let mut entries: Vec<BFileEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = || BFileError::MalformedLine {
            line,
            content: raw.to_string(),
        };
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(malformed());
        };
        let index: i64 = a.parse().map_err(|_| malformed())?;
        let value: BigInt = b.parse().map_err(|_| malformed())?;
        if let Some(prev) = entries.last() {
            if index <= prev.index {
                return Err(BFileError::NonMonotonicIndex {
                    line,
                    index,
                    previous: prev.index,
                });
            }
        }
        entries.push(BFileEntry { index, value });
    }
    Ok(entries)
}

/// All values obtained for one n and whether they agree. Absent legs carry
/// a note saying why they were skipped; a disagreement is never silent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheckRow {
    pub n: usize,
    pub brute_force: Option<BigUint>,
    pub enumerated: Option<BigUint>,
    pub iterative: Option<BigUint>,
    pub bfile: Option<BigInt>,
    pub agree: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub n_lo: usize,
    pub n_hi: usize,
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|row| row.agree)
    }
}

/// Compute z_n for every n in n_lo..=n_hi by every route that fits its
/// budget; compare against `bfile` entries where present. Skips are
/// recorded in the row notes. The iterative route always runs: below n = 13
/// it reports the seed values.
pub fn cross_check(
    n_lo: usize,
    n_hi: usize,
    bfile: Option<&[BFileEntry]>,
    scan: ScanBudget,
    tuple_budget: u64,
) -> CrossCheckReport {
    assert!(n_lo >= 1 && n_lo <= n_hi, "need 1 <= n_lo <= n_hi");
    let series = zn_iterative(n_hi.max(12));
    let rows = (n_lo..=n_hi)
        .map(|n| {
            let mut notes = Vec::new();
            let iterative = Some(series.get(n).expect("series covers the range").clone());
            let brute_force = match brute_force_zn(n, scan) {
                Ok(z) => Some(z),
                Err(OracleError::BudgetExceeded { bits, max_bits }) => {
                    notes.push(format!(
                        "brute force skipped: needs a 2^{bits} scan, budget is 2^{max_bits}"
                    ));
                    None
                }
            };
            let enumerated = if n < 4 {
                notes.push("enumeration skipped: tuple patterns cover n >= 4 only".to_string());
                None
            } else {
                let j = j_of(n);
                if j <= BigUint::from(tuple_budget) {
                    Some(zn_by_enumeration(n))
                } else {
                    notes.push(format!(
                        "enumeration skipped: {j} tuples exceed the budget of {tuple_budget}"
                    ));
                    None
                }
            };
            let bfile_value = bfile
                .and_then(|entries| entries.iter().find(|e| e.index == n as i64))
                .map(|e| e.value.clone());
            let present: Vec<BigInt> = [&brute_force, &enumerated, &iterative]
                .into_iter()
                .flatten()
                .map(|z| BigInt::from(z.clone()))
                .chain(bfile_value.clone())
                .collect();
            let agree = present.windows(2).all(|pair| pair[0] == pair[1]);
            CrossCheckRow {
                n,
                brute_force,
                enumerated,
                iterative,
                bfile: bfile_value,
                agree,
                notes,
            }
        })
        .collect();
    CrossCheckReport { n_lo, n_hi, rows }
}
