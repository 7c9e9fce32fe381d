//! Stopping times of the shortcut Collatz map `T(x) = x/2` (even) / `(3x+1)/2` (odd).
//!
//! The pipeline, bottom to top:
//!
//! * [`collatz`]: the map itself, trajectories, stopping times sigma(s), the exact
//!   exponents sigma_n (smallest k with `2^k > 3^n`), parity words, and the closed-form
//!   term formula for `T^{sigma_n}(s)`.
//! * [`tuples`]: the admissible parity patterns as binary tuples (m zeros, n-2 ones,
//!   prefixed by two ones), streamed in lexicographic order with combinatorial unranking.
//! * [`dioph`]: for each tuple the unique solution `0 < x < 2^{sigma_n}` of the linear
//!   congruence `3^n x + S ≡ 0 (mod 2^{sigma_n})`, stopping-time classification of the
//!   solutions, and the residue classes realizing sigma_n (their count is z_n).
//! * [`recurrence`]: the iterative algorithm generating z_n from twelve seeds via
//!   binomial-weighted sums of earlier values, with term ledgers and predicted
//!   stopping-time distributions.
//! * [`oracle`]: independent ground truth by direct residue scans, OEIS b-file
//!   ingestion, and three-way cross-checks.
//!
//! z_n is OEIS A100982; the sigma_n values are A020914.

pub mod collatz;
pub mod dioph;
pub mod oracle;
pub mod recurrence;
pub mod tuples;

pub use collatz::{
    parity_word, sigma_exponent, step, stopping_time, stopping_time_result, term_formula_value,
    trajectory, CollatzError, ParityWord, SigmaExponent, StoppingTime, StoppingTimeResult,
    Trajectory,
};
pub use dioph::{
    classify, residue_classes, solution_stream, solve_unique, zn_by_enumeration, DistributionRow,
    ResidueClassSet, SolutionRecord, SolutionStream,
};
pub use oracle::{
    brute_force_residues, brute_force_zn, cross_check, parse_bfile, BFileEntry, BFileError,
    CrossCheckReport, CrossCheckRow, OracleError, ScanBudget, DEFAULT_TUPLE_BUDGET,
};
pub use recurrence::{
    coefficient, delta_base, delta_schedule, predicted_distribution, term_ledger, zn_iterative,
    DeltaSchedule, LedgerRow, Provenance, RecurrenceError, ScheduleDiagnostics, Segment,
    TermLedger, ZnSeries, SEED_VALUES,
};
pub use tuples::{
    alpha_vector, b_from_a, initial_a_tuple, j_of, m_of, next_permutation, tuple_stream,
    unrank_a_tuple, ATuple, AlphaVector, BTuple, TupleError, TupleStream,
};
