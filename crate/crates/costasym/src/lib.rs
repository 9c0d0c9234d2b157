//! Analysis toolkit for randomized halting breakpoints in memory-hard
//! password hashing.
//!
//! An authentication server that stores a memory-hard hash of each password
//! can randomize *where* it stops hashing: at registration it samples a
//! breakpoint from a distribution `q` over `m` running times and stores the
//! hash label produced at that point. Verification replays the label stream
//! until it hits the stored label. A rational offline attacker who steals the
//! record must decide, for every password guess, how many labels to compute
//! before moving on. This crate models both sides of that game:
//!
//! - [`corpus`] — empirical password distributions in equivalence-set form,
//!   synthetic Zipf corpora, and tail-confidence annotation.
//! - [`game`] — breakpoint schedules, the area-time cost model, attacker
//!   utility, and marginal-utility kernels.
//! - [`attacker`] — best-response search: greedy concatenation and insertion
//!   local search, a one-sided optimality certificate, and an exact
//!   polynomial-time search for two-peak breakpoint distributions.
//! - [`oracle`] — exhaustive enumeration of every checking sequence, used as
//!   ground truth on small instances.
//! - [`defender`] — penalized objective and a seeded differential-evolution
//!   optimizer over breakpoint distributions.
//! - [`authsim`] — a mock server-side simulation measuring authentication
//!   workload and the cost asymmetry between correct and incorrect logins.
//! - [`experiment`] — sweep/optimize runners and deterministic CSV/JSON
//!   report emission backing the `costasym` command-line tool.
//!
//! Monetary quantities are normalized so that the server's expected hashing
//! budget is `C_max = 1`; password values are always interpreted as
//! `v / C_max`.

use thiserror::Error;

pub mod attacker;
pub mod authsim;
pub mod corpus;
pub mod defender;
pub mod experiment;
pub mod game;
pub mod oracle;

#[cfg(doctest)]
mod book;

pub use attacker::{
    best_response, deterministic_best_response, extend, extend_by_concat, extend_by_insert,
    find_good, find_peaks, max_prefix_index, optimality_test, BestResponse, Certificate, MaxPrefix,
    OtOutcome,
};
pub use corpus::{
    confidence_regions, gen_zipf, ConfidenceAnnotation, ConfidenceRegion, CorpusFormat,
    EquivalenceEntry, EquivalenceSets, PasswordDistribution,
};
pub use defender::{
    optimize_distribution, penalized_objective, DistributionProblem, DistributionResult,
};
pub use game::{
    marginal, success_rate, success_rate_at, utility, BreakpointKind, BreakpointSchedule,
    CheckingSequence, GameConfig, MarginalMode, Scaling,
};
pub use oracle::{enumerate_optimal, OracleLimits};

/// Errors produced by parsing, model construction, and search.
#[derive(Debug, Error)]
pub enum Error {
    /// A corpus line could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The corpus contained no entries.
    #[error("empty corpus")]
    EmptyCorpus,

    /// A caller-supplied parameter was out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A schedule violated its structural or budget constraints.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// A bundle cannot legally extend the given checking sequence.
    #[error("incompatible bundle: {0}")]
    IncompatibleBundle(String),

    /// An instruction budget exceeded the sequence length.
    #[error("budget {budget} exceeds sequence length {len}")]
    BudgetOutOfRange { budget: usize, len: usize },

    /// The instance is too large for exhaustive enumeration.
    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    /// A search loop failed to reach a fixed point within its pass cap.
    #[error("search did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// `true` for defects that indicate an internal invariant violation
    /// rather than bad input; the CLI maps these to exit code 2.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::NonConvergence(_))
    }
}

/// Absolute tolerance used to break ties in favor of checking: a move whose
/// marginal utility is at least `-TIE_EPS` is treated as non-negative.
pub(crate) const TIE_EPS: f64 = 1e-12;

/// Absolute slack allowed when validating budget-style inequalities.
pub(crate) const FEAS_EPS: f64 = 1e-9;
