//! Brute-force reference solver for small instances.
//!
//! [`enumerate_optimal`] walks *every* admissible checking sequence —
//! all prefix lengths `ell` in `0..=n_p`, all label caps in `{1..m}^ell` —
//! evaluates each one exactly, and returns the best. Nothing clever happens
//! here on purpose: the fast solvers in [`crate::attacker`] are tested
//! against this enumeration, so this module optimizes for being obviously
//! correct rather than fast.
//!
//! The search space has `sum_ell m^ell` points, so the solver refuses
//! instances beyond a small configurable limit instead of silently running
//! for hours.

use crate::attacker::{BestResponse, Certificate};
use crate::game::{success_rate, utility, CheckingSequence, GameConfig};
use crate::Error;

/// Upper bounds on the instance size [`enumerate_optimal`] will accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum number of passwords.
    pub max_n_p: usize,
    /// Maximum number of breakpoints.
    pub max_m: usize,
}

impl Default for OracleLimits {
    /// `n_p <= 10`, `m <= 3`: about 88k sequences, well under a millisecond.
    fn default() -> Self {
        OracleLimits {
            max_n_p: 10,
            max_m: 3,
        }
    }
}

/// `true` if `(u_new, seq_new)` should replace `(u_best, seq_best)`.
///
/// Higher utility wins. On an exact utility tie the cheaper sequence (fewer
/// instructions) wins; if still tied, the lexicographically smaller label-cap
/// vector wins, making the result independent of enumeration order.
pub(crate) fn improves(
    u_new: f64,
    seq_new: &CheckingSequence,
    u_best: f64,
    seq_best: &CheckingSequence,
) -> bool {
    if u_new != u_best {
        return u_new > u_best;
    }
    let (c_new, c_best) = (seq_new.instruction_count(), seq_best.instruction_count());
    if c_new != c_best {
        return c_new < c_best;
    }
    seq_new.taus() < seq_best.taus()
}

/// Finds the attacker's globally optimal checking sequence by exhaustive
/// enumeration.
///
/// Returns [`Error::InstanceTooLarge`] when the instance exceeds `limits`.
pub fn enumerate_optimal(config: GameConfig, limits: OracleLimits) -> Result<BestResponse, Error> {
    let n_p = config.n_p();
    let m = config.m();
    if n_p > limits.max_n_p || m > limits.max_m {
        return Err(Error::InstanceTooLarge(format!(
            "enumeration over n_p = {n_p}, m = {m} exceeds limits (n_p <= {}, m <= {})",
            limits.max_n_p, limits.max_m
        )));
    }

    let mut best_seq = CheckingSequence::empty();
    let mut best_u = 0.0;
    for ell in 1..=n_p {
        let mut taus = vec![1usize; ell];
        loop {
            let seq = CheckingSequence::from_taus(taus.clone());
            let u = utility(config, &seq);
            if improves(u, &seq, best_u, &best_seq) {
                best_seq = seq;
                best_u = u;
            }
            // Odometer step: bump the rightmost cap below m, reset the tail.
            let mut pos = ell;
            while pos > 0 && taus[pos - 1] == m {
                taus[pos - 1] = 1;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            taus[pos - 1] += 1;
        }
    }

    let lambda = success_rate(config, &best_seq);
    Ok(BestResponse {
        seq: best_seq,
        utility: best_u,
        success_rate: lambda,
        certificate: Certificate::GlobalExact,
        i_max: None,
    })
}

// ---------------------------------------------------------------------------
