//! Breakpoint schedules, the area-time cost model, and attacker utility.
//!
//! # Cost model
//!
//! Hashing up to running time `t_j` on a memory-hard function costs
//! `c_M * t_j^2` (the area-time product; the linear hashing term is dropped
//! as negligible). With breakpoints expressed relative to the first one,
//! `beta_j = t_j / t_1`, the cumulative cost of computing label `j` is
//! `unit_cost * beta_j^2` where `unit_cost = c_M * t_1^2`. The incremental
//! *round cost* of extending label `j-1` to label `j` is therefore
//! `unit_cost * (beta_j^2 - beta_{j-1}^2)` with `beta_0 = 0`.
//!
//! Two stock families:
//! - **cost-even**: `beta_j = sqrt(j)` — every round costs the same;
//! - **time-even**: `beta_j = j` — rounds get quadratically more expensive.
//!
//! The server draws the stored label index from `q`; its expected
//! verification workload `sum_j q_j * unit_cost * beta_j^2` must stay within
//! the budget `C_max`. *Tight* scaling picks `unit_cost` so the budget is
//! exactly met; `alpha = C_max / unit_cost` measures how much headroom the
//! first breakpoint leaves.
//!
//! # Checking sequences
//!
//! The attacker checks guesses in non-increasing probability order. A
//! strategy is encoded by a prefix length `ell` and per-password label caps
//! `tau_i`: password `i` has labels `1..=tau_i` computed, in order, before
//! moving to password `i+1`. This encoding structurally rules out wasted
//! work: labels are computed small-to-large per password and a password's
//! labels are never revisited once the attacker has moved on (re-deriving
//! them would cost the full prefix again).

use serde::Serialize;

use crate::corpus::PasswordDistribution;
use crate::{Error, FEAS_EPS, TIE_EPS};

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

/// Breakpoint placement family.
#[derive(Debug, Clone, PartialEq)]
pub enum BreakpointKind {
    /// `beta_j = sqrt(j)`: equal round costs.
    CostEven,
    /// `beta_j = j`: equally spaced running times.
    TimeEven,
    /// Caller-supplied `beta` values; must start at 1 and strictly increase.
    Custom(Vec<f64>),
}

impl BreakpointKind {
    fn betas(&self, m: usize) -> Result<Vec<f64>, Error> {
        match self {
            BreakpointKind::CostEven => Ok((1..=m).map(|j| (j as f64).sqrt()).collect()),
            BreakpointKind::TimeEven => Ok((1..=m).map(|j| j as f64).collect()),
            BreakpointKind::Custom(betas) => {
                if betas.len() != m {
                    return Err(Error::InvalidSchedule(format!(
                        "custom betas have length {}, expected m = {m}",
                        betas.len()
                    )));
                }
                Ok(betas.clone())
            }
        }
    }
}

/// How `unit_cost` is derived from the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// Scale so the expected verification workload equals `C_max` exactly.
    Tight,
    /// Use `unit_cost = C_max / alpha` for a caller-supplied `alpha`
    /// (the schedule must still fit the budget).
    FixedAlpha(f64),
}

/// A randomized halting schedule: breakpoints, halting distribution, and the
/// scaled cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointSchedule {
    m: usize,
    betas: Vec<f64>,
    q: Vec<f64>,
    unit_cost: f64,
    c_max: f64,
    alpha: f64,
    // Precomputed: q_prefix[j] = q_1 + … + q_j, round_costs[j-1], beta_sq[j-1].
    q_prefix: Vec<f64>,
    round_costs: Vec<f64>,
    beta_sq: Vec<f64>,
}

impl BreakpointSchedule {
    /// Builds a schedule.
    ///
    /// `q = None` means the uniform distribution over the `m` breakpoints.
    /// Validation enforces: `m >= 1`; betas starting at 1 and strictly
    /// increasing; `q` a probability vector of length `m`; and the expected
    /// workload `sum_j q_j * unit_cost * beta_j^2 <= c_max` (within 1e-9).
    pub fn new(
        kind: BreakpointKind,
        m: usize,
        q: Option<&[f64]>,
        c_max: f64,
        scaling: Scaling,
    ) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::InvalidSchedule("m must be at least 1".into()));
        }
        if !(c_max > 0.0) || !c_max.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "C_max = {c_max} must be positive"
            )));
        }
        let betas = kind.betas(m)?;
        if (betas[0] - 1.0).abs() > TIE_EPS {
            return Err(Error::InvalidSchedule(format!(
                "beta_1 = {} but breakpoints are measured relative to the first (beta_1 = 1)",
                betas[0]
            )));
        }
        for j in 1..m {
            if !(betas[j] > betas[j - 1]) || !betas[j].is_finite() {
                return Err(Error::InvalidSchedule(format!(
                    "betas must be strictly increasing (beta_{} = {}, beta_{} = {})",
                    j,
                    betas[j - 1],
                    j + 1,
                    betas[j]
                )));
            }
        }
        let q = match q {
            Some(q) => {
                if q.len() != m {
                    return Err(Error::InvalidSchedule(format!(
                        "q has length {}, expected m = {m}",
                        q.len()
                    )));
                }
                let sum: f64 = q.iter().sum();
                if (sum - 1.0).abs() > TIE_EPS {
                    return Err(Error::InvalidSchedule(format!(
                        "q sums to {sum}, expected 1"
                    )));
                }
                for (j, &qj) in q.iter().enumerate() {
                    if !(-TIE_EPS..=1.0 + TIE_EPS).contains(&qj) {
                        return Err(Error::InvalidSchedule(format!(
                            "q_{} = {qj} outside [0, 1]",
                            j + 1
                        )));
                    }
                }
                q.to_vec()
            }
            None => vec![1.0 / m as f64; m],
        };
        let expected_beta_sq: f64 = q.iter().zip(&betas).map(|(qj, b)| qj * b * b).sum();
        let alpha = match scaling {
            Scaling::Tight => expected_beta_sq,
            Scaling::FixedAlpha(alpha) => {
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidSchedule(format!(
                        "alpha = {alpha} must be positive"
                    )));
                }
                if expected_beta_sq > alpha + FEAS_EPS {
                    return Err(Error::InvalidSchedule(format!(
                        "expected workload {expected_beta_sq} * C_max/alpha exceeds C_max (alpha = {alpha})"
                    )));
                }
                alpha
            }
        };
        Ok(Self::assemble(m, betas, q, c_max, alpha))
    }

    /// Defender-side constructor: builds the schedule without the workload
    /// feasibility check, so infeasible candidate points can be *evaluated*
    /// and penalized rather than rejected.
    pub(crate) fn with_q_unchecked(betas: Vec<f64>, q: Vec<f64>, c_max: f64, alpha: f64) -> Self {
        Self::assemble(betas.len(), betas, q, c_max, alpha)
    }

    fn assemble(m: usize, betas: Vec<f64>, q: Vec<f64>, c_max: f64, alpha: f64) -> Self {
        let unit_cost = c_max / alpha;
        let beta_sq: Vec<f64> = betas.iter().map(|b| b * b).collect();
        let mut round_costs = Vec::with_capacity(m);
        let mut prev = 0.0;
        for &bsq in &beta_sq {
            round_costs.push(unit_cost * (bsq - prev));
            prev = bsq;
        }
        let mut q_prefix = Vec::with_capacity(m + 1);
        q_prefix.push(0.0);
        let mut acc = 0.0;
        for &qj in &q {
            acc += qj;
            q_prefix.push(acc);
        }
        BreakpointSchedule {
            m,
            betas,
            q,
            unit_cost,
            c_max,
            alpha,
            q_prefix,
            round_costs,
            beta_sq,
        }
    }

    /// Uniform cost-even schedule with a tight budget (`alpha = (m+1)/2`).
    pub fn cost_even_uniform(m: usize, c_max: f64) -> Result<Self, Error> {
        Self::new(BreakpointKind::CostEven, m, None, c_max, Scaling::Tight)
    }

    /// Uniform time-even schedule with a tight budget.
    pub fn time_even_uniform(m: usize, c_max: f64) -> Result<Self, Error> {
        Self::new(BreakpointKind::TimeEven, m, None, c_max, Scaling::Tight)
    }

    /// The degenerate `m = 1` schedule: hashing always runs to completion, so
    /// an incorrect guess always costs the attacker the full `C_max`.
    pub fn deterministic(c_max: f64) -> Result<Self, Error> {
        Self::new(BreakpointKind::TimeEven, 1, None, c_max, Scaling::Tight)
    }

    /// Number of breakpoints `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Relative breakpoints `beta_1..beta_m`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Halting distribution `q_1..q_m`.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `q_1 + … + q_j` for `j` in `0..=m`.
    pub fn q_prefix(&self, j: usize) -> f64 {
        self.q_prefix[j]
    }

    /// Cost of the first breakpoint, `c_M * t_1^2`.
    pub fn unit_cost(&self) -> f64 {
        self.unit_cost
    }

    /// Server budget `C_max`.
    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    /// Budget headroom `alpha = C_max / unit_cost`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Cumulative cost of computing labels `1..=j` (0 for `j = 0`).
    pub fn cumulative_cost(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.unit_cost * self.beta_sq[j - 1]
        }
    }

    /// Incremental cost of round `j` (label `j-1` to label `j`), 1-based.
    pub fn round_cost(&self, j: usize) -> f64 {
        self.round_costs[j - 1]
    }

    /// Expected verification workload `sum_j q_j * unit_cost * beta_j^2`.
    pub fn expected_workload(&self) -> f64 {
        self.q
            .iter()
            .zip(&self.beta_sq)
            .map(|(qj, bsq)| qj * self.unit_cost * bsq)
            .sum()
    }

    /// `true` if `q` is uniform within 1e-12.
    pub fn is_uniform(&self) -> bool {
        let target = 1.0 / self.m as f64;
        self.q.iter().all(|&qj| (qj - target).abs() <= TIE_EPS)
    }

    /// `true` if the breakpoints are cost-even (`beta_j = sqrt(j)`) within 1e-12.
    pub fn is_cost_even(&self) -> bool {
        self.betas
            .iter()
            .enumerate()
            .all(|(idx, &b)| (b - ((idx + 1) as f64).sqrt()).abs() <= TIE_EPS)
    }
}

// ---------------------------------------------------------------------------
// Game configuration
// ---------------------------------------------------------------------------

/// One game instance: password value, halting schedule, and guess distribution.
///
/// Immutable and `Copy`; safe to share across threads.
#[derive(Debug, Clone, Copy)]
pub struct GameConfig<'a> {
    /// Value of a cracked password, normalized by `C_max`.
    pub v: f64,
    pub schedule: &'a BreakpointSchedule,
    pub dist: &'a PasswordDistribution,
}

impl<'a> GameConfig<'a> {
    pub fn new(v: f64, schedule: &'a BreakpointSchedule, dist: &'a PasswordDistribution) -> Self {
        GameConfig { v, schedule, dist }
    }

    /// Number of passwords `n_p`.
    pub fn n_p(&self) -> usize {
        self.dist.len()
    }

    /// Number of breakpoints `m`.
    pub fn m(&self) -> usize {
        self.schedule.m()
    }
}

// ---------------------------------------------------------------------------
// Checking sequences
// ---------------------------------------------------------------------------

/// An attacker strategy: check passwords `1..=ell` in order, computing labels
/// `1..=tau_i` for password `i`.
///
/// `taus[i]` (0-based index, 1-based value) is the label cap for password
/// `i+1`. Executed instructions are ordered password-major: all of password
/// 1's labels, then password 2's, and so on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckingSequence {
    taus: Vec<usize>,
}

impl CheckingSequence {
    /// The empty sequence (check nothing).
    pub fn empty() -> Self {
        CheckingSequence { taus: Vec::new() }
    }

    /// Builds a sequence, validating every cap lies in `1..=m` and the prefix
    /// fits the distribution.
    pub fn new(taus: Vec<usize>, m: usize, n_p: usize) -> Result<Self, Error> {
        if taus.len() > n_p {
            return Err(Error::InvalidParameter(format!(
                "sequence checks {} passwords but the distribution has {n_p}",
                taus.len()
            )));
        }
        for (i, &tau) in taus.iter().enumerate() {
            if tau == 0 || tau > m {
                return Err(Error::InvalidParameter(format!(
                    "label cap tau_{} = {tau} outside 1..={m}",
                    i + 1
                )));
            }
        }
        Ok(CheckingSequence { taus })
    }

    pub(crate) fn from_taus(taus: Vec<usize>) -> Self {
        CheckingSequence { taus }
    }

    /// The full sequence over the first `n` passwords: every label of each.
    pub fn full(n: usize, m: usize) -> Self {
        CheckingSequence { taus: vec![m; n] }
    }

    /// Per-password label caps.
    pub fn taus(&self) -> &[usize] {
        &self.taus
    }

    /// Number of checked passwords `ell`.
    pub fn prefix_len(&self) -> usize {
        self.taus.len()
    }

    /// Total number of instructions (label computations).
    pub fn instruction_count(&self) -> usize {
        self.taus.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Set inclusion on executed instructions: every label this sequence
    /// computes is also computed by `other`.
    pub fn is_subset_of(&self, other: &CheckingSequence) -> bool {
        self.taus.len() <= other.taus.len()
            && self.taus.iter().zip(&other.taus).all(|(a, b)| a <= b)
    }
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// Probability that the attacker cracks a random account by running `seq` to
/// completion: `lambda = sum_i p_i * (q_1 + … + q_{tau_i})`.
pub fn success_rate(config: GameConfig, seq: &CheckingSequence) -> f64 {
    let schedule = config.schedule;
    // Fold from +0.0: the std float sum of an empty iterator is -0.0, which
    // would leak a negative zero into reports for the do-nothing response.
    seq.taus()
        .iter()
        .enumerate()
        .map(|(i, &tau)| config.dist.prob(i) * schedule.q_prefix(tau))
        .fold(0.0, |acc, term| acc + term)
}

/// Success probability after the first `budget` instructions of `seq`.
///
/// Errors if `budget` exceeds the number of instructions in `seq`.
pub fn success_rate_at(
    config: GameConfig,
    seq: &CheckingSequence,
    budget: usize,
) -> Result<f64, Error> {
    let total = seq.instruction_count();
    if budget > total {
        return Err(Error::BudgetOutOfRange { budget, len: total });
    }
    let schedule = config.schedule;
    let mut remaining = budget;
    let mut lambda = 0.0;
    for (i, &tau) in seq.taus().iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let here = tau.min(remaining);
        lambda += config.dist.prob(i) * schedule.q_prefix(here);
        remaining -= here;
    }
    Ok(lambda)
}

/// Expected attacker utility of running `seq` to completion:
/// `v * lambda(seq) - sum_k cost(k) * (1 - lambda before instruction k)`.
///
/// Every instruction's round cost is paid only if no earlier instruction
/// already cracked the account.
pub fn utility(config: GameConfig, seq: &CheckingSequence) -> f64 {
    let schedule = config.schedule;
    let mut lambda = 0.0;
    let mut total = 0.0;
    for (i, &tau) in seq.taus().iter().enumerate() {
        let p = config.dist.prob(i);
        for j in 1..=tau {
            let pr = p * schedule.q()[j - 1];
            total += config.v * pr - schedule.round_cost(j) * (1.0 - lambda);
            lambda += pr;
        }
    }
    total
}

/// How a bundle is attached to a base sequence by [`marginal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalMode {
    /// Append at the end of the sequence.
    Concat,
    /// Splice into the sequence at the bundle's natural position.
    Insert,
}

/// Marginal utility of adding the bundle `(password, labels lo..=hi)` to
/// `base` (1-based password index and labels).
///
/// - [`MarginalMode::Concat`]: the bundle must extend the last checked
///   password's labels contiguously or start a new password at
///   `prefix_len + 1` with label 1. The marginal of a single label `j` is
///   `p*q_j*v - (1 - lambda(base)) * round_cost(j)`.
/// - [`MarginalMode::Insert`]: the bundle must fill labels `tau_i+1..=hi` of
///   an already-checked password `i`. The inserted labels gain the future
///   round costs they may short-circuit and pay their own cost weighted by
///   the survivor mass before them.
///
/// Multi-label bundles are the iterated sum of single-label marginals, so
/// `utility(base + bundle) = utility(base) + marginal(...)` exactly.
/// An empty bundle (`hi < lo`) contributes 0.
pub fn marginal(
    config: GameConfig,
    base: &CheckingSequence,
    password: usize,
    lo: usize,
    hi: usize,
    mode: MarginalMode,
) -> Result<f64, Error> {
    if hi < lo {
        return Ok(0.0);
    }
    let m = config.m();
    let n_p = config.n_p();
    let ell = base.prefix_len();
    if password == 0 || password > n_p {
        return Err(Error::IncompatibleBundle(format!(
            "password index {password} outside 1..={n_p}"
        )));
    }
    if lo == 0 || hi > m {
        return Err(Error::IncompatibleBundle(format!(
            "labels {lo}..={hi} outside 1..={m}"
        )));
    }
    match mode {
        MarginalMode::Concat => {
            let ok = (password == ell + 1 && lo == 1)
                || (password == ell && ell > 0 && lo == base.taus()[ell - 1] + 1);
            if !ok {
                return Err(Error::IncompatibleBundle(format!(
                    "concat bundle (password {password}, labels {lo}..={hi}) does not extend a \
                     sequence of prefix length {ell}"
                )));
            }
            let lambda = success_rate(config, base);
            Ok(concat_marginal(config, lambda, password - 1, lo, hi))
        }
        MarginalMode::Insert => {
            if password > ell {
                return Err(Error::IncompatibleBundle(format!(
                    "insert bundle targets unchecked password {password} (prefix length {ell})"
                )));
            }
            let tau = base.taus()[password - 1];
            if lo != tau + 1 {
                return Err(Error::IncompatibleBundle(format!(
                    "insert bundle starts at label {lo} but password {password} has labels \
                     1..={tau} checked"
                )));
            }
            let schedule = config.schedule;
            let i = password - 1;
            // Probability mass executed before the insertion point, and round
            // costs of base instructions executed after it.
            let mut pre = 0.0;
            for i2 in 0..i {
                pre += config.dist.prob(i2) * schedule.q_prefix(base.taus()[i2]);
            }
            pre += config.dist.prob(i) * schedule.q_prefix(tau);
            let mut future_cost = 0.0;
            for i2 in (i + 1)..ell {
                future_cost += schedule.cumulative_cost(base.taus()[i2]);
            }
            Ok(insert_marginal(config, pre, future_cost, i, lo, hi))
        }
    }
}

/// Concat-marginal of labels `lo..=hi` of password `i` (0-based) appended to
/// a base whose success probability is `lambda`.
pub(crate) fn concat_marginal(
    config: GameConfig,
    lambda: f64,
    i: usize,
    lo: usize,
    hi: usize,
) -> f64 {
    let schedule = config.schedule;
    let p = config.dist.prob(i);
    let mut lam = lambda;
    let mut delta = 0.0;
    for j in lo..=hi {
        let pr = p * schedule.q()[j - 1];
        delta += config.v * pr - (1.0 - lam) * schedule.round_cost(j);
        lam += pr;
    }
    delta
}

/// Insert-marginal of labels `lo..=hi` of password `i` (0-based) spliced in
/// after probability mass `pre` has been executed, with `future_cost` worth
/// of base round costs still to come.
pub(crate) fn insert_marginal(
    config: GameConfig,
    pre: f64,
    future_cost: f64,
    i: usize,
    lo: usize,
    hi: usize,
) -> f64 {
    let schedule = config.schedule;
    let p = config.dist.prob(i);
    let mut pre = pre;
    let mut delta = 0.0;
    for j in lo..=hi {
        let pr = p * schedule.q()[j - 1];
        delta += pr * (config.v + future_cost) - (1.0 - pre) * schedule.round_cost(j);
        pre += pr;
    }
    delta
}

// ---------------------------------------------------------------------------
