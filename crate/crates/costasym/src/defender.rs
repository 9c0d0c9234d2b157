//! Defender-side optimization: choosing the halting distribution that
//! minimizes the rational attacker's success rate.
//!
//! The defender fixes the breakpoints `beta_1..beta_m`, the budget `c_max`,
//! and the cost scale `alpha`, then searches over halting distributions `q`.
//! Because `q` must sum to one, only `q_2..q_m` are free variables; `q_1`
//! follows. Two constraints bound the search: the expected verification
//! workload must fit the budget, and the free variables must leave room for
//! `q_1 >= 0`. Both are enforced by penalty terms rather than rejection so a
//! derivative-free optimizer can roam freely, and the minimizer itself is a
//! small, fully seeded differential-evolution loop — no external solver, and
//! identical seeds give identical results.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attacker::best_response;
use crate::corpus::PasswordDistribution;
use crate::game::{BreakpointSchedule, GameConfig};
use crate::oracle::{enumerate_optimal, OracleLimits};
use crate::{Error, FEAS_EPS, TIE_EPS};

/// Differential weight `F` of the rand/1 mutation.
const DE_WEIGHT: f64 = 0.7;
/// Crossover rate `CR` of the binomial recombination.
const DE_CROSSOVER: f64 = 0.9;
/// Population members per free dimension.
const POP_PER_DIM: usize = 8;

/// One instance of the defender's distribution-selection problem.
#[derive(Debug, Clone)]
pub struct DistributionProblem<'a> {
    /// Attacker's value per cracked account.
    pub v: f64,
    /// Fixed breakpoints (`betas[0] = 1`, strictly increasing).
    pub betas: Vec<f64>,
    /// Workload ceiling per verification.
    pub c_max: f64,
    /// Cost scale `c_max / (c_m * t_1^2)`; the workload constraint reads
    /// `sum_j q_j beta_j^2 <= alpha`.
    pub alpha: f64,
    /// Password distribution the attacker plays against.
    pub dist: &'a PasswordDistribution,
    /// Penalty constants `(cons_1, cons_2, cons_3, cons_4)`, each `> 1`:
    /// the workload penalty is `cons_1 + cons_2 * excess-sum`, the
    /// probability penalty `cons_3 + cons_4 * mass-sum`.
    pub cons: (f64, f64, f64, f64),
    /// Total objective evaluations the optimizer may spend.
    pub budget: usize,
    /// Seed for the optimizer's random stream.
    pub seed: u64,
}

impl<'a> DistributionProblem<'a> {
    /// Builds a problem with the default penalty constants `(2, 10, 2, 10)`.
    pub fn new(
        v: f64,
        betas: Vec<f64>,
        c_max: f64,
        alpha: f64,
        dist: &'a PasswordDistribution,
        budget: usize,
        seed: u64,
    ) -> Result<Self, Error> {
        let problem = DistributionProblem {
            v,
            betas,
            c_max,
            alpha,
            dist,
            cons: (2.0, 10.0, 2.0, 10.0),
            budget,
            seed,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Replaces the penalty constants; each must exceed 1 so that any
    /// constraint violation outweighs the whole success-rate range.
    pub fn with_cons(mut self, cons: (f64, f64, f64, f64)) -> Result<Self, Error> {
        self.cons = cons;
        self.validate()?;
        Ok(self)
    }

    fn m(&self) -> usize {
        self.betas.len()
    }

    fn validate(&self) -> Result<(), Error> {
        if !self.v.is_finite() || self.v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "password value v = {} must be finite and non-negative",
                self.v
            )));
        }
        if self.betas.is_empty() {
            return Err(Error::InvalidParameter("betas must be non-empty".into()));
        }
        if (self.betas[0] - 1.0).abs() > TIE_EPS {
            return Err(Error::InvalidParameter(format!(
                "beta_1 = {} but breakpoints are measured relative to the first",
                self.betas[0]
            )));
        }
        for w in self.betas.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "betas must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if !(self.c_max > 0.0) || !self.c_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "c_max = {} must be positive",
                self.c_max
            )));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} must be at least 1 (beta_1 = 1 alone needs it)",
                self.alpha
            )));
        }
        let (c1, c2, c3, c4) = self.cons;
        for c in [c1, c2, c3, c4] {
            if !(c > 1.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "penalty constants must each exceed 1, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// Per-dimension upper bounds for `q_2..q_m`: a single breakpoint must
    /// not blow the workload budget on its own, nor exceed probability 1.
    fn box_upper(&self) -> Vec<f64> {
        self.betas[1..]
            .iter()
            .map(|b| ((self.alpha - 1.0) / (b * b - 1.0)).min(1.0).max(0.0))
            .collect()
    }
}

/// Outcome of [`optimize_distribution`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionResult {
    /// The selected halting distribution (full vector, `q_1` included).
    pub q_star: Vec<f64>,
    /// Best-response success rate against `q_star`, re-evaluated
    /// independently of the optimizer's fitness values.
    pub attacker_success: f64,
    /// Defender utility: the negated success rate.
    pub defender_utility: f64,
    /// Whether `q_star` satisfies both constraints (penalties zero). When
    /// `false`, no evaluated point was feasible and `q_star` is merely the
    /// best penalized point.
    pub feasible: bool,
    /// Objective evaluations actually spent.
    pub evaluations_used: usize,
}

/// Penalty terms at a free-variable point, and whether the point is feasible.
fn penalties(problem: &DistributionProblem, free_vars: &[f64]) -> (f64, bool) {
    let (c1, c2, c3, c4) = problem.cons;
    let workload: f64 = free_vars
        .iter()
        .zip(&problem.betas[1..])
        .map(|(&q, b)| q * (b * b - 1.0))
        .sum();
    let mass: f64 = free_vars.iter().sum();
    let mut value = 0.0;
    if workload > problem.alpha - 1.0 + FEAS_EPS {
        value += c1 + c2 * workload;
    }
    if mass > 1.0 + FEAS_EPS {
        value += c3 + c4 * mass;
    }
    (value, value == 0.0)
}

/// Assembles the full halting distribution from the free variables:
/// `q_1 = 1 - sum(free)`, clamped at zero and renormalized when the free
/// mass overshoots (the penalty, not the clamp, is what punishes that).
fn assemble_q(free_vars: &[f64]) -> Vec<f64> {
    let mass: f64 = free_vars.iter().sum();
    let mut q = Vec::with_capacity(free_vars.len() + 1);
    q.push((1.0 - mass).max(0.0));
    q.extend_from_slice(free_vars);
    let total: f64 = q.iter().sum();
    if total > 0.0 && (total - 1.0).abs() > TIE_EPS {
        for x in &mut q {
            *x /= total;
        }
    }
    q
}

/// The defender's objective at a free-variable point: the attacker's
/// best-response success rate plus penalty terms for constraint violations.
///
/// Infeasible points are evaluated and penalized, never rejected — a
/// derivative-free search needs a finite value everywhere. The success rate
/// is computed against the assembled distribution (renormalized when the
/// free mass overshoots 1); the penalties are computed from the raw free
/// variables. Lower is better for the defender.
pub fn penalized_objective(problem: &DistributionProblem, free_vars: &[f64]) -> f64 {
    let (penalty, _) = penalties(problem, free_vars);
    let q = assemble_q(free_vars);
    let schedule = BreakpointSchedule::with_q_unchecked(
        problem.betas.clone(),
        q,
        problem.c_max,
        problem.alpha,
    );
    let config = GameConfig::new(problem.v, &schedule, problem.dist);
    // A solver failure yields the worst possible fitness instead of an
    // error: the optimizer contract is total. Persistent failures resurface
    // through the final re-evaluation in `optimize_distribution`.
    let lambda = match best_response(config) {
        Ok(resp) => resp.success_rate,
        Err(_) => 1.0,
    };
    penalty + lambda
}

/// Re-evaluates a finished distribution with the strongest solver available:
/// exhaustive enumeration when the instance is small enough, the certified
/// best-response dispatcher otherwise.
fn independent_success_rate(problem: &DistributionProblem, q: &[f64]) -> Result<f64, Error> {
    let schedule = BreakpointSchedule::with_q_unchecked(
        problem.betas.clone(),
        q.to_vec(),
        problem.c_max,
        problem.alpha,
    );
    let config = GameConfig::new(problem.v, &schedule, problem.dist);
    let limits = OracleLimits::default();
    if problem.dist.len() <= limits.max_n_p && problem.m() <= limits.max_m {
        Ok(enumerate_optimal(config, limits)?.success_rate)
    } else {
        Ok(best_response(config)?.success_rate)
    }
}

/// Minimizes [`penalized_objective`] with a seeded differential-evolution
/// loop (rand/1/bin, `F = 0.7`, `CR = 0.9`, population `8 * (m-1)`).
///
/// The uniform distribution is always injected into the initial population,
/// so the result can never be worse than uniform; selection keeps the better
/// of target and trial, making the best fitness non-increasing. Free
/// variables live in per-dimension boxes `[0, min(1, (alpha-1)/(beta^2-1))]`.
/// The returned distribution is re-evaluated independently (exhaustively on
/// small instances) rather than trusting the fitness stream.
///
/// Errors with [`Error::BudgetOutOfRange`] when the evaluation budget cannot
/// even initialize the population.
///
/// # Examples
/// ```
/// use costasym::{optimize_distribution, penalized_objective, DistributionProblem, PasswordDistribution};
/// let dist = PasswordDistribution::from_probs(vec![0.5, 0.5])?;
/// let betas = vec![1.0, 2.0_f64.sqrt()];
/// let problem = DistributionProblem::new(1.45, betas, 1.0, 1.5, &dist, 64, 7)?;
/// let result = optimize_distribution(&problem)?;
/// let uniform = penalized_objective(&problem, &[0.5]);
/// assert!(result.attacker_success <= uniform + 1e-9);
/// assert!(result.feasible);
/// # Ok::<(), costasym::Error>(())
/// ```
pub fn optimize_distribution(problem: &DistributionProblem) -> Result<DistributionResult, Error> {
    problem.validate()?;
    let m = problem.m();
    let dim = m - 1;

    if dim == 0 {
        // A single breakpoint leaves nothing to optimize: q = (1).
        let q_star = vec![1.0];
        let success = independent_success_rate(problem, &q_star)?;
        return Ok(DistributionResult {
            q_star,
            attacker_success: success,
            defender_utility: 0.0 - success, // 0.0 - x: keep a zero rate from negating to -0.0
            feasible: true,
            evaluations_used: 1,
        });
    }

    let pop_size = POP_PER_DIM * dim;
    if problem.budget < pop_size {
        return Err(Error::BudgetOutOfRange {
            budget: problem.budget,
            len: pop_size,
        });
    }

    let upper = problem.box_upper();
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);

    let mut population: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
    population.push(vec![1.0 / m as f64; dim]);
    for _ in 1..pop_size {
        let member: Vec<f64> = upper.iter().map(|&hi| rng.gen::<f64>() * hi).collect();
        population.push(member);
    }
    let mut fitness: Vec<f64> = population
        .iter()
        .map(|x| penalized_objective(problem, x))
        .collect();
    let mut evals = pop_size;

    let mut best_idx = 0;
    for i in 1..pop_size {
        if fitness[i] < fitness[best_idx] {
            best_idx = i;
        }
    }
    let mut best_x = population[best_idx].clone();
    let mut best_f = fitness[best_idx];

    while evals < problem.budget {
        for i in 0..pop_size {
            if evals >= problem.budget {
                break;
            }
            let mut distinct = [i; 3];
            for slot in 0..3 {
                loop {
                    let r = rng.gen_range(0..pop_size);
                    if r != i && !distinct[..slot].contains(&r) {
                        distinct[slot] = r;
                        break;
                    }
                }
            }
            let [r1, r2, r3] = distinct;
            let j_rand = rng.gen_range(0..dim);
            let mut trial = population[i].clone();
            for d in 0..dim {
                let crossed = rng.gen::<f64>() < DE_CROSSOVER;
                if crossed || d == j_rand {
                    let mutant =
                        population[r1][d] + DE_WEIGHT * (population[r2][d] - population[r3][d]);
                    trial[d] = mutant.clamp(0.0, upper[d]);
                }
            }
            let f_trial = penalized_objective(problem, &trial);
            evals += 1;
            if f_trial <= fitness[i] {
                population[i] = trial;
                fitness[i] = f_trial;
                if f_trial < best_f {
                    best_f = f_trial;
                    best_x = population[i].clone();
                }
            }
        }
    }

    let (_, feasible) = penalties(problem, &best_x);
    let q_star = assemble_q(&best_x);
    let success = independent_success_rate(problem, &q_star)?;
    Ok(DistributionResult {
        q_star,
        attacker_success: success,
        defender_utility: 0.0 - success, // 0.0 - x: keep a zero rate from negating to -0.0
        feasible,
        evaluations_used: evals,
    })
}

// ---------------------------------------------------------------------------
