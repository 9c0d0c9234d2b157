//! Attacker-side solvers for the best-response problem.
//!
//! Given a [`GameConfig`] — a halting schedule, a password distribution, and a
//! password value `v` — the attacker picks a checking sequence maximizing
//! expected utility. The strategy space is exponential, so this module layers
//! three answer qualities:
//!
//! 1. **Local search** ([`extend`]): alternate a greedy append pass
//!    ([`extend_by_concat`]) with a deepening pass ([`extend_by_insert`])
//!    until a fixed point. Linear in `n_p * m`, but only locally optimal.
//! 2. **Certification** ([`optimality_test`]): a sound one-sided check that
//!    can prove a locally optimal sequence is globally optimal. A `Pass` is
//!    conclusive; a `Fail` is not (the true optimum may still be the local
//!    one).
//! 3. **Exact special cases**: equal-round-cost schedules admit exact
//!    polynomial solvers — a prefix scan when the halting distribution has a
//!    single peak, and a candidate walk ([`find_good`]) when it has exactly
//!    two peaks and `m <= 3`.
//!
//! [`best_response`] dispatches between these tiers and labels its result
//! with a [`Certificate`] stating which guarantee applies. The exhaustive
//! reference solver for small instances lives in [`crate::oracle`].

use std::fmt;

use serde::Serialize;

use crate::corpus::PasswordDistribution;
use crate::game::{success_rate, utility, BreakpointSchedule, CheckingSequence, GameConfig};
use crate::{Error, TIE_EPS};

/// Utility a truncation is allowed to sacrifice: a trailing run of passwords
/// whose accumulated gain is below this is dropped so that prefix lengths
/// land on equivalence-set ends instead of floating-point dust.
const ZERO_GAIN_EPS: f64 = 1e-9;

/// Cap on append/deepen alternations in [`extend`]. Each round strictly grows
/// the instruction set, so hitting the cap indicates an arithmetic defect
/// rather than a hard instance.
const MAX_EXTEND_ROUNDS: usize = 50;

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

/// Strength of the guarantee attached to a [`BestResponse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Produced by an exact algorithm; the sequence is a global optimum.
    GlobalExact,
    /// Produced by local search and certified optimal by
    /// [`optimality_test`].
    GlobalCertified,
    /// Locally optimal only; the global optimum may be better.
    LocalOnly,
}

impl Certificate {
    /// Stable lowercase identifier used in reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            Certificate::GlobalExact => "global_exact",
            Certificate::GlobalCertified => "global_certified",
            Certificate::LocalOnly => "local_only",
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An attacker strategy together with its evaluated payoff and the guarantee
/// the producing algorithm can make about it.
#[derive(Debug, Clone)]
pub struct BestResponse {
    /// The checking sequence to execute.
    pub seq: CheckingSequence,
    /// Expected utility of `seq`, recomputed from first principles.
    pub utility: f64,
    /// Probability that `seq` cracks a random account.
    pub success_rate: f64,
    /// What the producing algorithm guarantees about `seq`.
    pub certificate: Certificate,
    /// Upper bound on how many passwords any optimal sequence checks, when
    /// the solver path computed one (`None` on the exact scan paths, which
    /// do not need it).
    pub i_max: Option<usize>,
}

/// Result of [`max_prefix_index`]: how deep into the password list checking
/// can possibly stay profitable.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrefix {
    /// Largest equivalence-set end `i` whose set is still worth appending
    /// when every earlier password is already fully checked; `0` when no set
    /// qualifies. No optimal sequence checks more than `i_max` passwords.
    pub i_max: usize,
    /// Diagnostic per equivalence-set end, in set order: the best prefix
    /// gain of appending that set's last password after a full check of all
    /// earlier passwords. Non-negative entries mark sets reachable by an
    /// optimal sequence.
    pub f_values: Vec<f64>,
}

/// Verdict of [`optimality_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OtOutcome {
    /// No candidate addition can ever become profitable: the tested sequence
    /// is globally optimal.
    Pass,
    /// A candidate addition could become profitable under the most generous
    /// assumptions; the verdict is inconclusive. Fields identify the first
    /// witness: `password` (1-based) and its label bundle `lo..=hi`.
    Fail {
        password: usize,
        lo: usize,
        hi: usize,
        /// Value of the optimistic profitability test at the witness;
        /// `>= 0` up to tie tolerance.
        test_value: f64,
    },
}

impl OtOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, OtOutcome::Pass)
    }
}

// ---------------------------------------------------------------------------
// Profitability horizon
// ---------------------------------------------------------------------------

/// Computes how many passwords any optimal sequence can check.
///
/// For each equivalence-set end `i`, evaluates the most favorable situation
/// password `i` can ever be in: every earlier password fully checked (the
/// largest possible success mass has already been collected, so surviving
/// cost weights are smallest). If even then no prefix of the label bundle
/// `1..=m` has non-negative gain, password `i` — and with it the whole set it
/// belongs to — can never be part of an optimal sequence.
///
/// The gain of such a bundle is monotone in the base success mass, and
/// within one equivalence set it only grows with the password index, so
/// evaluating each set's last member suffices. Gains are *not* monotone
/// across sets, so every set end is evaluated and the largest non-negative
/// one is reported.
pub fn max_prefix_index(config: GameConfig) -> MaxPrefix {
    let dist = config.dist;
    let schedule = config.schedule;
    let m = config.m();
    let full = schedule.q_prefix(m);
    let mut f_values = Vec::with_capacity(dist.boundaries().len() - 1);
    let mut i_max = 0usize;
    for &end in dist.boundaries().iter().skip(1) {
        let p = dist.prob(end - 1);
        let mut lam = dist.prefix_mass(end - 1) * full;
        let mut run = 0.0;
        let mut best = f64::NEG_INFINITY;
        for j in 1..=m {
            let pr = p * schedule.q()[j - 1];
            run += config.v * pr - (1.0 - lam) * schedule.round_cost(j);
            lam += pr;
            if run > best {
                best = run;
            }
        }
        f_values.push(best);
        if best >= -TIE_EPS {
            i_max = end;
        }
    }
    MaxPrefix { i_max, f_values }
}

// ---------------------------------------------------------------------------
// Greedy append pass
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ConcatStats {
    /// Label-marginal evaluations performed; bounded by `n_p * m`.
    pub marginal_evals: usize,
    /// Whether a trailing zero-gain run was dropped to land on a set end.
    pub truncated: bool,
}

/// Greedily appends passwords to `base` in probability order.
///
/// For each unchecked password in turn, evaluates every prefix `1..=j` of its
/// label bundle against the current success mass and appends the prefix with
/// the largest gain; ties are resolved toward checking more labels, and a
/// gain within tie tolerance of zero still counts as worth taking. The pass
/// stops at the first password whose best prefix has strictly negative gain.
///
/// If floating-point dust ever strands the stop point in the middle of an
/// equivalence set, the zero-gain tail is truncated back to the last set end
/// (never below `base`'s length), so returned prefix lengths always land on
/// set ends whenever `base`'s did.
///
/// Runs in `O(n_p * m)`.
pub fn extend_by_concat(config: GameConfig, base: &CheckingSequence) -> CheckingSequence {
    extend_by_concat_stats(config, base).0
}

pub(crate) fn extend_by_concat_stats(
    config: GameConfig,
    base: &CheckingSequence,
) -> (CheckingSequence, ConcatStats) {
    let dist = config.dist;
    let schedule = config.schedule;
    let m = config.m();
    let n = config.n_p();
    let mut taus = base.taus().to_vec();
    let mut stats = ConcatStats::default();

    let mut lambda = success_rate(config, base);
    // Gain accumulated past `base`, and its value at the last set end seen,
    // for the zero-gain truncation check.
    let mut gained = 0.0;
    let mut cut_len = taus.len();
    let mut gained_at_cut = 0.0;

    for i in taus.len()..n {
        let p = dist.prob(i);
        let mut run = 0.0;
        let mut lam = lambda;
        let mut best_j = 0usize;
        let mut best_sum = 0.0f64;
        for j in 1..=m {
            let pr = p * schedule.q()[j - 1];
            run += config.v * pr - (1.0 - lam) * schedule.round_cost(j);
            lam += pr;
            stats.marginal_evals += 1;
            if run > best_sum + TIE_EPS {
                best_j = j;
                best_sum = run;
            } else if run >= best_sum - TIE_EPS && j > best_j {
                // Tie: prefer the longer prefix, keep the larger sum.
                best_j = j;
                best_sum = best_sum.max(run);
            }
        }
        if best_j == 0 {
            break;
        }
        taus.push(best_j);
        lambda += p * schedule.q_prefix(best_j);
        gained += best_sum;
        if dist.is_boundary(taus.len()) {
            cut_len = taus.len();
            gained_at_cut = gained;
        }
    }

    if taus.len() > cut_len && gained - gained_at_cut <= ZERO_GAIN_EPS {
        taus.truncate(cut_len);
        stats.truncated = true;
    }
    (CheckingSequence::from_taus(taus), stats)
}

// ---------------------------------------------------------------------------
// Deepening pass
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct InsertStats {
    /// Full scans over the checked prefix.
    pub passes: usize,
    /// Label-marginal evaluations performed across all passes.
    pub label_evals: usize,
}

/// Deepens already-checked passwords by splicing extra labels into `base`.
///
/// Repeatedly sweeps the checked prefix in order. For each password whose
/// label cap is below `m`, walks the remaining labels accumulating the
/// splice gain: each label wins the future round costs it may short-circuit
/// and pays its own round cost weighted by the survivor mass executed before
/// it. The cap is raised to the first point where the accumulated gain is
/// non-negative (within tie tolerance) and the walk continues from there.
/// Sweeps repeat until one completes without any change.
///
/// Never adds or removes passwords — only label caps grow — so the prefix
/// length is preserved. Each change strictly grows the instruction set,
/// which bounds the number of sweeps.
pub fn extend_by_insert(config: GameConfig, base: &CheckingSequence) -> CheckingSequence {
    extend_by_insert_stats(config, base).0
}

pub(crate) fn extend_by_insert_stats(
    config: GameConfig,
    base: &CheckingSequence,
) -> (CheckingSequence, InsertStats) {
    let dist = config.dist;
    let schedule = config.schedule;
    let m = config.m();
    let ell = base.prefix_len();
    let mut taus = base.taus().to_vec();
    let mut stats = InsertStats::default();

    loop {
        stats.passes += 1;
        // Round costs of instructions that run after each password, fixed at
        // sweep start. Splices at later passwords never change the future
        // costs seen at earlier ones, so the array stays valid as commits
        // happen; earlier commits are reflected through `pre_committed`.
        let mut sufc = vec![0.0; ell + 1];
        for i in (0..ell).rev() {
            sufc[i] = sufc[i + 1] + schedule.cumulative_cost(taus[i]);
        }
        let mut changed = false;
        let mut pre_committed = 0.0;
        for i in 0..ell {
            let p = dist.prob(i);
            let tau0 = taus[i];
            if tau0 < m {
                let future_cost = sufc[i + 1];
                let mut pre = pre_committed + p * schedule.q_prefix(tau0);
                let mut run = 0.0;
                for j in (tau0 + 1)..=m {
                    let pr = p * schedule.q()[j - 1];
                    run += pr * (config.v + future_cost) - (1.0 - pre) * schedule.round_cost(j);
                    pre += pr;
                    stats.label_evals += 1;
                    if run >= -TIE_EPS {
                        taus[i] = j;
                        run = 0.0;
                        changed = true;
                    }
                }
            }
            pre_committed += p * schedule.q_prefix(taus[i]);
        }
        if !changed {
            break;
        }
    }
    (CheckingSequence::from_taus(taus), stats)
}

// ---------------------------------------------------------------------------
// Local search
// ---------------------------------------------------------------------------

/// Runs local search to a fixed point: append greedily, deepen, and repeat
/// until neither pass changes the sequence.
///
/// The result is locally optimal — no single append and no single splice
/// improves it. Both passes only grow the instruction set, so the loop
/// terminates; the round cap exists purely as an arithmetic-defect tripwire
/// and exceeding it reports [`Error::NonConvergence`].
pub fn extend(config: GameConfig) -> Result<CheckingSequence, Error> {
    let mut pi = extend_by_concat(config, &CheckingSequence::empty());
    for _ in 0..MAX_EXTEND_ROUNDS {
        let deepened = extend_by_insert(config, &pi);
        let next = extend_by_concat(config, &deepened);
        if next == pi {
            return Ok(next);
        }
        pi = next;
    }
    Err(Error::NonConvergence(format!(
        "local search still improving after {MAX_EXTEND_ROUNDS} rounds"
    )))
}

// ---------------------------------------------------------------------------
// Optimality certification
// ---------------------------------------------------------------------------

/// Sound, one-sided global-optimality check for a locally optimal sequence.
///
/// Any sequence that improves on a locally optimal `seq` extends it, and the
/// extra labels a given password receives form one contiguous bundle
/// starting just past its current cap. The test scores every such candidate
/// bundle under the most generous assumption possible: every unchecked
/// password ordered before the candidate is treated as already cracked, so
/// the bundle's cost is discounted by that entire mass in addition to the
/// mass `seq` itself collects. If every candidate prefix stays strictly
/// negative even under this over-estimate, no extension can ever be
/// profitable and `seq` is globally optimal — the test returns
/// [`OtOutcome::Pass`].
///
/// A [`OtOutcome::Fail`] is *not* a proof of suboptimality: the generosity
/// of the discount means some failing witnesses are spurious. Candidates are
/// scanned over passwords `1..=max(i_max, len)`, each bundle walked label by
/// label, so the test runs in `O(n_p * m)`.
pub fn optimality_test(config: GameConfig, seq: &CheckingSequence) -> OtOutcome {
    optimality_test_stats(config, seq).0
}

pub(crate) fn optimality_test_stats(
    config: GameConfig,
    seq: &CheckingSequence,
) -> (OtOutcome, MaxPrefix, usize) {
    let dist = config.dist;
    let schedule = config.schedule;
    let m = config.m();
    let taus = seq.taus();
    let ell = taus.len();
    let mp = max_prefix_index(config);
    let last = mp.i_max.max(ell);
    let mut evals = 0usize;

    // Round costs of checked instructions that run after each password.
    let mut sufc = vec![0.0; ell + 1];
    for i in (0..ell).rev() {
        sufc[i] = sufc[i + 1] + schedule.cumulative_cost(taus[i]);
    }

    let mut pre_checked = 0.0; // mass `seq` collects before password i
    let mut before_unchecked = 0.0; // mass of earlier passwords it skips
    for i in 0..last {
        let p = dist.prob(i);
        let tau0 = if i < ell { taus[i] } else { 0 };
        if tau0 < m {
            let future_cost = if i < ell { sufc[i + 1] } else { 0.0 };
            let mut discount = pre_checked + before_unchecked + p * schedule.q_prefix(tau0);
            let mut run = 0.0;
            for b in (tau0 + 1)..=m {
                let pr = p * schedule.q()[b - 1];
                run += pr * (config.v + future_cost) - (1.0 - discount) * schedule.round_cost(b);
                discount += pr;
                evals += 1;
                if run >= -TIE_EPS {
                    return (
                        OtOutcome::Fail {
                            password: i + 1,
                            lo: tau0 + 1,
                            hi: b,
                            test_value: run,
                        },
                        mp,
                        evals,
                    );
                }
            }
        }
        let q_tau = schedule.q_prefix(tau0);
        pre_checked += p * q_tau;
        before_unchecked += p * (1.0 - q_tau);
    }
    (OtOutcome::Pass, mp, evals)
}

// ---------------------------------------------------------------------------
// Peaks of the halting distribution
// ---------------------------------------------------------------------------

/// Indices (1-based) where the halting distribution peaks.
///
/// An interior index `j` is a peak when `q_{j-1} <= q_j > q_{j+1}`; index 1
/// is a peak when `q_1 > q_2`; the last index is always one (stopping at the
/// final label can never be improved by stopping later). On equal-round-cost
/// schedules, optimal sequences only ever stop at peak labels: stopping on an
/// uphill or flat step is dominated by one more label, stopping past a peak
/// by one fewer.
///
/// # Examples
/// ```
/// use costasym::find_peaks;
/// assert_eq!(find_peaks(&[0.2, 0.5, 0.3]), vec![2, 3]);
/// assert_eq!(find_peaks(&[0.7, 0.3]), vec![1, 2]);
/// assert_eq!(find_peaks(&[1.0 / 3.0; 3]), vec![3]);
/// ```
pub fn find_peaks(q: &[f64]) -> Vec<usize> {
    let m = q.len();
    let mut peaks = Vec::new();
    for j in 1..=m {
        let is_peak = if j == m {
            true
        } else if j == 1 {
            q[0] > q[1]
        } else {
            q[j - 2] <= q[j - 1] && q[j - 1] > q[j]
        };
        if is_peak {
            peaks.push(j);
        }
    }
    peaks
}

// ---------------------------------------------------------------------------
// Exact solver for twin-peak equal-cost schedules
// ---------------------------------------------------------------------------

/// Exact best response for equal-round-cost schedules with exactly two
/// halting peaks and `m <= 3`.
///
/// Optimal sequences stop only at equivalence-set ends and check at most
/// `i_max` passwords, so the search reduces to: for each candidate prefix
/// length, find the best assignment of label caps. With equal round costs,
/// a password's contribution to the expected utility depends on the rest of
/// the sequence only through the *number* of instructions executed after it
/// — an integer — so a backward dynamic program over that count finds the
/// exact optimum over every cap pattern in `O(m^2 len^2)` per length. No
/// assumption is made about which caps can appear: restricting caps to the
/// halting distribution's peaks is unsound (a strictly decreasing
/// distribution has peaks `{1, m}`, yet interior caps can be uniquely
/// optimal), which is also why the certificate from a plain greedy upgrade
/// walk cannot be trusted.
///
/// `pi_lo` should be the local-search result for `config`; it widens the
/// candidate lengths and serves as the utility floor. Returns
/// [`Error::InvalidParameter`] when the schedule is not equal-round-cost,
/// `m > 3`, or the peak count differs from two.
pub fn find_good(config: GameConfig, pi_lo: &CheckingSequence) -> Result<BestResponse, Error> {
    let dist = config.dist;
    let schedule = config.schedule;
    let m = config.m();
    if !schedule.is_cost_even() {
        return Err(Error::InvalidParameter(
            "find_good requires an equal-round-cost breakpoint schedule".into(),
        ));
    }
    if m > 3 {
        return Err(Error::InvalidParameter(format!(
            "find_good supports m <= 3 breakpoints, got {m}"
        )));
    }
    let peaks = find_peaks(schedule.q());
    if peaks.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "find_good requires exactly two halting peaks, found {:?}",
            peaks
        )));
    }
    let mp = max_prefix_index(config);
    let ell0 = pi_lo.prefix_len();
    let limit = mp.i_max.max(ell0);

    // Candidate lengths: every equivalence-set end within reach, plus the
    // local answer's own length in case it sits mid-set.
    let mut lens: Vec<usize> = dist
        .boundaries()
        .iter()
        .copied()
        .filter(|&end| end >= 1 && end <= limit)
        .collect();
    if ell0 >= 1 && !dist.is_boundary(ell0) {
        lens.push(ell0);
        lens.sort_unstable();
    }

    // The local answer is the floor: the search may only improve on it. Its
    // label pattern is otherwise ignored — the exact search below covers
    // every cap pattern for each candidate length.
    let mut best_taus: Vec<usize> = pi_lo.taus().to_vec();
    let mut best_u = utility(config, pi_lo);
    if best_u < 0.0 {
        best_taus = Vec::new();
        best_u = 0.0;
    }

    // Per-cap constants: checking password i to cap t contributes
    //   v*p_i*Q(t) - c*t + c*(p_i*Q(t)*R_i + p_i*h(t)),
    // where R_i counts the instructions executed after password i and
    // h(t) = sum_{b<=t} (t-b) q_b. The first two terms are the undiscounted
    // value and cost; the bracket restores the part of the cost discount
    // that password i's own success mass grants to everything after it.
    let c = schedule.round_cost(1);
    let q_cum: Vec<f64> = (0..=m).map(|t| schedule.q_prefix(t)).collect();
    let mut h = vec![0.0; m + 1];
    for t in 1..=m {
        // h(t) = h(t-1) + Q(t-1): raising the cap shifts every earlier
        // label one slot further from the end.
        h[t] = h[t - 1] + q_cum[t - 1];
    }
    let phi = |i: usize, t: usize, r: usize| -> f64 {
        let p = dist.prob(i);
        config.v * p * q_cum[t] - c * t as f64 + c * p * (q_cum[t] * r as f64 + h[t])
    };

    for &len in &lens {
        // Exact search over all cap patterns in {1..m}^len: because round
        // costs are equal, a password's contribution depends on the rest of
        // the sequence only through the integer count of instructions after
        // it, so a backward dynamic program over that count is exact.
        // g[s] = best contribution of passwords i.. when they execute s
        // instructions in total; choice[i][s] records the cap taken.
        let mut g = vec![f64::NEG_INFINITY; m * len + 1];
        g[0] = 0.0;
        let mut choice = vec![vec![0usize; m * len + 1]; len];
        for i in (0..len).rev() {
            let suffix_cap = m * (len - i);
            let mut next = vec![f64::NEG_INFINITY; m * len + 1];
            for s in (len - i)..=suffix_cap {
                let mut best_here = f64::NEG_INFINITY;
                let mut best_t = 0usize;
                for t in 1..=m.min(s) {
                    let rest = g[s - t];
                    if rest == f64::NEG_INFINITY {
                        continue;
                    }
                    let val = phi(i, t, s - t) + rest;
                    if val > best_here {
                        best_here = val;
                        best_t = t;
                    }
                }
                if best_t > 0 {
                    next[s] = best_here;
                    choice[i][s] = best_t;
                }
            }
            g = next;
        }
        let mut s_star = 0usize;
        let mut u_len = f64::NEG_INFINITY;
        for (s, &val) in g.iter().enumerate() {
            if val > u_len {
                u_len = val;
                s_star = s;
            }
        }
        if u_len > best_u {
            let mut taus = Vec::with_capacity(len);
            let mut s = s_star;
            for pos in choice.iter().take(len) {
                let t = pos[s];
                taus.push(t);
                s -= t;
            }
            best_u = u_len;
            best_taus = taus;
        }
    }

    let seq = CheckingSequence::from_taus(best_taus);
    let u = utility(config, &seq);
    let lam = success_rate(config, &seq);
    Ok(BestResponse {
        seq,
        utility: u,
        success_rate: lam,
        certificate: Certificate::GlobalExact,
        i_max: Some(mp.i_max),
    })
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Best full-check prefix `(m, m, …, m)` over equivalence-set ends.
///
/// Exact whenever every optimal cap equals `m` — that is, on
/// equal-round-cost schedules whose halting distribution has the final label
/// as its only peak. Evaluates every set end (profitability is not monotone
/// across sets, so no early exit) and breaks ties toward fewer instructions.
fn full_prefix_scan(config: GameConfig) -> (CheckingSequence, f64) {
    let dist = config.dist;
    let schedule = config.schedule;
    let m = config.m();
    let mut lambda = 0.0;
    let mut run = 0.0;
    let mut best_len = 0usize;
    let mut best_u = 0.0f64;
    for i in 0..config.n_p() {
        let p = dist.prob(i);
        for j in 1..=m {
            let pr = p * schedule.q()[j - 1];
            run += config.v * pr - (1.0 - lambda) * schedule.round_cost(j);
            lambda += pr;
        }
        if dist.is_boundary(i + 1) && run > best_u {
            best_u = run;
            best_len = i + 1;
        }
    }
    (CheckingSequence::from_taus(vec![m; best_len]), best_u)
}

fn validate_value(v: f64) -> Result<(), Error> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "password value v = {v} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Computes the attacker's best response, labeling the answer with the
/// strongest guarantee available for the instance:
///
/// - equal-round-cost schedule with a single halting peak (uniform
///   distributions included): exact prefix scan, [`Certificate::GlobalExact`];
/// - otherwise, local search; if [`optimality_test`] passes,
///   [`Certificate::GlobalCertified`];
/// - on a failed test, equal-round-cost schedules with two peaks and
///   `m <= 3` fall through to the exact [`find_good`] walk
///   ([`Certificate::GlobalExact`]);
/// - anything else returns the local optimum as [`Certificate::LocalOnly`].
///
/// # Examples
/// ```
/// use costasym::{best_response, BreakpointSchedule, Certificate, GameConfig, PasswordDistribution};
/// let schedule = BreakpointSchedule::cost_even_uniform(2, 1.0)?;
/// let dist = PasswordDistribution::from_probs(vec![0.5, 0.5])?;
/// let resp = best_response(GameConfig::new(3.0, &schedule, &dist))?;
/// assert_eq!(resp.seq.taus(), &[2, 2]);
/// assert_eq!(resp.certificate, Certificate::GlobalExact);
/// assert!((resp.utility - 4.0 / 3.0).abs() < 1e-12);
/// # Ok::<(), costasym::Error>(())
/// ```
pub fn best_response(config: GameConfig) -> Result<BestResponse, Error> {
    validate_value(config.v)?;
    let schedule = config.schedule;
    let peaks = find_peaks(schedule.q());

    if schedule.is_cost_even() && peaks.len() == 1 {
        let (seq, u) = full_prefix_scan(config);
        let lam = success_rate(config, &seq);
        return Ok(BestResponse {
            seq,
            utility: u,
            success_rate: lam,
            certificate: Certificate::GlobalExact,
            i_max: None,
        });
    }

    let pi_lo = extend(config)?;
    let (outcome, mp, _) = optimality_test_stats(config, &pi_lo);
    match outcome {
        OtOutcome::Pass => {
            let u = utility(config, &pi_lo);
            let lam = success_rate(config, &pi_lo);
            Ok(BestResponse {
                seq: pi_lo,
                utility: u,
                success_rate: lam,
                certificate: Certificate::GlobalCertified,
                i_max: Some(mp.i_max),
            })
        }
        OtOutcome::Fail { .. } => {
            if schedule.is_cost_even() && config.m() <= 3 && peaks.len() == 2 {
                find_good(config, &pi_lo)
            } else {
                let u = utility(config, &pi_lo);
                let lam = success_rate(config, &pi_lo);
                Ok(BestResponse {
                    seq: pi_lo,
                    utility: u,
                    success_rate: lam,
                    certificate: Certificate::LocalOnly,
                    i_max: Some(mp.i_max),
                })
            }
        }
    }
}

/// Best response against a single fixed breakpoint (`m = 1`): the attacker
/// hashes each guessed password to completion at cost `c_max`, so the only
/// choice is how many passwords to check. Exact via the set-end prefix scan.
pub fn deterministic_best_response(
    v: f64,
    c_max: f64,
    dist: &PasswordDistribution,
) -> Result<BestResponse, Error> {
    validate_value(v)?;
    let schedule = BreakpointSchedule::deterministic(c_max)?;
    let config = GameConfig::new(v, &schedule, dist);
    let (seq, u) = full_prefix_scan(config);
    let lam = success_rate(config, &seq);
    Ok(BestResponse {
        seq,
        utility: u,
        success_rate: lam,
        certificate: Certificate::GlobalExact,
        i_max: None,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::utility;
    use crate::oracle::{enumerate_optimal, OracleLimits};
    use proptest::prelude::*;

    fn dist(probs: &[f64]) -> PasswordDistribution {
        PasswordDistribution::from_probs(probs.to_vec()).unwrap()
    }

    /// Two equally likely passwords; the running example distribution.
    fn contrived() -> PasswordDistribution {
        dist(&[0.5, 0.5])
    }

    fn time_even_2() -> BreakpointSchedule {
        BreakpointSchedule::time_even_uniform(2, 1.0).unwrap()
    }

    fn cost_even(m: usize) -> BreakpointSchedule {
        BreakpointSchedule::cost_even_uniform(m, 1.0).unwrap()
    }

    fn custom_q(m: usize, q: &[f64]) -> BreakpointSchedule {
        BreakpointSchedule::new(
            crate::game::BreakpointKind::CostEven,
            m,
            Some(q),
            1.0,
            crate::game::Scaling::Tight,
        )
        .unwrap()
    }

    fn seq(taus: &[usize]) -> CheckingSequence {
        CheckingSequence::from_taus(taus.to_vec())
    }

    // -- max_prefix_index ---------------------------------------------------

    #[test]
    fn max_prefix_on_contrived_instance() {
        let d = contrived();
        let s = time_even_2();

        // v = 1.45: the two passwords form one equivalence set; its end is
        // still profitable once password 1 is fully checked:
        // 0.3625 - 0.5*0.4 = 0.1625, then + 0.3625 - 0.25*1.2 = 0.225.
        let mp = max_prefix_index(GameConfig::new(1.45, &s, &d));
        assert_eq!(mp.i_max, 2);
        assert_eq!(mp.f_values.len(), 1);
        assert!((mp.f_values[0] - 0.225).abs() < 1e-12, "{:?}", mp.f_values);

        // v = 3: same shape, larger gain (0.55 after one label, 1.0 after two).
        let mp = max_prefix_index(GameConfig::new(3.0, &s, &d));
        assert_eq!(mp.i_max, 2);
        assert!((mp.f_values[0] - 1.0).abs() < 1e-12);

        // v = 0: nothing is ever profitable.
        let mp = max_prefix_index(GameConfig::new(0.0, &s, &d));
        assert_eq!(mp.i_max, 0);
        assert!(mp.f_values[0] < 0.0);
    }

    #[test]
    fn max_prefix_is_not_monotone_across_sets() {
        // Password 1 alone is unprofitable at v = 1.45, but the tail set
        // {2, 3} becomes profitable once everything before it is checked:
        // the horizon extends past a negative set end.
        let d = dist(&[0.4, 0.3, 0.3]);
        let s = time_even_2();
        let mp = max_prefix_index(GameConfig::new(1.45, &s, &d));
        assert_eq!(d.boundaries(), &[0, 1, 3]);
        assert_eq!(mp.f_values.len(), 2);
        assert!(
            (mp.f_values[0] - (-0.11)).abs() < 1e-12,
            "{:?}",
            mp.f_values
        );
        assert!((mp.f_values[1] - 0.135).abs() < 1e-12);
        assert_eq!(mp.i_max, 3);
    }

    #[test]
    fn max_prefix_saturates_for_large_values() {
        // Once v * p_n * q_1 alone exceeds every cost, all sets qualify.
        let d = dist(&[0.4, 0.3, 0.3]);
        let s = time_even_2();
        let mp = max_prefix_index(GameConfig::new(100.0, &s, &d));
        assert_eq!(mp.i_max, 3);
        assert!(mp.f_values.iter().all(|&f| f > 0.0));
    }

    // -- extend_by_concat ---------------------------------------------------

    #[test]
    fn concat_takes_full_bundles_at_high_value() {
        // v = 3 on the equal-cost uniform schedule: both passwords worth
        // checking to the last label. Gains: password 1 best prefix 1..2
        // (1/12 then 1/3), password 2 the same shape at lower cost weights.
        let d = contrived();
        let s = cost_even(2);
        let config = GameConfig::new(3.0, &s, &d);
        let (out, stats) = extend_by_concat_stats(config, &CheckingSequence::empty());
        assert_eq!(out.taus(), &[2, 2]);
        assert_eq!(stats.marginal_evals, 4);
        assert!(!stats.truncated);
        assert!((utility(config, &out) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn concat_stops_when_first_password_is_unprofitable() {
        // v = 1.45 time-even: password 1's best prefix gain is
        // max(-0.0375, -0.575) < 0, so the greedy pass adds nothing.
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(1.45, &s, &d);
        let (out, stats) = extend_by_concat_stats(config, &CheckingSequence::empty());
        assert!(out.is_empty());
        assert_eq!(stats.marginal_evals, 2);
        assert!(!stats.truncated);
    }

    #[test]
    fn concat_picks_partial_bundle_when_tail_costs_too_much() {
        // v = 3 time-even: password 1 stops at label 1 (0.35 beats the
        // 1..2 run of 0.2); password 2 runs to label 2 (0.6 beats 0.45).
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(3.0, &s, &d);
        let out = extend_by_concat(config, &CheckingSequence::empty());
        assert_eq!(out.taus(), &[1, 2]);
    }

    #[test]
    fn concat_extends_an_existing_base() {
        // From (1): password 2 is appended exactly as it would be from the
        // same success mass, and the base caps are untouched.
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(3.0, &s, &d);
        let out = extend_by_concat(config, &seq(&[1]));
        assert_eq!(out.taus(), &[1, 2]);
        // A full base has nothing to extend.
        let full = seq(&[2, 2]);
        let (out, stats) = extend_by_concat_stats(config, &full);
        assert_eq!(out.taus(), &[2, 2]);
        assert_eq!(stats.marginal_evals, 0);
    }

    // -- extend_by_insert ---------------------------------------------------

    #[test]
    fn insert_deepens_in_waves() {
        // v = 3 time-even from (1,1): password 2's label 2 becomes worth
        // splicing first (gain 0.15); once it is in, password 1's label 2
        // gains the bigger short-circuit credit (0.25). Three sweeps: two
        // that commit, one that verifies the fixed point.
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(3.0, &s, &d);
        let (out, stats) = extend_by_insert_stats(config, &seq(&[1, 1]));
        assert_eq!(out.taus(), &[2, 2]);
        assert_eq!(stats.passes, 3);
        assert_eq!(stats.label_evals, 3);
    }

    #[test]
    fn insert_leaves_unprofitable_base_alone() {
        // v = 1.45: both splice gains are negative (-0.4375 and -0.2375).
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(1.45, &s, &d);
        let (out, stats) = extend_by_insert_stats(config, &seq(&[1, 1]));
        assert_eq!(out.taus(), &[1, 1]);
        assert_eq!(stats.passes, 1);
        assert_eq!(stats.label_evals, 2);
    }

    #[test]
    fn insert_on_empty_base_is_noop() {
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(3.0, &s, &d);
        let (out, stats) = extend_by_insert_stats(config, &CheckingSequence::empty());
        assert!(out.is_empty());
        assert_eq!(stats.passes, 1);
        assert_eq!(stats.label_evals, 0);
    }

    #[test]
    fn insert_preserves_prefix_length() {
        let d = dist(&[0.4, 0.3, 0.3]);
        let s = time_even_2();
        let config = GameConfig::new(5.0, &s, &d);
        let out = extend_by_insert(config, &seq(&[1, 1]));
        assert_eq!(out.prefix_len(), 2);
    }

    // -- extend ---------------------------------------------------------=---

    #[test]
    fn extend_reaches_fixed_point_through_both_passes() {
        // v = 3 time-even: greedy alone yields (1,2); the splice pass then
        // deepens password 1, and the fixed point is the full sequence.
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(3.0, &s, &d);
        let pi = extend(config).unwrap();
        assert_eq!(pi.taus(), &[2, 2]);
        assert!((utility(config, &pi) - 1.2).abs() < 1e-12);

        // Fixed point: neither pass moves it.
        assert_eq!(extend_by_concat(config, &pi), pi);
        assert_eq!(extend_by_insert(config, &pi), pi);
    }

    #[test]
    fn extend_returns_empty_when_nothing_profits() {
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(1.45, &s, &d);
        assert!(extend(config).unwrap().is_empty());
    }

    // -- optimality_test ------------------------------------------------=---

    #[test]
    fn ot_passes_on_saturated_sequence() {
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(3.0, &s, &d);
        let pi = extend(config).unwrap();
        let (outcome, mp, _) = optimality_test_stats(config, &pi);
        assert!(outcome.is_pass());
        assert_eq!(mp.i_max, 2);
    }

    #[test]
    fn ot_fails_with_first_witness_on_contrived_instance() {
        // v = 1.45: the local optimum is empty, yet password 2's first
        // label scores 0.3625 - 0.5*0.4 = 0.1625 once password 1's mass is
        // granted as a discount. The witness is spurious generosity — the
        // true optimum is still empty — which is exactly why Fail is
        // inconclusive.
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(1.45, &s, &d);
        let pi = extend(config).unwrap();
        assert!(pi.is_empty());
        match optimality_test(config, &pi) {
            OtOutcome::Fail {
                password,
                lo,
                hi,
                test_value,
            } => {
                assert_eq!((password, lo, hi), (2, 1, 1));
                assert!((test_value - 0.1625).abs() < 1e-12, "{test_value}");
            }
            OtOutcome::Pass => panic!("expected a failing witness"),
        }
    }

    #[test]
    fn ot_fail_can_coexist_with_global_optimality() {
        // Equal-cost q = (0.7, 0.3): the local optimum (1) is globally
        // optimal (oracle agrees), yet the test fails at password 3 whose
        // bundle is discounted by all skipped mass: 0.266 - 0.2*(10/13).
        let d = dist(&[0.6, 0.2, 0.2]);
        let s = custom_q(2, &[0.7, 0.3]);
        let config = GameConfig::new(1.9, &s, &d);
        let pi = extend(config).unwrap();
        assert_eq!(pi.taus(), &[1]);

        let (outcome, mp, _) = optimality_test_stats(config, &pi);
        match outcome {
            OtOutcome::Fail {
                password,
                lo,
                hi,
                test_value,
            } => {
                assert_eq!((password, lo, hi), (3, 1, 1));
                assert!((test_value - 1.458 / 13.0).abs() < 1e-12, "{test_value}");
            }
            OtOutcome::Pass => panic!("expected a failing witness"),
        }
        assert_eq!(mp.i_max, 3);
        assert!((mp.f_values[0] - 0.374 / 13.0).abs() < 1e-12);
        assert!((mp.f_values[1] - 0.18).abs() < 1e-12);

        let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
        assert_eq!(oracle.seq.taus(), &[1]);
        assert!((oracle.utility - utility(config, &pi)).abs() < 1e-12);
    }

    // -- find_peaks -----------------------------------------------------=---

    #[test]
    fn peaks_cover_flat_interior_and_leading_cases() {
        assert_eq!(find_peaks(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]), vec![3]);
        assert_eq!(find_peaks(&[0.2, 0.5, 0.3]), vec![2, 3]);
        assert_eq!(find_peaks(&[0.7, 0.3]), vec![1, 2]);
        assert_eq!(find_peaks(&[0.2, 0.3, 0.5]), vec![3]);
        assert_eq!(find_peaks(&[1.0]), vec![1]);
        // A flat run rising into a peak: only its end counts.
        assert_eq!(find_peaks(&[0.25, 0.25, 0.3, 0.2]), vec![3, 4]);
    }

    // -- find_good ------------------------------------------------------=---

    #[test]
    fn find_good_crosses_an_unprofitable_valley() {
        // q = (0.6, 0.4), v = 2: the greedy stops immediately (password 1's
        // prefixes gain -0.114 and -0.214), yet checking both passwords in
        // full nets 2/7. The exact walk must cross the negative start.
        let d = contrived();
        let s = custom_q(2, &[0.6, 0.4]);
        let config = GameConfig::new(2.0, &s, &d);
        let pi = extend(config).unwrap();
        assert!(pi.is_empty());

        let resp = find_good(config, &pi).unwrap();
        assert_eq!(resp.seq.taus(), &[2, 2]);
        assert!((resp.utility - 2.0 / 7.0).abs() < 1e-12, "{}", resp.utility);
        assert_eq!(resp.certificate, Certificate::GlobalExact);
        assert_eq!(resp.i_max, Some(2));

        let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
        assert!((oracle.utility - resp.utility).abs() < 1e-12);
        assert_eq!(oracle.seq.taus(), &[2, 2]);
    }

    #[test]
    fn find_good_keeps_the_local_optimum_when_it_wins() {
        // A head password worth one label and a long tail of cheap
        // passwords that are never worth starting: the walk must evaluate
        // the longer candidate lengths and still return (1).
        let mut probs = vec![0.5];
        probs.extend(std::iter::repeat(0.05).take(10));
        let d = dist(&probs);
        let s = custom_q(2, &[0.7, 0.3]);
        let config = GameConfig::new(2.4, &s, &d);
        let pi = extend(config).unwrap();
        assert_eq!(pi.taus(), &[1]);

        match optimality_test(config, &pi) {
            OtOutcome::Fail {
                password,
                lo,
                hi,
                test_value,
            } => {
                assert_eq!((password, lo, hi), (10, 1, 1));
                assert!((test_value - 0.092 / 13.0).abs() < 1e-12, "{test_value}");
            }
            OtOutcome::Pass => panic!("expected a failing witness"),
        }

        let resp = find_good(config, &pi).unwrap();
        assert_eq!(resp.seq.taus(), &[1]);
        assert!(
            (resp.utility - 0.92 / 13.0).abs() < 1e-12,
            "{}",
            resp.utility
        );

        let oracle = enumerate_optimal(
            config,
            OracleLimits {
                max_n_p: 11,
                max_m: 3,
            },
        )
        .unwrap();
        assert!((oracle.utility - resp.utility).abs() < 1e-12);
    }

    #[test]
    fn find_good_rejects_unsupported_instances() {
        let d = contrived();
        let te = time_even_2();
        let config = GameConfig::new(2.0, &te, &d);
        assert!(matches!(
            find_good(config, &CheckingSequence::empty()),
            Err(Error::InvalidParameter(_))
        ));

        let uniform = cost_even(2);
        let config = GameConfig::new(2.0, &uniform, &d);
        assert!(matches!(
            find_good(config, &CheckingSequence::empty()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn find_good_uses_interior_caps_under_strictly_decreasing_weights() {
        // When the halting weights strictly decrease, an interior stop round
        // that is not locally maximal can still be the unique best cap for a
        // high-probability password: capping it there trades a small success
        // hit for a large saving in expected work. A search restricted to
        // locally-maximal rounds misses this optimum entirely, so this case
        // pins the exact dynamic program against the exhaustive oracle.
        let d = dist(&[
            0.4742911836216012,
            0.4528067085296705,
            0.024300702616242786,
            0.024300702616242786,
            0.024300702616242786,
        ]);
        let s = custom_q(
            3,
            &[0.7189617534713412, 0.24150135471991432, 0.03953689180874456],
        );
        assert_eq!(find_peaks(s.q()), vec![1, 3]);

        let config = GameConfig::new(4.5750043560956, &s, &d);
        let pi = extend(config).unwrap();
        let resp = find_good(config, &pi).unwrap();
        assert_eq!(resp.seq.taus(), &[2, 3, 1, 1, 1]);
        assert!(
            (resp.utility - 2.3096622975351315).abs() < 1e-12,
            "{}",
            resp.utility
        );
        assert_eq!(resp.certificate, Certificate::GlobalExact);

        // The dispatcher must land on the same answer with the same
        // certificate, and the oracle confirms it is the true optimum.
        let dispatched = best_response(config).unwrap();
        assert_eq!(dispatched.seq.taus(), &[2, 3, 1, 1, 1]);
        assert_eq!(dispatched.certificate, Certificate::GlobalExact);

        let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
        assert_eq!(oracle.seq.taus(), &[2, 3, 1, 1, 1]);
        assert!((oracle.utility - resp.utility).abs() < 1e-12);
    }

    // -- best_response dispatch ----------------------------------------=----

    #[test]
    fn single_peak_scan_beats_greedy_on_flat_heads() {
        // Uniform equal-cost schedule, two equal passwords, v = 2: the
        // greedy pass stops at the empty sequence (password 1's prefixes
        // gain -1/6 and 0... strictly: -1/6 then 0 - 1/6), but checking
        // both passwords nets 1/3. The scan path must find it and the
        // certificate must still be exact.
        let d = contrived();
        let s = cost_even(2);
        let config = GameConfig::new(2.0, &s, &d);

        let greedy = extend_by_concat(config, &CheckingSequence::empty());
        assert!(greedy.is_empty());

        let resp = best_response(config).unwrap();
        assert_eq!(resp.seq.taus(), &[2, 2]);
        assert!((resp.utility - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(resp.certificate, Certificate::GlobalExact);
        assert_eq!(resp.i_max, None);
        assert!((resp.success_rate - 1.0).abs() < 1e-12);

        let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
        assert!((oracle.utility - resp.utility).abs() < 1e-12);
        assert_eq!(oracle.seq.taus(), &[2, 2]);
    }

    #[test]
    fn single_peak_scan_handles_rising_distributions() {
        // Non-uniform but single-peaked (non-decreasing) halting weights.
        let d = dist(&[0.6, 0.4]);
        let s = custom_q(3, &[0.2, 0.3, 0.5]);
        let config = GameConfig::new(3.0, &s, &d);
        let resp = best_response(config).unwrap();
        assert_eq!(resp.seq.taus(), &[3, 3]);
        assert!(
            (resp.utility - 34.0 / 23.0).abs() < 1e-12,
            "{}",
            resp.utility
        );
        assert_eq!(resp.certificate, Certificate::GlobalExact);

        let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
        assert!((oracle.utility - resp.utility).abs() < 1e-12);
    }

    #[test]
    fn certified_path_on_two_peak_instance() {
        // q = (0.7, 0.3), v = 2.4: local search reaches (2,2) and the test
        // proves it optimal.
        let d = contrived();
        let s = custom_q(2, &[0.7, 0.3]);
        let config = GameConfig::new(2.4, &s, &d);
        let resp = best_response(config).unwrap();
        assert_eq!(resp.seq.taus(), &[2, 2]);
        assert_eq!(resp.certificate, Certificate::GlobalCertified);
        assert_eq!(resp.i_max, Some(2));
        assert!((resp.utility - (2.4 - 23.0 / 13.0)).abs() < 1e-12);
    }

    #[test]
    fn fallback_to_find_good_on_failed_certification() {
        // The valley-crossing instance again, but through the dispatcher.
        let d = contrived();
        let s = custom_q(2, &[0.6, 0.4]);
        let config = GameConfig::new(2.0, &s, &d);
        let resp = best_response(config).unwrap();
        assert_eq!(resp.seq.taus(), &[2, 2]);
        assert_eq!(resp.certificate, Certificate::GlobalExact);
        assert!((resp.utility - 2.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn local_only_when_no_exact_fallback_applies() {
        // Time-even costs are not equal-round-cost, so a failed test leaves
        // only the local answer. Here it is genuinely suboptimal: the local
        // optimum is empty while the true optimum checks both passwords once
        // — the honest certificate matters.
        let d = contrived();
        let s = time_even_2();
        let config = GameConfig::new(1.45, &s, &d);
        let resp = best_response(config).unwrap();
        assert!(resp.seq.is_empty());
        assert_eq!(resp.certificate, Certificate::LocalOnly);
        assert_eq!(resp.i_max, Some(2));
        assert_eq!(resp.utility, 0.0);
        assert_eq!(resp.success_rate, 0.0);

        let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
        assert_eq!(oracle.seq.taus(), &[1, 1]);
        assert!(oracle.utility > resp.utility);
    }

    #[test]
    fn best_response_rejects_invalid_values() {
        let d = contrived();
        let s = cost_even(2);
        for v in [f64::NAN, f64::INFINITY, -1.0] {
            let config = GameConfig::new(v, &s, &d);
            assert!(matches!(
                best_response(config),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    // -- deterministic_best_response -------------------------------------=--

    #[test]
    fn deterministic_baseline_on_contrived_instance() {
        let d = contrived();
        // v = 1.45: each password costs 1 against gain 0.725 — check nothing.
        let resp = deterministic_best_response(1.45, 1.0, &d).unwrap();
        assert!(resp.seq.is_empty());
        assert_eq!(resp.success_rate, 0.0);
        assert_eq!(resp.certificate, Certificate::GlobalExact);

        // v = 3: both passwords pay off; utility 0.5 + 1.0.
        let resp = deterministic_best_response(3.0, 1.0, &d).unwrap();
        assert_eq!(resp.seq.taus(), &[1, 1]);
        assert!((resp.utility - 1.5).abs() < 1e-12);
        assert!((resp.success_rate - 1.0).abs() < 1e-12);

        assert!(deterministic_best_response(-0.5, 1.0, &d).is_err());
    }

    #[test]
    fn deterministic_scan_survival_discount_keeps_tail_worthwhile() {
        // Later passwords are cheaper to check because the attacker only
        // keeps working with probability 1 - lambda. Gains per password:
        // 0.4*2.6 - 1 = +0.04, then 0.78 - 0.6 = +0.18, then 0.78 - 0.3 =
        // +0.48, so the whole corpus pays off even though 0.78 < 1.
        let d = dist(&[0.4, 0.3, 0.3]);
        let resp = deterministic_best_response(2.6, 1.0, &d).unwrap();
        assert_eq!(resp.seq.taus(), &[1, 1, 1]);
        assert!((resp.utility - 0.7).abs() < 1e-12);
        assert!((resp.success_rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_scan_handles_interior_dips_and_ties() {
        // Head pays (0.5*2.2 - 1 = +0.1); the thin tail opens at -0.225 and
        // only recovers to a cumulative -0.15, so the scan must survive a
        // dip without stopping early and still prefer the head alone:
        // U(1) = 0.1 versus U(5) = -0.05.
        let d = dist(&[0.5, 0.125, 0.125, 0.125, 0.125]);
        let resp = deterministic_best_response(2.2, 1.0, &d).unwrap();
        assert_eq!(resp.seq.taus(), &[1]);
        assert!((resp.utility - 0.1).abs() < 1e-12);
        assert!((resp.success_rate - 0.5).abs() < 1e-12);

        // v = 2.5 lands on an exact tie (binary-exact arithmetic):
        // U(1) = U(5) = 0.25. Fewer instructions wins.
        let resp = deterministic_best_response(2.5, 1.0, &d).unwrap();
        assert_eq!(resp.seq.taus(), &[1]);
        assert_eq!(resp.utility, 0.25);
    }

    // -- scaling ----------------------------------------------------------=-

    #[test]
    fn linear_work_bounds_on_large_instances() {
        // 5000 passwords, m = 7: the greedy, splice, and certification
        // passes each stay within their n_p * m work budgets.
        let n = 5000usize;
        let weights: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let d = dist(&probs);
        let s = cost_even(7);
        let config = GameConfig::new(50.0, &s, &d);

        let (pi, cstats) = extend_by_concat_stats(config, &CheckingSequence::empty());
        assert!(cstats.marginal_evals <= n * 7);

        let (_, ot_mp, ot_evals) = optimality_test_stats(config, &pi);
        assert!(ot_evals <= n * 7);
        assert!(ot_mp.i_max <= n);

        let (_, istats) = extend_by_insert_stats(config, &pi);
        assert!(istats.label_evals <= istats.passes * n * 7);
    }

    // -- property-based cross-checks ------------------------------------=--

    /// Small random instances: probabilities (with deliberate ties),
    /// a schedule family, and a value.
    fn small_instance() -> impl Strategy<Value = (Vec<f64>, usize, u8, Vec<f64>, f64)> {
        (
            proptest::collection::vec(0.05f64..1.0, 1..=5),
            1usize..=3,
            0u8..3,
            proptest::collection::vec(0.05f64..1.0, 3),
            0.0f64..20.0,
        )
    }

    fn build_probs(raw: &[f64], quantize: bool) -> Vec<f64> {
        let mut w: Vec<f64> = raw
            .iter()
            .map(|&x| if quantize { (x * 4.0).ceil() / 4.0 } else { x })
            .collect();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let total: f64 = w.iter().sum();
        w.iter().map(|x| x / total).collect()
    }

    fn build_schedule(kind: u8, m: usize, raw_q: &[f64]) -> BreakpointSchedule {
        match kind {
            0 => BreakpointSchedule::cost_even_uniform(m, 1.0).unwrap(),
            1 => BreakpointSchedule::time_even_uniform(m, 1.0).unwrap(),
            _ => {
                let total: f64 = raw_q[..m].iter().sum();
                let q: Vec<f64> = raw_q[..m].iter().map(|x| x / total).collect();
                BreakpointSchedule::new(
                    crate::game::BreakpointKind::CostEven,
                    m,
                    Some(&q),
                    1.0,
                    crate::game::Scaling::Tight,
                )
                .unwrap()
            }
        }
    }

    proptest! {
        #[test]
        fn local_chain_is_nested_and_dominated_by_oracle(
            (raw, m, kind, raw_q, v) in small_instance(),
            quantize in proptest::bool::ANY,
        ) {
            let probs = build_probs(&raw, quantize);
            let d = dist(&probs);
            let s = build_schedule(kind, m, &raw_q);
            let config = GameConfig::new(v, &s, &d);

            let pi_loc = extend_by_concat(config, &CheckingSequence::empty());
            let pi_lo = extend(config).unwrap();
            prop_assert!(pi_loc.is_subset_of(&pi_lo));

            let u_loc = utility(config, &pi_loc);
            let u_lo = utility(config, &pi_lo);
            prop_assert!(u_loc <= u_lo + 1e-12);

            let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
            prop_assert!(u_lo <= oracle.utility + 1e-9);
            prop_assert!(pi_lo.is_subset_of(&oracle.seq) || (oracle.utility - u_lo).abs() <= 1e-9);

            // The horizon bounds every optimal prefix.
            let mp = max_prefix_index(config);
            prop_assert!(oracle.seq.prefix_len() <= mp.i_max);

            // Fixed point really is fixed.
            prop_assert!(extend_by_concat(config, &pi_lo) == pi_lo);
            prop_assert!(extend_by_insert(config, &pi_lo) == pi_lo);
        }

        #[test]
        fn best_response_is_consistent_and_certificates_are_honest(
            (raw, m, kind, raw_q, v) in small_instance(),
            quantize in proptest::bool::ANY,
        ) {
            let probs = build_probs(&raw, quantize);
            let d = dist(&probs);
            let s = build_schedule(kind, m, &raw_q);
            let config = GameConfig::new(v, &s, &d);

            let resp = best_response(config).unwrap();
            prop_assert!((resp.utility - utility(config, &resp.seq)).abs() <= 1e-12);
            prop_assert!(
                (resp.success_rate - success_rate(config, &resp.seq)).abs() <= 1e-12
            );

            let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
            prop_assert!(resp.utility <= oracle.utility + 1e-9);
            if resp.certificate != Certificate::LocalOnly {
                prop_assert!(
                    (resp.utility - oracle.utility).abs() <= 1e-9,
                    "certificate {:?} but utility {} vs oracle {}",
                    resp.certificate, resp.utility, oracle.utility
                );
            }
        }

        #[test]
        fn ot_pass_implies_oracle_equality(
            (raw, m, kind, raw_q, v) in small_instance(),
        ) {
            let probs = build_probs(&raw, false);
            let d = dist(&probs);
            let s = build_schedule(kind, m, &raw_q);
            let config = GameConfig::new(v, &s, &d);

            let pi_lo = extend(config).unwrap();
            if optimality_test(config, &pi_lo).is_pass() {
                let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
                prop_assert!(
                    (utility(config, &pi_lo) - oracle.utility).abs() <= 1e-9
                );
            }
        }

        #[test]
        fn find_good_matches_oracle_on_twin_peak_instances(
            (raw, _m, _kind, raw_q, v) in small_instance(),
            m2 in 2usize..=3,
        ) {
            let probs = build_probs(&raw, false);
            let d = dist(&probs);
            // Force exactly two peaks by sorting weights to descend:
            // q_1 > q_2 makes label 1 a peak alongside the final label
            // (for m = 3 the middle stays a non-peak since q_1 > q_2).
            let mut q: Vec<f64> = raw_q[..m2].to_vec();
            q.sort_by(|a, b| b.partial_cmp(a).unwrap());
            q[0] += 0.01; // break exact ties so the head peak is strict
            let total: f64 = q.iter().sum();
            let q: Vec<f64> = q.iter().map(|x| x / total).collect();
            let s = build_schedule(2, m2, &q);
            prop_assume!(find_peaks(s.q()).len() == 2);
            let config = GameConfig::new(v, &s, &d);

            let pi_lo = extend(config).unwrap();
            let resp = find_good(config, &pi_lo).unwrap();
            let oracle = enumerate_optimal(config, OracleLimits::default()).unwrap();
            prop_assert!(
                (resp.utility - oracle.utility).abs() <= 1e-9,
                "find_good {} vs oracle {} (q {:?}, probs {:?}, v {})",
                resp.utility, oracle.utility, s.q(), probs, v
            );
        }

        #[test]
        fn max_prefix_values_align_with_set_ends(
            (raw, m, kind, raw_q, v) in small_instance(),
        ) {
            let probs = build_probs(&raw, true);
            let d = dist(&probs);
            let s = build_schedule(kind, m, &raw_q);
            let config = GameConfig::new(v, &s, &d);
            let mp = max_prefix_index(config);
            prop_assert_eq!(mp.f_values.len(), d.boundaries().len() - 1);
            prop_assert!(mp.i_max == 0 || d.is_boundary(mp.i_max));
            // i_max is the LAST set end with a non-negative value.
            let mut expect = 0usize;
            for (k, &end) in d.boundaries().iter().skip(1).enumerate() {
                if mp.f_values[k] >= -TIE_EPS {
                    expect = end;
                }
            }
            prop_assert_eq!(mp.i_max, expect);
        }
    }
}
