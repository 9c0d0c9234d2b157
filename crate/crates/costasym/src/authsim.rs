//! Protocol simulation: account registration with a secret sampled
//! breakpoint and early-halting verification over a mock label stream.
//!
//! The simulation reproduces the server's side of the scheme — sample a
//! halting index from the schedule at registration, store only the label at
//! that index, and verify by streaming labels until one matches — together
//! with its cost accounting. Labels come from a keyed digest chain, not a
//! real memory-hard function: the analysis depends only on the quadratic
//! cost model, and the chain preserves the one property that matters,
//! sequentiality (each label depends on all earlier ones).
//!
//! The asymmetry this buys the defender is visible directly in the numbers:
//! a correct login halts at the stored index (expected cost at most the
//! budget), while a wrong guess always streams every label and pays the full
//! final-label cost.

use std::io::Write;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::game::BreakpointSchedule;
use crate::Error;

const SALT_LEN: usize = 16;
const LABEL_LEN: usize = 32;

/// Domain prefix for the first label of a chain.
const TAG_FIRST: u8 = 0x01;
/// Domain prefix for every subsequent label.
const TAG_CHAIN: u8 = 0x02;

/// Deterministic sequential label chain for one `(password, salt)` pair.
///
/// `L_1 = H(0x01 || salt || password)`, `L_{j+1} = H(0x02 || L_j)`: identical
/// inputs give identical streams, and no label can be produced without all
/// of its predecessors.
pub struct MockLabelStream {
    state: [u8; LABEL_LEN],
    started: bool,
}

impl MockLabelStream {
    pub fn new(password: &str, salt: &[u8; SALT_LEN]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update([TAG_FIRST]);
        hasher.update(salt);
        hasher.update(password.as_bytes());
        MockLabelStream {
            state: hasher.finalize().into(),
            started: false,
        }
    }

    /// Produces the next label in the chain.
    pub fn next_label(&mut self) -> [u8; LABEL_LEN] {
        if self.started {
            let mut hasher = Sha256::new();
            hasher.update([TAG_CHAIN]);
            hasher.update(self.state);
            self.state = hasher.finalize().into();
        }
        self.started = true;
        self.state
    }
}

/// Server-side account state. The sampled halting index is *not* stored —
/// nothing in the record recovers it except running a verification.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountRecord {
    /// Opaque account token.
    pub user: u64,
    /// Per-account random salt.
    pub salt: [u8; SALT_LEN],
    /// Label value at the sampled halting index.
    pub hash: [u8; LABEL_LEN],
    /// The halting schedule the account was registered under.
    pub schedule: BreakpointSchedule,
}

/// Outcome of a single verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOutcome {
    /// Whether some streamed label matched the stored hash.
    pub accepted: bool,
    /// Labels computed before halting (`m` on rejection).
    pub labels_computed: usize,
    /// Server cost of this verification: `unit_cost * beta_j^2` for the
    /// halting index `j`.
    pub cost: f64,
}

/// Registers an account: samples a halting index from the schedule's
/// distribution, streams the label chain to that index, and stores only the
/// salt and the final label. Returns the record and the server's
/// registration cost (draw order: account token, salt, halting index — fixed
/// so identical rng states give identical records).
pub fn register(
    password: &str,
    schedule: &BreakpointSchedule,
    rng: &mut impl Rng,
) -> (AccountRecord, f64) {
    let user = rng.gen::<u64>();
    let mut salt = [0u8; SALT_LEN];
    rng.fill(&mut salt);

    // Inverse-CDF sample of the halting index.
    let r = rng.gen::<f64>();
    let m = schedule.m();
    let mut index = m;
    for j in 1..=m {
        if r < schedule.q_prefix(j) {
            index = j;
            break;
        }
    }

    let mut stream = MockLabelStream::new(password, &salt);
    let mut label = stream.next_label();
    for _ in 1..index {
        label = stream.next_label();
    }
    let record = AccountRecord {
        user,
        salt,
        hash: label,
        schedule: schedule.clone(),
    };
    (record, schedule.cumulative_cost(index))
}

/// Verifies a guess against a record: streams the guess's label chain,
/// halting at the first label equal to the stored hash. A wrong guess
/// matches nothing, streams all `m` labels, and always costs the full
/// `unit_cost * beta_m^2`.
pub fn verify(record: &AccountRecord, guess: &str) -> VerifyOutcome {
    let schedule = &record.schedule;
    let m = schedule.m();
    let mut stream = MockLabelStream::new(guess, &record.salt);
    for j in 1..=m {
        if stream.next_label() == record.hash {
            return VerifyOutcome {
                accepted: true,
                labels_computed: j,
                cost: schedule.cumulative_cost(j),
            };
        }
    }
    VerifyOutcome {
        accepted: false,
        labels_computed: m,
        cost: schedule.cumulative_cost(m),
    }
}

/// Aggregate costs from a simulated login mix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadStats {
    pub trials: usize,
    pub correct_trials: usize,
    pub incorrect_trials: usize,
    /// Mean server cost of registrations (one per trial).
    pub mean_registration_cost: f64,
    /// Mean verification cost over correct logins (`0` when none occurred).
    pub mean_correct_cost: f64,
    /// Mean verification cost over incorrect logins (`0` when none occurred).
    pub mean_incorrect_cost: f64,
    /// Mean verification cost over all trials.
    pub mean_overall_cost: f64,
    /// The schedule's workload ceiling, for context.
    pub c_max: f64,
}

/// Simulates `trials` logins, a `correct_fraction` of which present the
/// right password, and reports mean costs. See
/// [`measure_workload_journaled`] for the same with an event journal.
///
/// Two contract checks run inside the simulation: every incorrect
/// verification must cost exactly the full-stream cost, and the mean correct
/// cost must stay within `c_max * (1 + 3/sqrt(trials))` — the budget bound
/// with statistical slack.
pub fn measure_workload(
    schedule: &BreakpointSchedule,
    trials: usize,
    correct_fraction: f64,
    rng: &mut impl Rng,
) -> Result<WorkloadStats, Error> {
    measure_workload_journaled(
        schedule,
        trials,
        correct_fraction,
        rng,
        &mut std::io::sink(),
    )
}

/// [`measure_workload`] with an append-only journal: one JSON line per
/// simulated event (`register` and `verify`), carrying the event type, the
/// server cost, and the number of labels computed.
pub fn measure_workload_journaled(
    schedule: &BreakpointSchedule,
    trials: usize,
    correct_fraction: f64,
    rng: &mut impl Rng,
    journal: &mut dyn Write,
) -> Result<WorkloadStats, Error> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&correct_fraction) {
        return Err(Error::InvalidParameter(format!(
            "correct_fraction = {correct_fraction} outside [0, 1]"
        )));
    }

    let full_cost = schedule.cumulative_cost(schedule.m());
    let mut registration_sum = 0.0;
    let mut correct_sum = 0.0;
    let mut incorrect_sum = 0.0;
    let mut overall_sum = 0.0;
    let mut correct_trials = 0usize;

    for t in 0..trials {
        let password = format!("account-{t}");
        let (record, reg_cost) = register(&password, schedule, rng);
        registration_sum += reg_cost;
        writeln!(
            journal,
            "{}",
            serde_json::json!({
                "event": "register",
                "cost": reg_cost,
                "labels": labels_for_cost(schedule, reg_cost),
            })
        )?;

        let correct = rng.gen::<f64>() < correct_fraction;
        let guess = if correct {
            password.clone()
        } else {
            format!("intruder-{t}")
        };
        let outcome = verify(&record, &guess);
        assert_eq!(
            outcome.accepted, correct,
            "a guess must verify exactly when it is the registered password"
        );
        if correct {
            correct_trials += 1;
            correct_sum += outcome.cost;
        } else {
            // Structural identity: rejection always streams every label.
            assert_eq!(outcome.labels_computed, schedule.m());
            assert_eq!(outcome.cost, full_cost);
            incorrect_sum += outcome.cost;
        }
        overall_sum += outcome.cost;
        writeln!(
            journal,
            "{}",
            serde_json::json!({
                "event": "verify",
                "accepted": outcome.accepted,
                "cost": outcome.cost,
                "labels": outcome.labels_computed,
            })
        )?;
    }

    let incorrect_trials = trials - correct_trials;
    let mean_correct_cost = if correct_trials > 0 {
        correct_sum / correct_trials as f64
    } else {
        0.0
    };
    if correct_trials > 0 {
        let bound = schedule.c_max() * (1.0 + 3.0 / (trials as f64).sqrt());
        assert!(
            mean_correct_cost <= bound,
            "mean correct-login cost {mean_correct_cost} exceeds budget bound {bound}"
        );
    }
    Ok(WorkloadStats {
        trials,
        correct_trials,
        incorrect_trials,
        mean_registration_cost: registration_sum / trials as f64,
        mean_correct_cost,
        mean_incorrect_cost: if incorrect_trials > 0 {
            incorrect_sum / incorrect_trials as f64
        } else {
            0.0
        },
        mean_overall_cost: overall_sum / trials as f64,
        c_max: schedule.c_max(),
    })
}

/// Recovers how many labels a registration computed from its cost (costs are
/// strictly increasing in the index, so the match is unambiguous).
fn labels_for_cost(schedule: &BreakpointSchedule, cost: f64) -> usize {
    for j in 1..=schedule.m() {
        if schedule.cumulative_cost(j) == cost {
            return j;
        }
    }
    schedule.m()
}

// ---------------------------------------------------------------------------
