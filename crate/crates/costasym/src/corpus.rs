//! Password frequency corpora.
//!
//! A corpus is stored compactly as *equivalence sets*: `(frequency,
//! multiplicity)` pairs meaning "`multiplicity` distinct passwords were each
//! observed `frequency` times", sorted by strictly decreasing frequency. The
//! empirical distribution assigns each password in set `k` probability
//! `frequency_k / n_a`, where `n_a` is the total number of observed accounts.
//!
//! Equal-probability passwords are interchangeable to the attacker, so most
//! of the search machinery only ever needs the set boundaries
//! `x_0 = 0 < x_1 < … < x_{n_e} = n_p` of the expanded distribution.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, FEAS_EPS};

/// One group of distinct passwords sharing an observed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivalenceEntry {
    /// Number of accounts that chose each password in this set.
    pub frequency: u64,
    /// Number of distinct passwords observed with this frequency.
    pub multiplicity: u64,
}

/// A frequency corpus in equivalence-set form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceSets {
    entries: Vec<EquivalenceEntry>,
    n_a: u64,
    n_p: u64,
}

/// Input formats accepted by [`EquivalenceSets::parse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// Lines of `frequency multiplicity`; blank lines and `#` comments ignored.
    EquivalenceSets,
    /// One password per line; frequencies are counted, blank lines skipped.
    Plaintext,
}

impl EquivalenceSets {
    /// Builds a corpus from raw `(frequency, multiplicity)` pairs.
    ///
    /// Duplicate frequencies are merged by summing multiplicities; entries are
    /// sorted by decreasing frequency. Zero frequencies or multiplicities are
    /// rejected, as is an empty input.
    pub fn new(raw: Vec<(u64, u64)>) -> Result<Self, Error> {
        let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
        for (frequency, multiplicity) in raw {
            if frequency == 0 || multiplicity == 0 {
                return Err(Error::InvalidParameter(format!(
                    "equivalence entry ({frequency}, {multiplicity}) must be positive"
                )));
            }
            *merged.entry(frequency).or_insert(0) += multiplicity;
        }
        if merged.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut entries = Vec::with_capacity(merged.len());
        let mut n_a: u64 = 0;
        let mut n_p: u64 = 0;
        for (&frequency, &multiplicity) in merged.iter().rev() {
            entries.push(EquivalenceEntry {
                frequency,
                multiplicity,
            });
            n_a = n_a
                .checked_add(frequency.checked_mul(multiplicity).ok_or_else(|| {
                    Error::InvalidParameter("corpus account count overflows u64".into())
                })?)
                .ok_or_else(|| {
                    Error::InvalidParameter("corpus account count overflows u64".into())
                })?;
            n_p += multiplicity;
        }
        Ok(EquivalenceSets { entries, n_a, n_p })
    }

    /// Entries sorted by strictly decreasing frequency.
    pub fn entries(&self) -> &[EquivalenceEntry] {
        &self.entries
    }

    /// Total observed accounts `n_a` (sum of `frequency * multiplicity`).
    pub fn account_count(&self) -> u64 {
        self.n_a
    }

    /// Total distinct passwords `n_p`.
    pub fn distinct_count(&self) -> u64 {
        self.n_p
    }

    /// Number of equivalence sets `n_e`.
    pub fn set_count(&self) -> usize {
        self.entries.len()
    }

    /// Number of distinct passwords observed exactly once.
    pub fn singleton_count(&self) -> u64 {
        self.entries
            .iter()
            .find(|e| e.frequency == 1)
            .map_or(0, |e| e.multiplicity)
    }

    /// Parses a corpus from a reader in the given format.
    pub fn parse<R: BufRead>(reader: R, format: CorpusFormat) -> Result<Self, Error> {
        match format {
            CorpusFormat::EquivalenceSets => Self::parse_equivalence_sets(reader),
            CorpusFormat::Plaintext => Self::parse_plaintext(reader),
        }
    }

    fn parse_equivalence_sets<R: BufRead>(reader: R) -> Result<Self, Error> {
        let mut raw = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let body = match line.find('#') {
                Some(pos) => &line[..pos],
                None => &line[..],
            };
            let body = body.trim();
            if body.is_empty() {
                continue;
            }
            let mut fields = body.split_whitespace();
            let (freq, mult) = match (fields.next(), fields.next(), fields.next()) {
                (Some(f), Some(s), None) => (f, s),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected `frequency multiplicity`, got {body:?}"),
                    })
                }
            };
            let frequency: u64 = freq.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid frequency {freq:?}"),
            })?;
            let multiplicity: u64 = mult.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid multiplicity {mult:?}"),
            })?;
            if frequency == 0 || multiplicity == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: "frequency and multiplicity must be positive".into(),
                });
            }
            raw.push((frequency, multiplicity));
        }
        if raw.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Self::new(raw)
    }

    fn parse_plaintext<R: BufRead>(reader: R) -> Result<Self, Error> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for line in reader.lines() {
            let pw = line?;
            if pw.is_empty() {
                continue;
            }
            *counts.entry(pw).or_insert(0) += 1;
        }
        if counts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut by_frequency: BTreeMap<u64, u64> = BTreeMap::new();
        for count in counts.into_values() {
            *by_frequency.entry(count).or_insert(0) += 1;
        }
        Self::new(by_frequency.into_iter().collect())
    }

    /// Writes the corpus in equivalence-set format (`frequency multiplicity`
    /// per line, decreasing frequency). Parsing the output reproduces `self`.
    pub fn write_to<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for entry in &self.entries {
            writeln!(writer, "{} {}", entry.frequency, entry.multiplicity)?;
        }
        Ok(())
    }

    /// Expands the corpus into the empirical password distribution.
    pub fn to_distribution(&self) -> PasswordDistribution {
        let n_a = self.n_a as f64;
        let mut probs = Vec::with_capacity(self.n_p as usize);
        let mut boundaries = Vec::with_capacity(self.entries.len() + 1);
        boundaries.push(0);
        for entry in &self.entries {
            let p = entry.frequency as f64 / n_a;
            for _ in 0..entry.multiplicity {
                probs.push(p);
            }
            boundaries.push(probs.len());
        }
        PasswordDistribution::from_parts(probs, boundaries)
    }
}

// ---------------------------------------------------------------------------
// Expanded distribution
// ---------------------------------------------------------------------------

/// An expanded password distribution: per-password probabilities sorted in
/// non-increasing order, together with the equivalence-set boundaries.
///
/// Passwords are indexed from 0 in this API. `prefix_mass(i)` is the total
/// probability of the first `i` passwords, computed with compensated
/// summation so that a complete corpus sums to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct PasswordDistribution {
    probs: Vec<f64>,
    boundaries: Vec<usize>,
    prefix_mass: Vec<f64>,
}

impl PasswordDistribution {
    /// Builds a distribution from raw probabilities.
    ///
    /// Probabilities must be strictly positive, non-increasing, and sum to at
    /// most 1 (+1e-9); partial distributions are allowed. Equivalence-set
    /// boundaries are derived by grouping equal adjacent probabilities.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, Error> {
        if probs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "password probability {p} at index {i} must be positive and finite"
                )));
            }
            if i > 0 && p > probs[i - 1] {
                return Err(Error::InvalidParameter(format!(
                    "password probabilities must be non-increasing (index {i})"
                )));
            }
        }
        let mut boundaries = vec![0];
        for i in 1..probs.len() {
            if probs[i] != probs[i - 1] {
                boundaries.push(i);
            }
        }
        boundaries.push(probs.len());
        let dist = Self::from_parts(probs, boundaries);
        if dist.total_mass() > 1.0 + FEAS_EPS {
            return Err(Error::InvalidParameter(format!(
                "password probabilities sum to {} > 1",
                dist.total_mass()
            )));
        }
        Ok(dist)
    }

    fn from_parts(probs: Vec<f64>, boundaries: Vec<usize>) -> Self {
        // Kahan summation keeps the prefix masses accurate on large corpora.
        let mut prefix_mass = Vec::with_capacity(probs.len() + 1);
        prefix_mass.push(0.0);
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for &p in &probs {
            let y = p - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            prefix_mass.push(sum);
        }
        PasswordDistribution {
            probs,
            boundaries,
            prefix_mass,
        }
    }

    /// Per-password probabilities, non-increasing.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of password `i` (0-based).
    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Number of passwords `n_p`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// `true` if the distribution holds no passwords (never constructible).
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Equivalence-set boundaries `x_0 = 0 < x_1 < … < x_{n_e} = n_p`.
    ///
    /// Prefix lengths of optimal checking sequences always lie on one of
    /// these indices: inside a set every password looks identical, so a
    /// rational attacker either finishes the set or does not start it.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// `true` if `len` is an equivalence-set boundary (0 and `n_p` included).
    pub fn is_boundary(&self, len: usize) -> bool {
        self.boundaries.binary_search(&len).is_ok()
    }

    /// Total probability of the first `i` passwords.
    pub fn prefix_mass(&self, i: usize) -> f64 {
        self.prefix_mass[i]
    }

    /// Total probability mass of the whole distribution.
    pub fn total_mass(&self) -> f64 {
        *self.prefix_mass.last().unwrap()
    }
}

// ---------------------------------------------------------------------------
// Tail-confidence annotation
// ---------------------------------------------------------------------------

/// Trust classification for success-rate estimates derived from a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceRegion {
    /// The empirical estimate is trustworthy.
    Confident,
    /// The unseen-mass bound is material; treat estimates with caution.
    Yellow,
    /// The unseen-mass bound dominates; estimates are unreliable.
    Red,
}

/// Divergence bound and per-cutoff regions produced by [`confidence_regions`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceAnnotation {
    /// Upper bound `E` on the gap between empirical and true success rates,
    /// one entry per requested cutoff. The bound depends only on the corpus,
    /// so every entry carries the same value; it is repeated per cutoff to
    /// keep the annotation aligned with its inputs.
    pub divergence_bounds: Vec<f64>,
    /// Region classification per cutoff.
    pub regions: Vec<ConfidenceRegion>,
    /// `(yellow, red)` thresholds applied to `E`.
    pub thresholds: (f64, f64),
}

const YELLOW_THRESHOLD: f64 = 0.01;
const RED_THRESHOLD: f64 = 0.1;
const CONFIDENCE_DELTA: f64 = 0.01;

/// Good-Turing style upper bound on how far empirical guessing curves can sit
/// from the true distribution: `E = N_1/n_a + 3*sqrt(ln(2/delta)/n_a)` with
/// `delta = 0.01`, where `N_1` is the number of passwords observed exactly once.
pub fn divergence_bound(corpus: &EquivalenceSets) -> Result<f64, Error> {
    let n_a = corpus.account_count();
    if n_a == 0 {
        return Err(Error::EmptyCorpus);
    }
    let n_a = n_a as f64;
    let n1 = corpus.singleton_count() as f64;
    Ok(n1 / n_a + 3.0 * ((2.0 / CONFIDENCE_DELTA).ln() / n_a).sqrt())
}

/// Classifies the trust region for each requested success-rate cutoff.
///
/// Cutoffs must lie in `[0, 1]`. The same corpus-wide bound `E` is applied to
/// every cutoff: `E ≤ 0.01` is confident, `0.01 < E ≤ 0.1` yellow, `E > 0.1`
/// red.
pub fn confidence_regions(
    corpus: &EquivalenceSets,
    cutoffs: &[f64],
) -> Result<ConfidenceAnnotation, Error> {
    for &c in cutoffs {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!(
                "cutoff {c} outside [0, 1]"
            )));
        }
    }
    let e = divergence_bound(corpus)?;
    let region = classify(e);
    Ok(ConfidenceAnnotation {
        divergence_bounds: vec![e; cutoffs.len()],
        regions: vec![region; cutoffs.len()],
        thresholds: (YELLOW_THRESHOLD, RED_THRESHOLD),
    })
}

pub(crate) fn classify(e: f64) -> ConfidenceRegion {
    if e > RED_THRESHOLD {
        ConfidenceRegion::Red
    } else if e > YELLOW_THRESHOLD {
        ConfidenceRegion::Yellow
    } else {
        ConfidenceRegion::Confident
    }
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

/// Samples `n_a` accounts from a Zipf law with support `n_p` and exponent `s`
/// (`P(k) ∝ 1/k^s`; `s = 0` is uniform) and returns the realized corpus.
///
/// Sampling is fully deterministic given `seed`. Ranks never drawn simply do
/// not appear, so fewer than `n_p` distinct passwords may be realized; that
/// is expected behavior for small `n_a`.
pub fn gen_zipf(n_p: u64, s: f64, n_a: u64, seed: u64) -> Result<EquivalenceSets, Error> {
    if n_p == 0 {
        return Err(Error::InvalidParameter("n_p must be at least 1".into()));
    }
    if n_a == 0 {
        return Err(Error::InvalidParameter("n_a must be at least 1".into()));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "zipf exponent {s} must be finite and non-negative"
        )));
    }
    let n = usize::try_from(n_p)
        .map_err(|_| Error::InvalidParameter("n_p too large for this platform".into()))?;
    let mut cdf = Vec::with_capacity(n);
    let mut total = 0.0f64;
    for k in 1..=n {
        total += (k as f64).powf(-s);
        cdf.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n];
    for _ in 0..n_a {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c < u).min(n - 1);
        counts[idx] += 1;
    }
    let mut by_frequency: BTreeMap<u64, u64> = BTreeMap::new();
    for &c in &counts {
        if c > 0 {
            *by_frequency.entry(c).or_insert(0) += 1;
        }
    }
    EquivalenceSets::new(by_frequency.into_iter().collect())
}

// ---------------------------------------------------------------------------
