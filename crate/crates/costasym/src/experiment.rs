//! Experiment runners and report emission: value sweeps across schedule
//! families, defender optimization runs, and deterministic CSV/JSON output
//! annotated with corpus confidence regions.

use serde::Serialize;

use crate::attacker::{best_response, deterministic_best_response, BestResponse, Certificate};
use crate::corpus::{confidence_regions, ConfidenceRegion, EquivalenceSets};
use crate::defender::{optimize_distribution, DistributionProblem, DistributionResult};
use crate::game::{BreakpointKind, BreakpointSchedule, GameConfig, Scaling};
use crate::oracle::{enumerate_optimal, OracleLimits};
use crate::Error;

/// A schedule family to sweep: breakpoint placement, count, halting
/// distribution (`None` = uniform), and budget.
#[derive(Debug, Clone)]
pub struct ScheduleSpec {
    pub kind: BreakpointKind,
    pub m: usize,
    pub q: Option<Vec<f64>>,
    pub c_max: f64,
}

impl ScheduleSpec {
    /// Stable family label used in report rows.
    pub fn family_label(&self) -> &'static str {
        match self.kind {
            BreakpointKind::CostEven => "cost-even",
            BreakpointKind::TimeEven => "time-even",
            BreakpointKind::Custom(_) => "custom",
        }
    }

    /// Builds the schedule with a tight budget (expected workload = `c_max`).
    pub fn build(&self) -> Result<BreakpointSchedule, Error> {
        BreakpointSchedule::new(
            self.kind.clone(),
            self.m,
            self.q.as_deref(),
            self.c_max,
            Scaling::Tight,
        )
    }
}

/// One report row: a solved instance at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub v_over_cmax: f64,
    pub m: usize,
    pub schedule: String,
    pub q: String,
    pub success_rate: f64,
    pub utility: f64,
    pub prefix_len: usize,
    pub certificate: Certificate,
    pub region: ConfidenceRegion,
}

/// Report provenance. Deliberately excludes timestamps so identical inputs
/// give byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub corpus_id: String,
    pub seed: u64,
    pub tool_version: String,
}

/// A finished experiment: metadata plus rows sorted by
/// `(schedule, m, v_over_cmax)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub metadata: ReportMeta,
    pub rows: Vec<SweepRow>,
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn region_label(region: ConfidenceRegion) -> &'static str {
    match region {
        ConfidenceRegion::Confident => "confident",
        ConfidenceRegion::Yellow => "yellow",
        ConfidenceRegion::Red => "red",
    }
}

/// Describes a halting distribution for a report row: `uniform`, or the
/// weights as a lossless semicolon-separated list (semicolons keep the CSV
/// field atomic).
fn q_descriptor(schedule: &BreakpointSchedule) -> String {
    if schedule.is_uniform() {
        "uniform".to_string()
    } else {
        schedule
            .q()
            .iter()
            .map(|&x| fmt_float(x))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl SweepReport {
    /// Renders the fixed-header CSV form. Floats carry 17 significant
    /// digits, enough to round-trip `f64` exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "v_over_cmax,m,schedule,q,success_rate,utility,prefix_len,certificate,region\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt_float(r.v_over_cmax),
                r.m,
                r.schedule,
                r.q,
                fmt_float(r.success_rate),
                fmt_float(r.utility),
                r.prefix_len,
                r.certificate.as_str(),
                region_label(r.region),
            ));
        }
        out
    }

    /// Renders the JSON form: metadata plus the same rows as the CSV.
    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }
}

fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.schedule
            .cmp(&b.schedule)
            .then(a.m.cmp(&b.m))
            .then(a.v_over_cmax.total_cmp(&b.v_over_cmax))
    });
}

/// Solves one instance and renders it as a row. A locally-optimal answer is
/// upgraded to the exhaustive one when the instance is small enough, so
/// `local_only` rows appear only where enumeration is genuinely out of
/// reach.
fn evaluate_row(
    config: GameConfig,
    m: usize,
    schedule_label: &str,
    q_desc: &str,
    region: ConfidenceRegion,
    limits: OracleLimits,
) -> Result<SweepRow, Error> {
    let mut resp: BestResponse = best_response(config)?;
    if resp.certificate == Certificate::LocalOnly
        && config.n_p() <= limits.max_n_p
        && config.m() <= limits.max_m
    {
        resp = enumerate_optimal(config, limits)?;
    }
    Ok(SweepRow {
        v_over_cmax: config.v / config.schedule.c_max(),
        m,
        schedule: schedule_label.to_string(),
        q: q_desc.to_string(),
        success_rate: resp.success_rate,
        utility: resp.utility,
        prefix_len: resp.seq.prefix_len(),
        certificate: resp.certificate,
        region,
    })
}

fn validate_grid(v_grid: &[f64]) -> Result<(), Error> {
    for w in v_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(format!(
                "value grid must be strictly ascending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(&first) = v_grid.first() {
        if !(first > 0.0) || v_grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "value grid entries must be positive and finite".into(),
            ));
        }
    }
    Ok(())
}

/// Sweeps the attacker's best response across a value grid.
///
/// Each grid point yields two rows: the single-breakpoint baseline
/// (`schedule = "deterministic"`, `m = 1`) and the randomized schedule under
/// test. Every row carries the corpus's confidence region. Deterministic
/// given inputs; the seed is recorded for provenance.
pub fn run_sweep(
    corpus: &EquivalenceSets,
    corpus_id: &str,
    spec: &ScheduleSpec,
    v_grid: &[f64],
    seed: u64,
    limits: OracleLimits,
) -> Result<SweepReport, Error> {
    validate_grid(v_grid)?;
    let schedule = spec.build()?;
    let dist = corpus.to_distribution();
    let region = confidence_regions(corpus, &[0.5])?.regions[0];
    let q_desc = q_descriptor(&schedule);

    let mut rows = Vec::with_capacity(v_grid.len() * 2);
    for &v in v_grid {
        let base = deterministic_best_response(v, spec.c_max, &dist)?;
        rows.push(SweepRow {
            v_over_cmax: v / spec.c_max,
            m: 1,
            schedule: "deterministic".to_string(),
            q: "uniform".to_string(),
            success_rate: base.success_rate,
            utility: base.utility,
            prefix_len: base.seq.prefix_len(),
            certificate: base.certificate,
            region,
        });
        let config = GameConfig::new(v, &schedule, &dist);
        rows.push(evaluate_row(
            config,
            spec.m,
            spec.family_label(),
            &q_desc,
            region,
            limits,
        )?);
    }
    sort_rows(&mut rows);
    Ok(SweepReport {
        metadata: ReportMeta {
            corpus_id: corpus_id.to_string(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        rows,
    })
}

/// Optimizes the halting distribution for one value and reports the
/// optimized schedule next to the uniform one.
///
/// The cost scale is fixed at the uniform schedule's tight value, so uniform
/// sits exactly on the workload boundary and the optimizer explores
/// distributions under the same budget. Returns the optimizer's result plus
/// a two-row report (uniform first, then optimized).
pub fn run_optimize(
    corpus: &EquivalenceSets,
    corpus_id: &str,
    kind: BreakpointKind,
    m: usize,
    v: f64,
    c_max: f64,
    budget: usize,
    seed: u64,
    limits: OracleLimits,
) -> Result<(DistributionResult, SweepReport), Error> {
    let uniform = BreakpointSchedule::new(kind.clone(), m, None, c_max, Scaling::Tight)?;
    let alpha = uniform.alpha();
    let dist = corpus.to_distribution();
    let problem = DistributionProblem::new(
        v,
        uniform.betas().to_vec(),
        c_max,
        alpha,
        &dist,
        budget,
        seed,
    )?;
    let result = optimize_distribution(&problem)?;

    let region = confidence_regions(corpus, &[0.5])?.regions[0];
    let label = ScheduleSpec {
        kind,
        m,
        q: None,
        c_max,
    }
    .family_label();

    let uniform_row = evaluate_row(
        GameConfig::new(v, &uniform, &dist),
        m,
        label,
        "uniform",
        region,
        limits,
    )?;
    let optimized_schedule = BreakpointSchedule::with_q_unchecked(
        uniform.betas().to_vec(),
        result.q_star.clone(),
        c_max,
        alpha,
    );
    let optimized_row = evaluate_row(
        GameConfig::new(v, &optimized_schedule, &dist),
        m,
        label,
        &q_descriptor(&optimized_schedule),
        region,
        limits,
    )?;

    let report = SweepReport {
        metadata: ReportMeta {
            corpus_id: corpus_id.to_string(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        rows: vec![uniform_row, optimized_row],
    };
    Ok((result, report))
}

/// Parses a `start:stop:points` expression into a log-spaced grid.
/// `points = 1` collapses to `[start]`; otherwise endpoints are included.
pub fn parse_v_grid(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "value grid '{text}' must have the form start:stop:points"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad grid start '{}'", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad grid stop '{}'", parts[1])))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad grid point count '{}'", parts[2])))?;
    if !(start > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidParameter(format!(
            "value grid '{text}' needs 0 < start <= stop"
        )));
    }
    if points == 0 {
        return Err(Error::InvalidParameter(
            "value grid needs at least 1 point".into(),
        ));
    }
    if points == 1 || stop == start {
        return Ok(vec![start]);
    }
    let (ln_lo, ln_hi) = (start.ln(), stop.ln());
    let step = (ln_hi - ln_lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k == points - 1 {
                stop
            } else {
                (ln_lo + step * k as f64).exp()
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
