use std::io::{Read, Write};

use crate::action::Action;
use crate::error::{Error, Result};

/// Column order of the per-step CSV.
pub const STEP_COLUMNS: [&str; 10] = [
    "method",
    "N",
    "trial",
    "seed",
    "step",
    "entropy_bits",
    "coverage",
    "explicit_eval_s",
    "inference_s",
    "total_s",
];

/// Columns of the decision-sequence CSV. None of them are timings.
pub const DECISION_COLUMNS: [&str; 14] = [
    "method",
    "N",
    "trial",
    "seed",
    "step",
    "event",
    "target_x_m",
    "target_y_m",
    "target_heading_rad",
    "best_mi_bits",
    "pose_x_m",
    "pose_y_m",
    "pose_heading_rad",
    "explicit_evaluations",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Commit,
    Backtrack,
}

impl StepEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            StepEvent::Commit => "commit",
            StepEvent::Backtrack => "backtrack",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Hit the iteration limit.
    LoopLimit,
    /// Backtracked past the start.
    StackEmpty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub entropy_bits: f64,
    pub coverage: f64,
    pub explicit_eval_s: f64,
    pub inference_s: f64,
    pub total_s: f64,
    pub event: StepEvent,
    /// Committed action, or the pose backtracked to (`None` if the stack ran out).
    pub target: Option<Action>,
    pub best_mi_bits: f64,
    /// Robot pose at the end of the step.
    pub pose: Action,
    pub explicit_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationLog {
    pub method: String,
    pub n_train: usize,
    pub trial: usize,
    pub seed: u64,
    pub initial_entropy_bits: f64,
    pub initial_coverage: f64,
    pub records: Vec<StepRecord>,
    pub termination: Termination,
}

/// One row of a per-step CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub method: String,
    pub n_train: usize,
    pub trial: usize,
    pub seed: u64,
    pub step: usize,
    pub entropy_bits: f64,
    pub coverage: f64,
    pub explicit_eval_s: f64,
    pub inference_s: f64,
    pub total_s: f64,
}

impl StepRow {
    /// Share of the step spent in inference, in percent.
    pub fn inference_share_pct(&self) -> f64 {
        if self.total_s > 0.0 {
            (100.0 * self.inference_s / self.total_s).clamp(0.0, 100.0)
        } else {
            0.0
        }
    }
}

/// Per-run (or pooled) timing and outcome statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub method: String,
    pub n_train: usize,
    pub runs: usize,
    pub steps: usize,
    pub mean_total_s: f64,
    pub std_total_s: f64,
    /// Mean over steps of `100 · inference_s / total_s`.
    pub inference_share_pct: f64,
    pub mean_final_entropy_bits: f64,
    pub mean_final_coverage: f64,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl ExplorationLog {
    pub fn rows(&self) -> Vec<StepRow> {
        self.records
            .iter()
            .map(|r| StepRow {
                method: self.method.clone(),
                n_train: self.n_train,
                trial: self.trial,
                seed: self.seed,
                step: r.step,
                entropy_bits: r.entropy_bits,
                coverage: r.coverage,
                explicit_eval_s: r.explicit_eval_s,
                inference_s: r.inference_s,
                total_s: r.total_s,
            })
            .collect()
    }

    pub fn final_entropy_bits(&self) -> f64 {
        self.records.last().map_or(self.initial_entropy_bits, |r| r.entropy_bits)
    }

    pub fn final_coverage(&self) -> f64 {
        self.records.last().map_or(self.initial_coverage, |r| r.coverage)
    }

    pub fn write_steps_csv(&self, out: impl Write) -> Result<()> {
        write_step_rows(&self.rows(), out)
    }

    pub fn write_decisions_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(DECISION_COLUMNS)?;
        for r in &self.records {
            let (tx, ty, th) = match r.target {
                Some(t) => (fmt_f64(t.x_m), fmt_f64(t.y_m), fmt_f64(t.heading_rad)),
                None => (String::new(), String::new(), String::new()),
            };
            w.write_record([
                self.method.clone(),
                self.n_train.to_string(),
                self.trial.to_string(),
                self.seed.to_string(),
                r.step.to_string(),
                r.event.as_str().to_string(),
                tx,
                ty,
                th,
                fmt_f64(r.best_mi_bits),
                fmt_f64(r.pose.x_m),
                fmt_f64(r.pose.y_m),
                fmt_f64(r.pose.heading_rad),
                r.explicit_evaluations.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> RunSummary {
        summarize_runs(&[self.rows()])
    }
}

pub fn write_step_rows(rows: &[StepRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.n_train.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.step.to_string(),
            fmt_f64(r.entropy_bits),
            fmt_f64(r.coverage),
            fmt_f64(r.explicit_eval_s),
            fmt_f64(r.inference_s),
            fmt_f64(r.total_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_step_rows(input: impl Read) -> Result<Vec<StepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(STEP_COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            offset: 0,
            message: format!("unexpected step CSV header {:?}", headers),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| Error::Parse {
                offset,
                message: format!("column {} is not a number: '{}'", STEP_COLUMNS[i], field(i)),
            })
        };
        let int = |i: usize| -> Result<u64> {
            field(i).parse().map_err(|_| Error::Parse {
                offset,
                message: format!("column {} is not an integer: '{}'", STEP_COLUMNS[i], field(i)),
            })
        };
        rows.push(StepRow {
            method: field(0).to_string(),
            n_train: int(1)? as usize,
            trial: int(2)? as usize,
            seed: int(3)?,
            step: int(4)? as usize,
            entropy_bits: num(5)?,
            coverage: num(6)?,
            explicit_eval_s: num(7)?,
            inference_s: num(8)?,
            total_s: num(9)?,
        });
    }
    Ok(rows)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Pools the steps of several runs of one method. Final entropy/coverage are
/// averaged over runs.
pub fn summarize_runs(runs: &[Vec<StepRow>]) -> RunSummary {
    let first = runs.iter().flat_map(|r| r.first()).next();
    let totals: Vec<f64> = runs.iter().flatten().map(|r| r.total_s).collect();
    let shares: Vec<f64> = runs.iter().flatten().map(StepRow::inference_share_pct).collect();
    let (mean_total_s, std_total_s) = mean_std(&totals);
    let finals: Vec<&StepRow> = runs.iter().filter_map(|r| r.last()).collect();
    let (mean_final_entropy_bits, _) = mean_std(&finals.iter().map(|r| r.entropy_bits).collect::<Vec<_>>());
    let (mean_final_coverage, _) = mean_std(&finals.iter().map(|r| r.coverage).collect::<Vec<_>>());
    RunSummary {
        method: first.map(|r| r.method.clone()).unwrap_or_default(),
        n_train: first.map_or(0, |r| r.n_train),
        runs: runs.len(),
        steps: totals.len(),
        mean_total_s,
        std_total_s,
        inference_share_pct: mean_std(&shares).0,
        mean_final_entropy_bits,
        mean_final_coverage,
    }
}

pub const SUMMARY_COLUMNS: [&str; 9] = [
    "method",
    "N",
    "runs",
    "steps",
    "mean_total_s",
    "std_total_s",
    "inference_share_pct",
    "mean_final_entropy_bits",
    "mean_final_coverage",
];

pub fn write_summaries(summaries: &[RunSummary], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for s in summaries {
        w.write_record([
            s.method.clone(),
            s.n_train.to_string(),
            s.runs.to_string(),
            s.steps.to_string(),
            fmt_f64(s.mean_total_s),
            fmt_f64(s.std_total_s),
            fmt_f64(s.inference_share_pct),
            fmt_f64(s.mean_final_entropy_bits),
            fmt_f64(s.mean_final_coverage),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summaries(input: impl Read) -> Result<Vec<RunSummary>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let bad = |i: usize| Error::Parse {
            offset,
            message: format!("bad summary field {}", SUMMARY_COLUMNS[i]),
        };
        let f = |i: usize| -> Result<f64> { rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| bad(i)) };
        let u = |i: usize| -> Result<usize> { rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| bad(i)) };
        out.push(RunSummary {
            method: rec.get(0).unwrap_or("").to_string(),
            n_train: u(1)?,
            runs: u(2)?,
            steps: u(3)?,
            mean_total_s: f(4)?,
            std_total_s: f(5)?,
            inference_share_pct: f(6)?,
            mean_final_entropy_bits: f(7)?,
            mean_final_coverage: f(8)?,
        });
    }
    Ok(out)
}
