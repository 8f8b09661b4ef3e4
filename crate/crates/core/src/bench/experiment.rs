//! Monte Carlo experiments: every (engine, N, trial) combination is one
//! seeded, strictly sequential run; runs execute concurrently on a bounded
//! worker pool and each writes its own files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::exploration::{explore, Engine, ExplorationConfig};
use crate::grid::{write_pgm, CellIndex, GroundTruthGrid};

use super::log::{fmt_f64, read_step_rows, summarize_runs, write_summaries, RunSummary, StepRow};
use super::maps::{load_map, MapKind};
use super::ExplorationLog;

/// Environment variable holding the worker count (default: all cores).
pub const WORKERS_ENV: &str = "BKI_EXPLORE_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    Generated(MapKind),
    Pgm(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub map: MapSource,
    pub width_m: f64,
    pub height_m: f64,
    pub resolution_m: f64,
    pub map_seed: u64,
    /// Defaults to the generator's start, or a free cell near the center of
    /// a loaded map.
    pub start: Option<Action>,
    pub engines: Vec<Engine>,
    pub n_values: Vec<usize>,
    /// `8 · N` when unset.
    pub n_query: Option<usize>,
    /// Engine default when unset.
    pub epochs: Option<usize>,
    pub trials: usize,
    pub seed_base: u64,
    pub out_dir: PathBuf,
    /// Remaining exploration settings shared by every run.
    pub template: ExplorationConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            map: MapSource::Generated(MapKind::Structured),
            width_m: 24.0,
            height_m: 14.0,
            resolution_m: 0.2,
            map_seed: 1,
            start: None,
            engines: Engine::ALL.to_vec(),
            n_values: vec![30, 60],
            n_query: None,
            epochs: None,
            trials: 20,
            seed_base: 0,
            out_dir: PathBuf::from("results"),
            template: ExplorationConfig::for_engine(Engine::BkiBo, 30),
        }
    }
}

impl ExperimentSpec {
    pub fn validated(self) -> Result<Self> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.engines.is_empty() || self.n_values.is_empty() {
            return Err(Error::InvalidArgument("engine and N lists must be non-empty".into()));
        }
        if self.n_values.contains(&0) || self.n_query == Some(0) || self.epochs == Some(0) {
            return Err(Error::InvalidArgument("N, N_q and epochs must be >= 1".into()));
        }
        self.template.clone().validated()?;
        Ok(self)
    }

    /// Exploration settings for one run.
    pub fn config_for(&self, engine: Engine, n: usize, seed: u64) -> ExplorationConfig {
        ExplorationConfig {
            engine,
            n_train: n,
            n_query: self.n_query.unwrap_or(8 * n),
            epochs: self.epochs.unwrap_or_else(|| engine.default_epochs(n)),
            rng_seed: seed,
            ..self.template.clone()
        }
    }

    pub fn build_map(&self) -> Result<GroundTruthGrid> {
        match &self.map {
            MapSource::Generated(kind) => kind.generate(self.width_m, self.height_m, self.resolution_m, self.map_seed),
            MapSource::Pgm(path) => load_map(path, self.resolution_m),
        }
    }

    pub fn start_for(&self, truth: &GroundTruthGrid) -> Result<Action> {
        if let Some(s) = self.start {
            return Ok(s);
        }
        match &self.map {
            MapSource::Generated(kind) => Ok(kind.default_start(self.height_m)),
            MapSource::Pgm(_) => central_free_pose(truth),
        }
    }

    /// All runs in deterministic order: engine, then N, then trial.
    pub fn jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for &engine in &self.engines {
            for &n in &self.n_values {
                for trial in 0..self.trials {
                    jobs.push(Job { engine, n, trial, seed: self.seed_base + trial as u64 });
                }
            }
        }
        jobs
    }
}

/// Free cell closest to the map center whose 8 neighbours are free too.
pub fn central_free_pose(truth: &GroundTruthGrid) -> Result<Action> {
    let geo = *truth.geometry();
    let (cx, cy) = (geo.width as f64 / 2.0, geo.height as f64 / 2.0);
    let roomy = |cell: CellIndex| !truth.is_occupied(cell) && geo.neighbors8(cell).all(|n| !truth.is_occupied(n));
    let best = (0..geo.len())
        .map(|i| geo.cell_at(i))
        .filter(|&c| roomy(c))
        .min_by(|a, b| {
            let d = |c: &CellIndex| (c.col as f64 + 0.5 - cx).hypot(c.row as f64 + 0.5 - cy);
            d(a).total_cmp(&d(b))
        })
        .ok_or_else(|| Error::InvalidPose("map has no free cell to start from".into()))?;
    let (x, y) = geo.cell_center(best);
    Ok(Action::new(x, y, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub engine: Engine,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
}

impl Job {
    pub fn file_stem(&self) -> String {
        format!("{}_N{}_t{:03}", self.engine.tag(), self.n, self.trial)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub job: Job,
    pub log: std::result::Result<ExplorationLog, String>,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    /// Pooled per-(method, N) summaries in canonical method order, then N.
    pub summaries: Vec<RunSummary>,
}

impl ExperimentReport {
    pub fn failures(&self) -> impl Iterator<Item = (&Job, &str)> {
        self.runs.iter().filter_map(|r| r.log.as_ref().err().map(|e| (&r.job, e.as_str())))
    }
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::InvalidArgument(format!("{WORKERS_ENV}='{v}' is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_run_files(dir: &Path, stem: &str, log: &ExplorationLog) -> Result<()> {
    fs::create_dir_all(dir.join("steps"))?;
    fs::create_dir_all(dir.join("decisions"))?;
    write_file(&dir.join("steps").join(format!("{stem}.csv")), |w| log.write_steps_csv(w))?;
    write_file(&dir.join("decisions").join(format!("{stem}.csv")), |w| log.write_decisions_csv(w))
}

fn run_job(spec: &ExperimentSpec, truth: &GroundTruthGrid, start: &Action, job: &Job) -> Result<ExplorationLog> {
    let cfg = spec.config_for(job.engine, job.n, job.seed);
    let mut log = explore(&cfg, truth, start)?;
    log.trial = job.trial;
    write_run_files(&spec.out_dir, &job.file_stem(), &log)?;
    Ok(log)
}

/// Runs every job of `spec`. A failing run is recorded in `failures.csv`
/// and does not stop the others.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let spec = spec.clone().validated()?;
    let truth = spec.build_map()?;
    let start = spec.start_for(&truth)?;
    fs::create_dir_all(&spec.out_dir)?;
    write_file(&spec.out_dir.join("map.pgm"), |w| write_pgm(&truth, w, true))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let jobs = spec.jobs();
    let runs: Vec<RunOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|job| RunOutcome {
                job: *job,
                log: run_job(&spec, &truth, &start, job).map_err(|e| e.to_string()),
            })
            .collect()
    });

    // single-writer merge
    let mut per_run = Vec::new();
    let mut grouped: Vec<((Engine, usize), Vec<Vec<StepRow>>)> = Vec::new();
    for r in &runs {
        let Ok(log) = &r.log else { continue };
        let rows = log.rows();
        per_run.push((r.job, summarize_runs(std::slice::from_ref(&rows))));
        let key = (r.job.engine, r.job.n);
        match grouped.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(rows),
            None => grouped.push((key, vec![rows])),
        }
    }
    grouped.sort_by_key(|((engine, n), _)| (engine_order(engine.tag()), *n));
    let summaries: Vec<RunSummary> = grouped.iter().map(|(_, runs)| summarize_runs(runs)).collect();
    write_file(&spec.out_dir.join("summary.csv"), |w| write_summaries(&summaries, w))?;
    write_file(&spec.out_dir.join("run_summary.csv"), |w| write_run_summaries(&per_run, w))?;

    let report = ExperimentReport { runs, summaries };
    write_file(&spec.out_dir.join("failures.csv"), |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["method", "N", "trial", "seed", "error"])?;
        for (job, err) in report.failures() {
            c.write_record([
                job.engine.tag().to_string(),
                job.n.to_string(),
                job.trial.to_string(),
                job.seed.to_string(),
                err.to_string(),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(report)
}

/// Canonical reporting order of methods.
fn engine_order(tag: &str) -> usize {
    Engine::ALL.iter().position(|e| e.tag() == tag).unwrap_or(usize::MAX)
}

fn write_run_summaries(per_run: &[(Job, RunSummary)], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "N",
        "trial",
        "seed",
        "steps",
        "mean_total_s",
        "std_total_s",
        "inference_share_pct",
        "final_entropy_bits",
        "final_coverage",
    ])?;
    for (job, s) in per_run {
        w.write_record([
            s.method.clone(),
            s.n_train.to_string(),
            job.trial.to_string(),
            job.seed.to_string(),
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

/// Recomputes pooled per-(method, N) summaries from the per-step CSVs in
/// `in_dir` (or its `steps/` subdirectory) and writes them to `out`.
pub fn summarize(in_dir: &Path, out: &Path) -> Result<Vec<RunSummary>> {
    let steps = in_dir.join("steps");
    let dir = if steps.is_dir() { steps } else { in_dir.to_path_buf() };
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();

    let mut groups: BTreeMap<(usize, String, usize), Vec<Vec<StepRow>>> = BTreeMap::new();
    for p in &paths {
        let rows = read_step_rows(File::open(p)?)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))?;
        let Some(first) = rows.first() else { continue };
        let key = (engine_order(&first.method), first.method.clone(), first.n_train);
        groups.entry(key).or_default().push(rows);
    }
    if groups.is_empty() {
        return Err(Error::InvalidArgument(format!("no step CSVs in {}", dir.display())));
    }
    let summaries: Vec<RunSummary> = groups.values().map(|runs| summarize_runs(runs)).collect();
    write_file(out, |w| write_summaries(&summaries, w))?;
    Ok(summaries)
}
