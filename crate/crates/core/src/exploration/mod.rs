//! The exploration loop: sample candidate actions, evaluate a batch
//! explicitly, let an engine pick an action, commit it if it clears the
//! information threshold (otherwise backtrack), then drive there along an A*
//! path while scanning.

mod astar;
mod optimize;
mod sampling;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use astar::{astar, astar_with, path_cost, Traversability};
pub use optimize::{
    argmax, bki_optimize, gp_optimize, objective, objective_with, surrogate_optimize, BkiSurrogate,
    GpSurrogate, OptimizeOutcome, Surrogate, UncertaintyTerm,
};
pub use sampling::{sample_actions, sample_actions_with, DEFAULT_MAX_SAMPLE_OCCUPANCY};

use crate::action::Action;
use crate::bench::{ExplorationLog, StepEvent, StepRecord, Termination};
use crate::bki::{BkiHyperparams, KernelSpec, TrainingSet};
use crate::error::{Error, Result};
use crate::grid::{CellIndex, GroundTruthGrid, InverseSensorModel, OccupancyGrid, DEFAULT_KNOWN_THRESHOLD};
use crate::mi::action_mi;
use crate::sensor::{integrate_scan, simulate_scan, SensorSpec};

/// Decision engine used after the explicit evaluation phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Explicitly evaluates every query too and takes the greedy argmax.
    Nbo,
    BatchGp,
    GpBo,
    BatchBki,
    BkiBo,
}

impl Engine {
    pub const ALL: [Engine; 5] = [
        Engine::Nbo,
        Engine::BatchGp,
        Engine::BatchBki,
        Engine::GpBo,
        Engine::BkiBo,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Engine::Nbo => "nbo",
            Engine::BatchGp => "batch_gp",
            Engine::GpBo => "gp_bo",
            Engine::BatchBki => "batch_bki",
            Engine::BkiBo => "bki_bo",
        }
    }

    pub fn is_batch(self) -> bool {
        matches!(self, Engine::BatchGp | Engine::BatchBki)
    }

    /// Epoch count used in the reference protocol: 1 for batch engines,
    /// `N / 2` for the BO engines.
    pub fn default_epochs(self, n_train: usize) -> usize {
        match self {
            Engine::GpBo | Engine::BkiBo => (n_train / 2).max(1),
            _ => 1,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match norm.as_str() {
            "nbo" => Engine::Nbo,
            "batch_gp" => Engine::BatchGp,
            "gp_bo" => Engine::GpBo,
            "batch_bki" => Engine::BatchBki,
            "bki_bo" => Engine::BkiBo,
            _ => return Err(Error::InvalidArgument(format!("unknown engine '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationConfig {
    pub engine: Engine,
    /// Actions evaluated explicitly per step.
    pub n_train: usize,
    /// Query actions handed to the engine per step.
    pub n_query: usize,
    pub epochs: usize,
    /// Trade-off between predicted MI and its uncertainty.
    pub alpha: f64,
    /// Minimum explicitly known MI (bits) to commit an action.
    pub info_threshold: f64,
    pub loop_limit: usize,
    pub kernel: KernelSpec,
    /// BKI prior; `sigma2` doubles as the GP noise variance.
    pub bki: BkiHyperparams,
    pub uncertainty: UncertaintyTerm,
    pub sensor: SensorSpec,
    pub sensor_model: InverseSensorModel,
    pub traversability: Traversability,
    pub max_sample_occupancy: f64,
    pub known_threshold: f64,
    /// Scan at every `scan_every`-th cell of an executed path.
    pub scan_every: usize,
    pub rng_seed: u64,
}

impl ExplorationConfig {
    /// Reference settings for `engine` with `n_train` explicit samples:
    /// `N_q = 8N`, alpha 0.5, threshold 0.05 bit, 50 loops.
    pub fn for_engine(engine: Engine, n_train: usize) -> Self {
        Self {
            engine,
            n_train,
            n_query: 8 * n_train,
            epochs: engine.default_epochs(n_train),
            alpha: 0.5,
            info_threshold: 0.05,
            loop_limit: 50,
            kernel: KernelSpec::default(),
            bki: BkiHyperparams::default(),
            uncertainty: UncertaintyTerm::Variance,
            sensor: SensorSpec::default(),
            sensor_model: InverseSensorModel::default(),
            traversability: Traversability::default(),
            max_sample_occupancy: DEFAULT_MAX_SAMPLE_OCCUPANCY,
            known_threshold: DEFAULT_KNOWN_THRESHOLD,
            scan_every: 1,
            rng_seed: 0,
        }
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        if self.n_train == 0 || self.n_query == 0 {
            return bad(format!("N = {} and N_q = {} must be >= 1", self.n_train, self.n_query));
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(self.info_threshold >= 0.0) {
            return bad(format!("information threshold {}", self.info_threshold));
        }
        if self.scan_every == 0 {
            return bad("scan_every must be >= 1".into());
        }
        if !(self.kernel.length_scale > 0.0) {
            return bad(format!("length scale {}", self.kernel.length_scale));
        }
        self.bki.validated()?;
        self.sensor.validated()?;
        Ok(self)
    }
}

/// Committed poses, most recent on top.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionStack {
    history: Vec<Action>,
}

impl ActionStack {
    pub fn new(start: Action) -> Self {
        Self { history: vec![start] }
    }

    pub fn push(&mut self, a: Action) {
        self.history.push(a);
    }

    pub fn pop(&mut self) -> Option<Action> {
        self.history.pop()
    }

    pub fn top(&self) -> Option<&Action> {
        self.history.last()
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

/// Mutable state of one run.
struct Explorer<'a> {
    cfg: &'a ExplorationConfig,
    truth: &'a GroundTruthGrid,
    grid: OccupancyGrid,
    pose: Action,
    stack: ActionStack,
    rng: ChaCha8Rng,
}

/// What the decision phase of one step produced.
struct Decision {
    best: Option<(Action, f64)>,
    explicit_eval_s: f64,
    inference_s: f64,
    explicit_evaluations: usize,
}

impl<'a> Explorer<'a> {
    fn scan(&mut self, pose: &Action) -> Result<()> {
        let scan = simulate_scan(self.truth, pose, &self.cfg.sensor)?;
        integrate_scan(&mut self.grid, &scan, &self.cfg.sensor_model)
    }

    fn evaluate(&self, a: &Action) -> Result<f64> {
        Ok(action_mi(&self.grid, a, &self.cfg.sensor)?.mi_bits)
    }

    fn sample(&mut self, count: usize) -> Result<Vec<Action>> {
        sample_actions_with(
            &self.grid,
            &self.pose,
            count,
            &self.cfg.sensor,
            self.cfg.max_sample_occupancy,
            &mut self.rng,
        )
    }

    fn decide(&mut self) -> Result<Decision> {
        let mut d = Decision {
            best: None,
            explicit_eval_s: 0.0,
            inference_s: 0.0,
            explicit_evaluations: 0,
        };
        let actions = match self.sample(self.cfg.n_train) {
            Ok(a) => a,
            Err(Error::Stuck) => return Ok(d),
            Err(e) => return Err(e),
        };

        let t = Instant::now();
        let mut train = TrainingSet::new();
        for a in &actions {
            train.add_sample(*a, self.evaluate(a)?)?;
        }
        d.explicit_eval_s = t.elapsed().as_secs_f64();
        d.explicit_evaluations = actions.len();

        let queries = match self.sample(self.cfg.n_query) {
            Ok(q) => q,
            Err(Error::Stuck) => Vec::new(),
            Err(e) => return Err(e),
        };

        let t = Instant::now();
        let outcome = match self.cfg.engine {
            Engine::Nbo => {
                let mut pool = train.clone();
                for q in &queries {
                    pool.add_sample(*q, self.evaluate(q)?)?;
                }
                let i = argmax(pool.values().iter().copied());
                OptimizeOutcome {
                    best_actions: i.map(|i| pool.actions()[i]).into_iter().collect(),
                    best_values: i.map(|i| pool.values()[i]).into_iter().collect(),
                    explicit_evaluations: queries.len(),
                }
            }
            Engine::BatchBki | Engine::BkiBo => {
                bki_optimize(&mut train, &queries, self.cfg, |a| self.evaluate(a))?
            }
            Engine::BatchGp | Engine::GpBo => {
                gp_optimize(&mut train, &queries, self.cfg, |a| self.evaluate(a))?
            }
        };
        d.inference_s = t.elapsed().as_secs_f64();
        d.explicit_evaluations += outcome.explicit_evaluations;
        d.best = outcome.best();
        Ok(d)
    }

    /// Drives along `path`, scanning on the way, and ends at `goal` facing
    /// its heading. Stops early in front of a cell that turns out blocked.
    fn drive(&mut self, path: &[CellIndex], goal: &Action) -> Result<bool> {
        let geo = *self.grid.geometry();
        for (i, pair) in path.windows(2).enumerate() {
            let (nx, ny) = geo.cell_center(pair[1]);
            let heading = (ny - self.pose.y_m).atan2(nx - self.pose.x_m);
            let here = Action::new(self.pose.x_m, self.pose.y_m, heading);
            self.pose = here;
            if i % self.cfg.scan_every == 0 {
                self.scan(&here)?;
            }
            let next_p = self.grid.probability(pair[1])?;
            if next_p > self.cfg.traversability.occupied_above || self.truth.is_occupied(pair[1]) {
                return Ok(false);
            }
            self.pose = Action::new(nx, ny, heading);
        }
        self.pose = *goal;
        self.scan(goal)?;
        Ok(true)
    }

    fn travel_to(&mut self, goal: &Action) -> Result<bool> {
        let path = astar_with(&self.grid, &self.pose, goal, &self.cfg.traversability)?;
        self.drive(&path, goal)
    }

    /// Pops the current pose and returns to the newest reachable entry.
    fn backtrack(&mut self) -> Result<Option<Action>> {
        self.stack.pop();
        while let Some(&prev) = self.stack.top() {
            match self.travel_to(&prev) {
                Ok(_) => return Ok(Some(prev)),
                Err(Error::PlanningFailure { .. }) => {
                    self.stack.pop();
                }
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }

    fn metrics(&self) -> Result<(f64, f64)> {
        Ok((
            self.grid.map_entropy(),
            self.grid.coverage(self.truth, self.cfg.known_threshold)?,
        ))
    }
}

/// Runs one exploration episode from `start` against `truth`.
///
/// The robot scans once at `start`, then loops while its action stack is
/// non-empty and fewer than `loop_limit` iterations have run.
pub fn explore(cfg: &ExplorationConfig, truth: &GroundTruthGrid, start: &Action) -> Result<ExplorationLog> {
    explore_with_snapshots(cfg, truth, start, |_, _| {})
}

/// [`explore`], calling `on_step(step, &grid)` with the belief map after
/// every iteration.
pub fn explore_with_snapshots<F>(
    cfg: &ExplorationConfig,
    truth: &GroundTruthGrid,
    start: &Action,
    mut on_step: F,
) -> Result<ExplorationLog>
where
    F: FnMut(usize, &OccupancyGrid),
{
    let cfg = &cfg.clone().validated()?;
    if !truth.is_free_at(start.x_m, start.y_m) {
        return Err(Error::InvalidPose(format!(
            "start ({}, {}) is not on a free cell",
            start.x_m, start.y_m
        )));
    }
    let mut ex = Explorer {
        cfg,
        truth,
        grid: truth.blank_belief(),
        pose: *start,
        stack: ActionStack::new(*start),
        rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
    };
    ex.scan(start)?;
    let (initial_entropy, initial_coverage) = ex.metrics()?;

    let mut log = ExplorationLog {
        method: cfg.engine.tag().to_string(),
        n_train: cfg.n_train,
        trial: 0,
        seed: cfg.rng_seed,
        initial_entropy_bits: initial_entropy,
        initial_coverage,
        records: Vec::new(),
        termination: Termination::LoopLimit,
    };

    let mut iter = 0;
    while !ex.stack.is_empty() && iter < cfg.loop_limit {
        let t = Instant::now();
        let d = ex.decide()?;
        let best_mi = d.best.map_or(0.0, |(_, v)| v);

        let (event, target) = match d.best {
            Some((action, mi)) if mi > cfg.info_threshold => match ex.travel_to(&action) {
                Ok(_) => {
                    ex.stack.push(ex.pose);
                    (StepEvent::Commit, Some(action))
                }
                Err(Error::PlanningFailure { .. }) => (StepEvent::Backtrack, ex.backtrack()?),
                Err(e) => return Err(e),
            },
            _ => (StepEvent::Backtrack, ex.backtrack()?),
        };
        let total_s = t.elapsed().as_secs_f64();

        let (entropy, coverage) = ex.metrics()?;
        log.records.push(StepRecord {
            step: iter,
            entropy_bits: entropy,
            coverage,
            explicit_eval_s: d.explicit_eval_s,
            inference_s: d.inference_s,
            total_s,
            event,
            target,
            best_mi_bits: best_mi,
            pose: ex.pose,
            explicit_evaluations: d.explicit_evaluations,
        });
        on_step(iter, &ex.grid);
        iter += 1;
    }
    if ex.stack.is_empty() {
        log.termination = Termination::StackEmpty;
    }
    Ok(log)
}
