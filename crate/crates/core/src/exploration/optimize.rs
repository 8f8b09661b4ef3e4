//! Surrogate-driven action selection over a pool of query actions.

use crate::action::Action;
use crate::bki::{bki_predict, BkiHyperparams, KernelSpec, MiPrediction, TrainingSet};
use crate::error::Result;
use crate::gp::{gp_fit, gp_predict};

use super::ExplorationConfig;

/// Which prediction-uncertainty quantity enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UncertaintyTerm {
    #[default]
    Variance,
    StdDev,
}

impl UncertaintyTerm {
    pub fn of(self, pred: &MiPrediction) -> f64 {
        match self {
            UncertaintyTerm::Variance => pred.variance,
            UncertaintyTerm::StdDev => pred.std_dev(),
        }
    }
}

/// `alpha · mean + (1 - alpha) · variance`.
pub fn objective(pred: &MiPrediction, alpha: f64) -> f64 {
    objective_with(pred, alpha, UncertaintyTerm::Variance)
}

pub fn objective_with(pred: &MiPrediction, alpha: f64, term: UncertaintyTerm) -> f64 {
    alpha * pred.mean + (1.0 - alpha) * term.of(pred)
}

/// Index of the largest value; ties go to the lowest index, NaNs never win.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// A model predicting MI at unevaluated actions from a training set.
pub trait Surrogate {
    fn predict(&self, train: &TrainingSet, queries: &[Action]) -> Result<Vec<MiPrediction>>;
}

#[derive(Debug, Clone, Copy)]
pub struct BkiSurrogate {
    pub kernel: KernelSpec,
    pub hyperparams: BkiHyperparams,
}

impl Surrogate for BkiSurrogate {
    fn predict(&self, train: &TrainingSet, queries: &[Action]) -> Result<Vec<MiPrediction>> {
        Ok(bki_predict(train, queries, &self.kernel, &self.hyperparams))
    }
}

/// Refits a GP on every call.
#[derive(Debug, Clone, Copy)]
pub struct GpSurrogate {
    pub kernel: KernelSpec,
    pub sigma2: f64,
}

impl Surrogate for GpSurrogate {
    fn predict(&self, train: &TrainingSet, queries: &[Action]) -> Result<Vec<MiPrediction>> {
        let model = gp_fit(train, &self.kernel, self.sigma2)?;
        Ok(gp_predict(&model, queries))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimizeOutcome {
    pub best_actions: Vec<Action>,
    pub best_values: Vec<f64>,
    /// Explicit MI evaluations performed during optimization.
    pub explicit_evaluations: usize,
}

impl OptimizeOutcome {
    /// The incumbent with the highest explicitly known MI.
    pub fn best(&self) -> Option<(Action, f64)> {
        argmax(self.best_values.iter().copied()).map(|i| (self.best_actions[i], self.best_values[i]))
    }
}

/// Runs `epochs` rounds of: predict over `queries`, pick the objective
/// maximizer, and either reuse its known value (already in `train`) or
/// evaluate it with `oracle` and add it to `train`.
#[allow(clippy::too_many_arguments)]
pub fn surrogate_optimize<S, F>(
    train: &mut TrainingSet,
    queries: &[Action],
    epochs: usize,
    alpha: f64,
    term: UncertaintyTerm,
    surrogate: &S,
    mut oracle: F,
) -> Result<OptimizeOutcome>
where
    S: Surrogate + ?Sized,
    F: FnMut(&Action) -> Result<f64>,
{
    let mut out = OptimizeOutcome::default();
    if queries.is_empty() {
        return Ok(out);
    }
    // An epoch that reuses a known value leaves `train` unchanged, so the
    // next prediction would be identical: predict only after growth.
    let mut cached: Option<(usize, Option<usize>)> = None;
    for _ in 0..epochs {
        let s = match cached {
            Some((len, s)) if len == train.len() => s,
            _ => {
                let preds = surrogate.predict(train, queries)?;
                let s = argmax(preds.iter().map(|p| objective_with(p, alpha, term)));
                cached = Some((train.len(), s));
                s
            }
        };
        let Some(s) = s else {
            break;
        };
        let chosen = queries[s];
        let value = match train.position(&chosen) {
            Some(i) => train.values()[i],
            None => {
                let v = oracle(&chosen)?;
                train.add_sample(chosen, v)?;
                out.explicit_evaluations += 1;
                v
            }
        };
        out.best_actions.push(chosen);
        out.best_values.push(value);
    }
    Ok(out)
}

/// BKI surrogate optimization with the configuration's kernel, prior and
/// epoch count.
pub fn bki_optimize<F>(
    train: &mut TrainingSet,
    queries: &[Action],
    cfg: &ExplorationConfig,
    oracle: F,
) -> Result<OptimizeOutcome>
where
    F: FnMut(&Action) -> Result<f64>,
{
    let surrogate = BkiSurrogate {
        kernel: cfg.kernel,
        hyperparams: cfg.bki,
    };
    surrogate_optimize(train, queries, cfg.epochs, cfg.alpha, cfg.uncertainty, &surrogate, oracle)
}

/// GP analogue of [`bki_optimize`], sharing the objective.
pub fn gp_optimize<F>(
    train: &mut TrainingSet,
    queries: &[Action],
    cfg: &ExplorationConfig,
    oracle: F,
) -> Result<OptimizeOutcome>
where
    F: FnMut(&Action) -> Result<f64>,
{
    let surrogate = GpSurrogate {
        kernel: cfg.kernel,
        sigma2: cfg.bki.sigma2,
    };
    surrogate_optimize(train, queries, cfg.epochs, cfg.alpha, cfg.uncertainty, &surrogate, oracle)
}
