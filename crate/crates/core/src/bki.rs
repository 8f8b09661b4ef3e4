//! Bayesian kernel inference (BKI) of mutual information.
//!
//! Each explicitly evaluated action contributes a Gaussian likelihood on the
//! latent mean MI at a query, tempered by the kernel weight between the two
//! actions. With a conjugate Gaussian prior `N(mu0, sigma2 / zeta)` the
//! posterior at query `x*` is closed form:
//!
//! ```text
//! kbar = Σ k(x*, x_i)        ybar = Σ k(x*, x_i) · y_i
//! mean = (ybar + zeta·mu0) / (zeta + kbar)
//! var  = sigma2 / (zeta + kbar)
//! ```
//!
//! Prediction is a dense kernel sum: `O(N · N_q)` with no matrix algebra.

use crate::action::{wrap_angle, Action};
use crate::error::{Error, Result};

/// Matérn ν = 3/2 kernel over action space.
///
/// The general Matérn family is
/// `k(r) = 2^{1-ν}/Γ(ν) · (√(2ν) r/ℓ)^ν · K_ν(√(2ν) r/ℓ)`; at ν = 3/2 it
/// reduces to `(1 + √3 r/ℓ) · exp(-√3 r/ℓ)`, the only member implemented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub length_scale: f64,
    /// Weight of the squared heading difference in the action distance.
    /// Zero makes the kernel purely positional.
    pub heading_weight: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            length_scale: 1.0,
            heading_weight: 0.0,
        }
    }
}

impl KernelSpec {
    pub fn matern32(length_scale: f64) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("length scale {length_scale}")));
        }
        Ok(Self {
            length_scale,
            heading_weight: 0.0,
        })
    }

    /// `sqrt(dx² + dy² + w · wrap(dψ)²)`.
    pub fn distance(&self, a: &Action, b: &Action) -> f64 {
        let dx = a.x_m - b.x_m;
        let dy = a.y_m - b.y_m;
        let mut d2 = dx * dx + dy * dy;
        if self.heading_weight != 0.0 {
            let dpsi = wrap_angle(a.heading_rad - b.heading_rad);
            d2 += self.heading_weight * dpsi * dpsi;
        }
        d2.sqrt()
    }

    pub fn eval_distance(&self, r: f64) -> f64 {
        let s = 3f64.sqrt() * r / self.length_scale;
        (1.0 + s) * (-s).exp()
    }

    pub fn eval(&self, a: &Action, b: &Action) -> f64 {
        self.eval_distance(self.distance(a, b))
    }
}

pub fn kernel(a: &Action, b: &Action, spec: &KernelSpec) -> f64 {
    spec.eval(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkiHyperparams {
    /// Prior confidence; 0 would mean no confidence in `mu0`.
    pub zeta: f64,
    /// Likelihood variance.
    pub sigma2: f64,
    /// Prior mean.
    pub mu0: f64,
}

impl Default for BkiHyperparams {
    /// `zeta = 0.001`, `sigma = 0.01` (so `sigma2 = 1e-4`), `mu0 = 0`.
    fn default() -> Self {
        Self {
            zeta: 1e-3,
            sigma2: 1e-4,
            mu0: 0.0,
        }
    }
}

impl BkiHyperparams {
    pub fn validated(self) -> Result<Self> {
        if !(self.zeta > 0.0 && self.sigma2 > 0.0 && self.mu0.is_finite()) {
            return Err(Error::InvalidArgument(format!("BKI hyperparameters {self:?}")));
        }
        Ok(self)
    }
}

/// Explicitly evaluated `(action, MI)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    actions: Vec<Action>,
    values: Vec<f64>,
}

impl TrainingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Action, f64)>) -> Result<Self> {
        let mut set = Self::new();
        for (a, y) in pairs {
            set.add_sample(a, y)?;
        }
        Ok(set)
    }

    pub fn add_sample(&mut self, action: Action, mi_bits: f64) -> Result<()> {
        if !(mi_bits.is_finite() && mi_bits >= 0.0) || !action.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "training sample {action:?} with MI {mi_bits}"
            )));
        }
        self.actions.push(action);
        self.values.push(mi_bits);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of a bitwise-identical action, if present.
    pub fn position(&self, action: &Action) -> Option<usize> {
        self.actions.iter().position(|a| a.same_as(action))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Action, f64)> {
        self.actions.iter().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiPrediction {
    pub mean: f64,
    pub variance: f64,
    /// Kernel mass `kbar` at the query (GP predictions leave this at 0).
    pub kbar: f64,
}

impl MiPrediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Posterior MI mean and variance at each query.
pub fn bki_predict(
    train: &TrainingSet,
    queries: &[Action],
    kspec: &KernelSpec,
    hp: &BkiHyperparams,
) -> Vec<MiPrediction> {
    queries
        .iter()
        .map(|q| {
            let mut kbar = 0.0;
            let mut ybar = 0.0;
            for (x, y) in train.iter() {
                let k = kspec.eval(q, x);
                kbar += k;
                ybar += k * y;
            }
            let denom = hp.zeta + kbar;
            MiPrediction {
                mean: (ybar + hp.zeta * hp.mu0) / denom,
                variance: hp.sigma2 / denom,
                kbar,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64) -> Action {
        Action::new(x, 0.0, 0.0)
    }

    #[test]
    fn kernel_values() {
        let k = KernelSpec::default();
        assert_eq!(kernel(&at(0.0), &at(0.0), &k), 1.0);
        // (1 + √3) e^{-√3}
        assert!((kernel(&at(0.0), &at(1.0), &k) - 0.483_357_724_596_507_7).abs() < 1e-12);
        assert!(kernel(&at(0.0), &at(100.0), &k) < 1e-70);
        assert_eq!(kernel(&at(0.3), &at(2.0), &k), kernel(&at(2.0), &at(0.3), &k));
    }

    #[test]
    fn heading_weight_enters_distance() {
        let mut k = KernelSpec::default();
        let a = Action::new(0.0, 0.0, 0.0);
        let b = Action::new(0.0, 0.0, 1.0);
        assert_eq!(k.distance(&a, &b), 0.0);
        k.heading_weight = 4.0;
        assert!((k.distance(&a, &b) - 2.0).abs() < 1e-15);
        // wrapped: 3.0 and -3.0 differ by 2π - 6
        let c = Action::new(0.0, 0.0, 3.0);
        let d = Action::new(0.0, 0.0, -3.0);
        assert!((k.distance(&c, &d) - 2.0 * (2.0 * std::f64::consts::PI - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_training_recovers_prior() {
        let hp = BkiHyperparams {
            zeta: 1e-3,
            sigma2: 0.01,
            mu0: 0.25,
        };
        let p = bki_predict(&TrainingSet::new(), &[at(3.0)], &KernelSpec::default(), &hp);
        assert!((p[0].mean - 0.25).abs() < 1e-15);
        assert!((p[0].variance - 10.0).abs() < 1e-12);
        assert_eq!(p[0].kbar, 0.0);
    }

    #[test]
    fn coincident_point() {
        let hp = BkiHyperparams {
            zeta: 1e-3,
            sigma2: 0.01,
            mu0: 0.0,
        };
        let train = TrainingSet::from_pairs([(at(1.0), 0.7)]).unwrap();
        let p = bki_predict(&train, &[at(1.0)], &KernelSpec::default(), &hp)[0];
        assert!((p.mean - 0.7 / 1.001).abs() < 1e-15);
        assert!((p.mean - 0.699_300_699_300_699_3).abs() < 1e-12);
        assert!((p.variance - 0.009_990_009_990_009_99).abs() < 1e-15);
    }

    #[test]
    fn midpoint_between_two() {
        let hp = BkiHyperparams {
            zeta: 1e-3,
            sigma2: 0.01,
            mu0: 0.0,
        };
        let train = TrainingSet::from_pairs([(at(0.0), 0.0), (at(2.0), 1.0)]).unwrap();
        let p = bki_predict(&train, &[at(1.0)], &KernelSpec::default(), &hp)[0];
        let k1 = 0.483_357_724_596_507_7;
        assert!((p.kbar - 2.0 * k1).abs() < 1e-12);
        assert!((p.mean - k1 / (2.0 * k1 + 1e-3)).abs() < 1e-12);
        assert!((p.mean - 0.499_483_319_192_209_9).abs() < 1e-12);
    }

    #[test]
    fn add_sample_grows_and_validates() {
        let mut t = TrainingSet::new();
        t.add_sample(at(0.0), 0.3).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.add_sample(at(0.0), -0.1).is_err());
        assert!(t.add_sample(at(0.0), f64::NAN).is_err());
        assert!(t.add_sample(Action::new(f64::INFINITY, 0.0, 0.0), 1.0).is_err());
        assert_eq!(t.len(), 1);
        assert_eq!(t.position(&at(0.0)), Some(0));
        assert_eq!(t.position(&at(0.1)), None);
    }

    #[test]
    fn duplicate_doubles_kernel_weight() {
        let hp = BkiHyperparams::default();
        let k = KernelSpec::default();
        let q = [at(0.4)];
        let mut t = TrainingSet::from_pairs([(at(0.0), 2.0), (at(1.5), 1.0)]).unwrap();
        let before = bki_predict(&t, &q, &k, &hp)[0];
        t.add_sample(at(0.0), 2.0).unwrap();
        let after = bki_predict(&t, &q, &k, &hp)[0];
        let w = k.eval(&q[0], &at(0.0));
        assert!((after.kbar - (before.kbar + w)).abs() < 1e-15);
        let ybar_before = before.mean * (hp.zeta + before.kbar);
        let ybar_after = after.mean * (hp.zeta + after.kbar);
        assert!((ybar_after - (ybar_before + 2.0 * w)).abs() < 1e-12);
        assert!(after.variance < before.variance);
    }

    #[test]
    fn invalid_hyperparams() {
        assert!(KernelSpec::matern32(0.0).is_err());
        assert!(BkiHyperparams { zeta: 0.0, ..Default::default() }.validated().is_err());
        assert!(BkiHyperparams { sigma2: -1.0, ..Default::default() }.validated().is_err());
    }
}
