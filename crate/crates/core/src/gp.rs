//! Zero-mean Gaussian-process regression baseline over actions.
//!
//! Fitting factors the `N × N` Gram matrix `K + sigma2·I` (Cholesky,
//! `O(N³)`); each prediction then costs `O(N²)` for the triangular solve.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::action::Action;
use crate::bki::{KernelSpec, MiPrediction, TrainingSet};
use crate::error::{Error, Result};

const MAX_JITTER: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GpModel {
    train: TrainingSet,
    kernel: KernelSpec,
    sigma2: f64,
    jitter: f64,
    chol: Cholesky<f64, Dyn>,
    /// `(K + sigma2·I)⁻¹ y`
    alpha: DVector<f64>,
    pub fit_time_s: f64,
}

fn gram(train: &TrainingSet, kernel: &KernelSpec) -> DMatrix<f64> {
    let xs = train.actions();
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = kernel.eval(&xs[i], &xs[i]);
        for j in 0..i {
            let v = kernel.eval(&xs[i], &xs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Factors `K + sigma2·I`, escalating diagonal jitter up to 1e-6 if needed.
pub fn gp_fit(train: &TrainingSet, kernel: &KernelSpec, sigma2: f64) -> Result<GpModel> {
    let start = Instant::now();
    if train.is_empty() {
        return Err(Error::InvalidArgument("GP needs at least one training point".into()));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidArgument(format!("GP noise variance {sigma2}")));
    }
    let n = train.len();
    let mut base = gram(train, kernel);
    for i in 0..n {
        base[(i, i)] += sigma2;
    }

    let mut jitter = 0.0;
    let chol = loop {
        let mut m = base.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(c) = m.cholesky() {
            break c;
        }
        jitter = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
        if jitter > MAX_JITTER * (1.0 + 1e-9) {
            return Err(Error::Numerical(format!(
                "Gram matrix of {n} points not positive definite with jitter up to {MAX_JITTER}"
            )));
        }
    };
    let y = DVector::from_column_slice(train.values());
    let alpha = chol.solve(&y);
    Ok(GpModel {
        train: train.clone(),
        kernel: *kernel,
        sigma2,
        jitter,
        chol,
        alpha,
        fit_time_s: start.elapsed().as_secs_f64(),
    })
}

impl GpModel {
    /// Lower-triangular factor `L` with `L·Lᵀ = K + (sigma2 + jitter)·I`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn training_set(&self) -> &TrainingSet {
        &self.train
    }

    pub fn predict_one(&self, query: &Action) -> MiPrediction {
        let xs = self.train.actions();
        let kstar = DVector::from_iterator(xs.len(), xs.iter().map(|x| self.kernel.eval(query, x)));
        let mean = kstar.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&kstar)
            .expect("Cholesky factor has a positive diagonal");
        let prior = self.kernel.eval(query, query);
        let variance = (prior - v.norm_squared()).max(0.0) + self.sigma2;
        MiPrediction {
            mean,
            variance,
            kbar: 0.0,
        }
    }
}

/// Posterior mean `k*ᵀ(K+σ²I)⁻¹y` and variance `k** - k*ᵀ(K+σ²I)⁻¹k* + σ²`.
///
/// All queries share one triangular solve against the `N × N_q` cross-kernel
/// matrix.
pub fn gp_predict(model: &GpModel, queries: &[Action]) -> Vec<MiPrediction> {
    let xs = model.train.actions();
    let kstar = DMatrix::from_fn(xs.len(), queries.len(), |i, j| model.kernel.eval(&queries[j], &xs[i]));
    let means = kstar.tr_mul(&model.alpha);
    let v = model
        .chol
        .l_dirty()
        .solve_lower_triangular(&kstar)
        .expect("Cholesky factor has a positive diagonal");
    queries
        .iter()
        .enumerate()
        .map(|(j, q)| {
            let prior = model.kernel.eval(q, q);
            MiPrediction {
                mean: means[j],
                variance: (prior - v.column(j).norm_squared()).max(0.0) + model.sigma2,
                kbar: 0.0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> Action {
        Action::new(x, y, 0.0)
    }

    #[test]
    fn single_point_factor() {
        let t = TrainingSet::from_pairs([(at(0.0, 0.0), 1.0)]).unwrap();
        let m = gp_fit(&t, &KernelSpec::default(), 0.25).unwrap();
        assert!((m.factor()[(0, 0)] - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.jitter(), 0.0);
        assert!(m.fit_time_s >= 0.0);
    }

    #[test]
    fn duplicates_are_regularized() {
        let t = TrainingSet::from_pairs([(at(1.0, 1.0), 1.0), (at(1.0, 1.0), 3.0)]).unwrap();
        let m = gp_fit(&t, &KernelSpec::default(), 1e-4).unwrap();
        let p = m.predict_one(&at(1.0, 1.0));
        assert!((p.mean - 2.0).abs() < 1e-3);
    }

    #[test]
    fn factor_reconstructs_gram() {
        let pts = [(0.1, 0.2), (1.3, -0.4), (2.2, 0.9), (0.7, 1.5), (-0.6, 0.3)];
        let t = TrainingSet::from_pairs(pts.iter().enumerate().map(|(i, &(x, y))| (at(x, y), i as f64)))
            .unwrap();
        let k = KernelSpec::default();
        let m = gp_fit(&t, &k, 0.01).unwrap();
        let l = m.factor();
        let recon = &l * l.transpose();
        for i in 0..5 {
            for j in 0..5 {
                let (a, b) = (at(pts[i].0, pts[i].1), at(pts[j].0, pts[j].1));
                let expected = k.eval(&a, &b) + if i == j { 0.01 } else { 0.0 };
                assert!((recon[(i, j)] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_point_closed_form() {
        let (a, b) = (at(0.0, 0.0), at(1.2, 0.5));
        let (ya, yb) = (0.8, 2.5);
        let s2 = 0.05;
        let k = KernelSpec::default();
        let t = TrainingSet::from_pairs([(a, ya), (b, yb)]).unwrap();
        let m = gp_fit(&t, &k, s2).unwrap();
        let q = at(0.4, 0.9);

        let kab = k.eval(&a, &b);
        let (p, r, s) = (1.0 + s2, kab, 1.0 + s2);
        let det = p * s - r * r;
        let inv = [[s / det, -r / det], [-r / det, p / det]];
        let ks = [k.eval(&q, &a), k.eval(&q, &b)];
        let w = [
            inv[0][0] * ks[0] + inv[0][1] * ks[1],
            inv[1][0] * ks[0] + inv[1][1] * ks[1],
        ];
        let mean = w[0] * ya + w[1] * yb;
        let var = 1.0 - (w[0] * ks[0] + w[1] * ks[1]) + s2;

        let got = m.predict_one(&q);
        assert!((got.mean - mean).abs() < 1e-12);
        assert!((got.variance - var).abs() < 1e-12);
    }

    #[test]
    fn limits() {
        let k = KernelSpec::default();
        let t = TrainingSet::from_pairs([(at(0.0, 0.0), 0.9), (at(3.0, 0.0), 0.1)]).unwrap();
        let m = gp_fit(&t, &k, 1e-10).unwrap();
        assert!((m.predict_one(&at(0.0, 0.0)).mean - 0.9).abs() < 1e-6);
        let far = m.predict_one(&at(500.0, 500.0));
        assert!(far.mean.abs() < 1e-12);
        assert!((far.variance - (1.0 + 1e-10)).abs() < 1e-12);
    }

    #[test]
    fn batched_matches_single() {
        let pts = [(0.1, 0.2), (1.3, -0.4), (2.2, 0.9), (0.7, 1.5)];
        let t = TrainingSet::from_pairs(pts.iter().enumerate().map(|(i, &(x, y))| (at(x, y), 0.3 * i as f64)))
            .unwrap();
        let m = gp_fit(&t, &KernelSpec::default(), 0.01).unwrap();
        let qs: Vec<Action> = (0..7).map(|i| at(0.4 * i as f64, 0.1 * i as f64)).collect();
        for (q, p) in qs.iter().zip(gp_predict(&m, &qs)) {
            let one = m.predict_one(q);
            assert!((one.mean - p.mean).abs() < 1e-12);
            assert!((one.variance - p.variance).abs() < 1e-12);
        }
        assert!(gp_predict(&m, &[]).is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(gp_fit(&TrainingSet::new(), &KernelSpec::default(), 0.1).is_err());
        let t = TrainingSet::from_pairs([(at(0.0, 0.0), 0.9)]).unwrap();
        assert!(gp_fit(&t, &KernelSpec::default(), 0.0).is_err());
    }
}
