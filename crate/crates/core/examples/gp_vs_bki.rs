//! Inference time of BKI vs the GP baseline for growing training sets
//! (N_q = 8N), and their RMSE against a smooth synthetic MI field.

use std::time::Instant;

use bki_explore::bki::{bki_predict, BkiHyperparams, KernelSpec, TrainingSet};
use bki_explore::gp::{gp_fit, gp_predict};
use bki_explore::Action;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bki_explore::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let kernel = KernelSpec::default();
    let hp = BkiHyperparams::default();
    println!("    N    N_q   BKI ms    GP ms   BKI RMSE   GP RMSE");
    for n in [30, 60, 120, 240, 480] {
        let mut point = || Action::new(rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0), 0.0);
        let actions: Vec<Action> = (0..n).map(|_| point()).collect();
        let queries: Vec<Action> = (0..8 * n).map(|_| point()).collect();
        // smooth synthetic MI field
        let field = |a: &Action| 50.0 + 40.0 * (0.8 * a.x_m).sin() * (0.6 * a.y_m).cos();
        let train = TrainingSet::from_pairs(actions.iter().map(|a| (*a, field(a))))?;

        let t = Instant::now();
        let b = bki_predict(&train, &queries, &kernel, &hp);
        let tb = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let g = gp_predict(&gp_fit(&train, &kernel, hp.sigma2)?, &queries);
        let tg = t.elapsed().as_secs_f64();
        let rmse = |p: &[bki_explore::MiPrediction]| {
            let sse: f64 = p.iter().zip(&queries).map(|(p, q)| (p.mean - field(q)).powi(2)).sum();
            (sse / queries.len() as f64).sqrt()
        };
        println!("{n:5}  {:5}  {:7.3}  {:7.3}   {:8.2}  {:8.2}", 8 * n, tb * 1e3, tg * 1e3, rmse(&b), rmse(&g));
    }
    Ok(())
}
