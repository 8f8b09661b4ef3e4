//! Predicts MI at 240 query actions from 30 explicit evaluations with BKI and
//! compares against the exact values.

use bki_explore::bench::MapKind;
use bki_explore::bki::{bki_predict, BkiHyperparams, KernelSpec, TrainingSet};
use bki_explore::exploration::sample_actions;
use bki_explore::mi::action_mi;
use bki_explore::sensor::{integrate_scan, simulate_scan};
use bki_explore::{Action, InverseSensorModel, SensorSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bki_explore::Result<()> {
    let truth = MapKind::Unstructured.generate(24.0, 14.0, 0.2, 1)?;
    let mut belief = truth.blank_belief();
    let sensor = SensorSpec::default();
    let pose = Action::new(1.2, 1.2, 0.6);
    integrate_scan(&mut belief, &simulate_scan(&truth, &pose, &sensor)?, &InverseSensorModel::default())?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train_actions = sample_actions(&belief, &pose, 30, &sensor, &mut rng)?;
    let queries = sample_actions(&belief, &pose, 240, &sensor, &mut rng)?;
    let mut train = TrainingSet::new();
    for a in &train_actions {
        train.add_sample(*a, action_mi(&belief, a, &sensor)?.mi_bits)?;
    }

    let preds = bki_predict(&train, &queries, &KernelSpec::default(), &BkiHyperparams::default());
    let mut sse = 0.0;
    println!("   x      y     exact  predicted  std-dev");
    for (i, (q, p)) in queries.iter().zip(&preds).enumerate() {
        let exact = action_mi(&belief, q, &sensor)?.mi_bits;
        sse += (exact - p.mean).powi(2);
        if i % 30 == 0 {
            println!("{:5.2}  {:5.2}  {:7.2}  {:9.2}  {:7.4}", q.x_m, q.y_m, exact, p.mean, p.std_dev());
        }
    }
    println!("RMSE over {} queries: {:.2} bits", queries.len(), (sse / queries.len() as f64).sqrt());
    Ok(())
}
