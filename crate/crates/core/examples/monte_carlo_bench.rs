//! A scaled-down timing study: all five engines, N in {10, 20}, three trials
//! each on a small maze. Results go to a temporary directory.

use bki_explore::bench::{run_experiment, summarize, ExperimentSpec};

fn main() -> bki_explore::Result<()> {
    let dir = std::env::temp_dir().join("bki_explore_monte_carlo");
    let mut spec = ExperimentSpec::parse(
        "map = structured\nwidth_m = 12\nheight_m = 8\nn = 10, 20\ntrials = 3\nloop_limit = 15\n",
    )?;
    spec.out_dir = dir.clone();
    let report = run_experiment(&spec)?;
    println!("method     N   runs  step s (mean ± std)   inference %   coverage");
    for s in &report.summaries {
        println!(
            "{:10} {:3}  {:4}  {:.4} ± {:.4}        {:6.2}       {:.3}",
            s.method, s.n_train, s.runs, s.mean_total_s, s.std_total_s, s.inference_share_pct, s.mean_final_coverage
        );
    }
    let again = summarize(&dir, &dir.join("resummary.csv"))?;
    assert_eq!(again.len(), report.summaries.len());
    println!("per-step CSVs in {}", dir.join("steps").display());
    Ok(())
}
