use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bki_explore::bench::{
    run_experiment, summarize, write_run_files, ExperimentSpec, MapKind, MapSource, WORKERS_ENV,
};
use bki_explore::exploration::{explore_with_snapshots, Engine};
use bki_explore::grid::{write_belief_pgm, write_pgm};
use bki_explore::{Action, OccupancyGrid, Result};

#[derive(Parser)]
#[command(name = "bki-explore", version, about = "Mutual-information exploration on occupancy grids")]
#[command(after_help = format!("Worker threads for `bench` come from ${WORKERS_ENV} (default: all cores)."))]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic ground-truth map as a PGM.
    Genmap {
        #[arg(long, default_value = "structured")]
        kind: MapKind,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one exploration episode.
    Explore(ExploreArgs),
    /// Run a Monte Carlo experiment described by a key=value file.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides `trials` in the spec.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides `out_dir` in the spec.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Recompute per-method summaries from per-step CSVs.
    Summarize {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Copy)]
struct Dims {
    #[arg(long, default_value_t = 24.0)]
    width: f64,
    #[arg(long, default_value_t = 14.0)]
    height: f64,
    #[arg(long, default_value_t = 0.2)]
    res: f64,
}

#[derive(Args)]
struct ExploreArgs {
    /// PGM ground truth; its own size is used.
    #[arg(long, conflicts_with = "gen")]
    map: Option<PathBuf>,
    /// Generate the ground truth instead.
    #[arg(long)]
    gen: Option<MapKind>,
    #[command(flatten)]
    dims: Dims,
    #[arg(long, default_value_t = 1)]
    map_seed: u64,
    #[arg(long, default_value = "bki_bo")]
    engine: Engine,
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Defaults to 8·N.
    #[arg(long)]
    nq: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Information threshold in bits.
    #[arg(long, default_value_t = 0.05)]
    ith: f64,
    #[arg(long, default_value_t = 50)]
    nloop: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    start_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    start_y: Option<f64>,
    /// Also dump the belief map every this many steps.
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn explore_cmd(a: ExploreArgs) -> Result<()> {
    let mut spec = ExperimentSpec {
        map: match (&a.map, a.gen) {
            (Some(p), _) => MapSource::Pgm(p.clone()),
            (None, g) => MapSource::Generated(g.unwrap_or(MapKind::Structured)),
        },
        width_m: a.dims.width,
        height_m: a.dims.height,
        resolution_m: a.dims.res,
        map_seed: a.map_seed,
        n_query: a.nq,
        epochs: a.epochs,
        engines: vec![a.engine],
        n_values: vec![a.n],
        trials: 1,
        out_dir: a.out_dir.clone(),
        ..Default::default()
    };
    spec.template.alpha = a.alpha;
    spec.template.info_threshold = a.ith;
    spec.template.loop_limit = a.nloop;
    if let (Some(x), Some(y)) = (a.start_x, a.start_y) {
        spec.start = Some(Action::new(x, y, 0.0));
    }
    let spec = spec.validated()?;
    let truth = spec.build_map()?;
    let start = spec.start_for(&truth)?;
    let cfg = spec.config_for(a.engine, a.n, a.seed);

    fs::create_dir_all(&a.out_dir)?;
    let snap_dir = a.out_dir.join("snapshots");
    let mut snap_err = None;
    let log = explore_with_snapshots(&cfg, &truth, &start, |step, grid: &OccupancyGrid| {
        let Some(every) = a.snapshot_every.filter(|&e| e > 0) else { return };
        if step % every != 0 || snap_err.is_some() {
            return;
        }
        let res = fs::create_dir_all(&snap_dir).map_err(Into::into).and_then(|_| {
            let mut w = BufWriter::new(File::create(snap_dir.join(format!("belief_{step:04}.pgm")))?);
            write_belief_pgm(grid, &mut w, true)
        });
        if let Err(e) = res {
            snap_err = Some(e);
        }
    })?;
    if let Some(e) = snap_err {
        return Err(e);
    }
    write_pgm(&truth, &mut BufWriter::new(File::create(a.out_dir.join("map.pgm"))?), true)?;
    let stem = format!("{}_N{}_s{}", cfg.engine.tag(), cfg.n_train, cfg.rng_seed);
    write_run_files(&a.out_dir, &stem, &log)?;
    let s = log.summary();
    println!(
        "{} N={} steps={} entropy {:.1} -> {:.1} bits, coverage {:.3}, mean step {:.4}s, inference share {:.2}%, {:?}",
        log.method,
        log.n_train,
        log.records.len(),
        log.initial_entropy_bits,
        log.final_entropy_bits(),
        log.final_coverage(),
        s.mean_total_s,
        s.inference_share_pct,
        log.termination
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Genmap { kind, dims, seed, out } => {
            let t = kind.generate(dims.width, dims.height, dims.res, seed)?;
            write_pgm(&t, &mut BufWriter::new(File::create(&out)?), true)?;
            println!("{} map {}x{} cells -> {}", kind.name(), t.width(), t.height(), out.display());
        }
        Cmd::Explore(a) => explore_cmd(a)?,
        Cmd::Bench { spec, trials, out_dir } => {
            let mut s = ExperimentSpec::from_file(&spec)?;
            if let Some(t) = trials {
                s.trials = t;
            }
            if let Some(d) = out_dir {
                s.out_dir = d;
            }
            let report = run_experiment(&s)?;
            for r in &report.summaries {
                println!(
                    "{:>9} N={:<3} runs={:<3} step {:.4} ± {:.4} s  inference {:6.2}%  coverage {:.3}",
                    r.method, r.n_train, r.runs, r.mean_total_s, r.std_total_s, r.inference_share_pct, r.mean_final_coverage
                );
            }
            for (job, err) in report.failures() {
                eprintln!("run {} failed: {err}", job.file_stem());
            }
        }
        Cmd::Summarize { in_dir, out } => {
            let s = summarize(&in_dir, &out)?;
            println!("{} method variants -> {}", s.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
