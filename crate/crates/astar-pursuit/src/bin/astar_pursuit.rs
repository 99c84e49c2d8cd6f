//! Command-line front end: single recoveries, ensemble benchmarks, parameter
//! sweeps and block-image reconstruction.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use astar_pursuit::config::{
    parse_dist, parse_gen_spec, parse_matrix, parse_sharing, AlgoConfig, AlgoId,
    RunConfig, SweepAxis,
};
use astar_pursuit::error::{Error, Result};
use astar_pursuit::harness::{
    fmt_axis_value, run_algorithm, run_benchmark, run_sweep, write_benchmark_csvs,
    write_sweep_outputs,
};
use astar_pursuit::image::{
    block_stat_csv_row, psnr, reconstruct_image, BlockRecovery, GrayImage, BLOCK_LEN,
    BLOCK_STATS_CSV_HEADER,
};
use astar_pursuit::linalg::Matrix;
use astar_pursuit::metrics::{
    misidentified, nmse, trial_csv_row, TrialRecord, SUMMARY_CSV_HEADER, TRIALS_CSV_HEADER,
};
use astar_pursuit::metrics::summary_csv_row;
use astar_pursuit::search::Termination;
use astar_pursuit::synth::{ensemble_rng, gen_matrix, MatrixKind, ProblemInstance};
use astar_pursuit::{harness, Vector};

#[derive(Parser)]
#[command(
    name = "astar-pursuit",
    version,
    about = "Sparse recovery by best-first tree search, with OMP/SP baselines and a benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a single instance (generated or loaded from a problem file).
    Recover(RecoverArgs),
    /// Run trials x algorithms over a seeded ensemble and write CSVs.
    Benchmark(BenchmarkArgs),
    /// Repeat a benchmark across one parameter axis.
    Sweep(SweepArgs),
    /// Reconstruct a PGM image block by block.
    Image(ImageArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Algorithm id, or a comma-separated list for benchmark/sweep:
    /// omp|sp|add-aomp|adap-aomp|mul-aomp.
    #[arg(long)]
    algo: Option<String>,
    /// Initial search paths.
    #[arg(long = "I")]
    initial_paths: Option<usize>,
    /// Extensions per expanded path.
    #[arg(long = "B")]
    extensions: Option<usize>,
    /// Beam width (maximum live paths).
    #[arg(long = "P")]
    beam_width: Option<usize>,
    /// Sparsity.
    #[arg(long = "K")]
    sparsity: Option<usize>,
    /// Observation length.
    #[arg(long = "M")]
    obs_len: Option<usize>,
    /// Signal length.
    #[arg(long = "N")]
    signal_len: Option<usize>,
    /// Multiplicative cost parameter (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Additive/adaptive cost parameter (> 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Base PRNG seed.
    #[arg(long, env = "ASTAR_PURSUIT_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Observation matrix family: gaussian|bernoulli.
    #[arg(long)]
    matrix: Option<String>,
    /// Nonzero coefficient distribution: uniform|gaussian|binary.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long = "snr-db")]
    snr_db: Option<f64>,
    /// Matrix sharing across trials: per_sample|shared.
    #[arg(long = "matrix-sharing")]
    matrix_sharing: Option<String>,
    /// Worker threads for trial execution.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (benchmark/sweep/image) or CSV file (recover).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "max-iterations")]
    max_iterations: Option<u64>,
    /// Relative residue-norm early stop.
    #[arg(long = "residue-stop")]
    residue_stop: Option<f64>,
    /// Check path equivalence against live beam slots only.
    #[arg(long = "live-slot-pruning")]
    live_slot_pruning: bool,
    /// Record wall-clock runtimes in trials.csv (breaks byte-identical
    /// reruns).
    #[arg(long)]
    timing: bool,
    /// Normalize dictionary columns to unit norm after generation.
    #[arg(long = "normalize-columns")]
    normalize_columns: bool,
    /// NMSE threshold under which a trial counts as exact.
    #[arg(long = "exact-threshold")]
    exact_threshold: Option<f64>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Compact generation spec, e.g. N=64,M=32,K=5.
    #[arg(long)]
    gen: Option<String>,
    /// Whitespace-separated problem file: `M N K`, then the M x N matrix
    /// row-major, then y, then optionally x_true.
    #[arg(long, conflicts_with = "gen")]
    problem: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Config file; every key can be overridden by a flag.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep axis: K|M|alpha|B|P|snr.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated axis values.
    #[arg(long)]
    values: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ImageArgs {
    /// Input image (binary PGM, dimensions multiples of 8).
    #[arg(long)]
    input: PathBuf,
    /// Seed for the shared observation matrix (defaults to --seed).
    #[arg(long = "phi-seed")]
    phi_seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Recover(args) => cmd_recover(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Image(args) => cmd_image(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(path) => RunConfig::parse_str(&std::fs::read_to_string(path)?),
        None => Ok(RunConfig::default()),
    }
}

/// Flag-wins merge of the common CLI arguments onto a configuration.
fn apply_overrides(config: &mut RunConfig, common: &CommonArgs) -> Result<()> {
    let e = &mut config.ensemble;
    if let Some(n) = common.signal_len {
        e.signal_len = n;
    }
    if let Some(m) = common.obs_len {
        e.obs_len = m;
    }
    if let Some(k) = common.sparsity {
        e.sparsity = k;
    }
    if let Some(t) = common.trials {
        e.trials = t;
    }
    if let Some(seed) = common.seed {
        e.seed = seed;
    }
    if let Some(snr) = common.snr_db {
        e.snr_db = Some(snr);
    }
    if let Some(kind) = &common.matrix {
        e.matrix_kind = parse_matrix(kind)?;
    }
    if let Some(dist) = &common.dist {
        e.coeff_dist = parse_dist(dist)?;
    }
    if let Some(sharing) = &common.matrix_sharing {
        e.matrix_sharing = parse_sharing(sharing)?;
    }
    if common.normalize_columns {
        e.normalize_columns = true;
    }

    if let Some(list) = &common.algo {
        let base = config
            .algorithms
            .first()
            .map(|a| a.settings.clone())
            .unwrap_or_default();
        let mut algorithms = Vec::new();
        for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            algorithms.push(AlgoConfig { id: AlgoId::parse(token)?, settings: base.clone() });
        }
        if algorithms.is_empty() {
            return Err(Error::InvalidParams("--algo must name at least one algorithm".into()));
        }
        config.algorithms = algorithms;
    }
    for algo in &mut config.algorithms {
        let s = &mut algo.settings;
        if let Some(v) = common.initial_paths {
            s.initial_paths = v;
        }
        if let Some(v) = common.extensions {
            s.extensions = v;
        }
        if let Some(v) = common.beam_width {
            s.beam_width = v;
        }
        if let Some(v) = common.alpha {
            s.alpha = v;
        }
        if let Some(v) = common.beta {
            s.beta = v;
        }
        if let Some(v) = common.max_iterations {
            s.max_iterations = Some(v);
        }
        if let Some(v) = common.residue_stop {
            s.residue_stop = Some(v);
        }
        if common.live_slot_pruning {
            s.live_slot_pruning = true;
        }
    }

    if let Some(jobs) = common.jobs {
        config.jobs = jobs;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    if common.timing {
        config.record_runtime = true;
    }
    if let Some(t) = common.exact_threshold {
        config.exact_threshold = t;
    }
    Ok(())
}

fn read_problem_file(path: &PathBuf) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path)?;
    let mut tokens = text.split_whitespace();
    let mut next_num = |what: &str| -> Result<f64> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("problem file truncated at {what}")))?
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number in problem file at {what}")))
    };
    let m = next_num("M")? as usize;
    let n = next_num("N")? as usize;
    let k = next_num("K")? as usize;
    if m == 0 || n == 0 {
        return Err(Error::Parse("problem file must have M >= 1 and N >= 1".into()));
    }
    let mut entries = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        entries.push(next_num("matrix entry")?);
    }
    let phi = Matrix::from_row_major(m, n, &entries)?;
    let mut y = Vec::with_capacity(m);
    for _ in 0..m {
        y.push(next_num("observation entry")?);
    }
    let rest: Vec<f64> = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse("bad trailing number in problem file".into()))
        })
        .collect::<Result<_>>()?;
    let x_true = match rest.len() {
        0 => None,
        len if len == n => Some(Vector::new(rest)?),
        len => {
            return Err(Error::Parse(format!(
                "problem file has {len} trailing values, expected 0 or {n} (x_true)"
            )))
        }
    };
    ProblemInstance::new(phi, Vector::new(y)?, x_true, k)
}

fn single_algo(config: &RunConfig) -> Result<&AlgoConfig> {
    if config.algorithms.len() != 1 {
        return Err(Error::InvalidParams(
            "this command takes exactly one --algo value".into(),
        ));
    }
    Ok(&config.algorithms[0])
}

fn describe_model(algo: &AlgoConfig) -> String {
    match algo.settings.cost_model(algo.id) {
        Some(model) => match model {
            astar_pursuit::cost::CostModel::Additive { beta } => format!("additive(beta={beta})"),
            astar_pursuit::cost::CostModel::Adaptive { beta } => format!("adaptive(beta={beta})"),
            astar_pursuit::cost::CostModel::Multiplicative { alpha } => {
                format!("multiplicative(alpha={alpha})")
            }
        },
        None => "none (greedy baseline)".to_string(),
    }
}

fn termination_str(t: Option<Termination>) -> &'static str {
    match t {
        Some(Termination::CompletePath) => "complete_path",
        Some(Termination::ResidueThreshold) => "residue_threshold",
        Some(Termination::IterationCap) => "iteration_cap",
        None => "fixed_iterations",
    }
}

fn cmd_recover(args: RecoverArgs) -> Result<()> {
    let mut config = RunConfig::default();
    config.ensemble.trials = 1;
    if let Some(spec) = &args.gen {
        let (n, m, k) = parse_gen_spec(spec)?;
        config.ensemble.signal_len = n;
        config.ensemble.obs_len = m;
        config.ensemble.sparsity = k;
    }
    apply_overrides(&mut config, &args.common)?;
    let problem = match &args.problem {
        Some(path) => read_problem_file(path)?,
        None => {
            config.ensemble.validate()?;
            config.ensemble.instance(0, None)?
        }
    };
    let algo = single_algo(&config)?.clone();
    let out = run_algorithm(&problem, &algo, false)?;

    println!("algorithm: {}", algo.id.as_str());
    println!("cost model: {}", describe_model(&algo));
    println!("K: {}  M: {}  N: {}", problem.sparsity, problem.obs_len(), problem.signal_len());
    let support: Vec<String> = out.support.iter().map(|a| a.to_string()).collect();
    println!("support: [{}]", support.join(", "));
    let coeffs: Vec<String> = out
        .support
        .iter()
        .map(|&a| format!("{:.6e}", out.x_hat.as_slice()[a]))
        .collect();
    println!("coefficients: [{}]", coeffs.join(", "));
    println!("residue norm: {:.6e}", out.residue_norm);
    println!("iterations: {}", out.iterations);
    println!("equivalent prunes: {}", out.equivalent_prunes);
    println!("terminated by: {}", termination_str(out.termination));
    let mut record_nmse = f64::NAN;
    if let Some(x_true) = &problem.x_true {
        let e = nmse(x_true.as_slice(), out.x_hat.as_slice())?;
        record_nmse = e;
        let support_true = harness::true_support(x_true);
        println!("nmse: {e:.6e}");
        println!("exact: {}", e <= config.exact_threshold);
        println!("misidentified: {}", misidentified(&support_true, &out.support));
    }

    if args.common.out.is_some() {
        let record = TrialRecord {
            trial: 0,
            algo: algo.id.as_str().to_string(),
            sparsity: problem.sparsity,
            obs_len: problem.obs_len(),
            signal_len: problem.signal_len(),
            nmse: record_nmse,
            exact: record_nmse.is_finite() && record_nmse <= config.exact_threshold,
            misidentified: problem
                .x_true
                .as_ref()
                .map(|x| misidentified(&harness::true_support(x), &out.support))
                .unwrap_or(0),
            iterations: out.iterations,
            equivalent_prunes: out.equivalent_prunes,
            runtime_seconds: 0.0,
        };
        std::fs::write(
            &config.output_dir,
            format!("{TRIALS_CSV_HEADER}\n{}\n", trial_csv_row(&record)),
        )?;
    }
    Ok(())
}

fn stderr_progress() -> impl FnMut(usize, usize) {
    let mut last_percent = usize::MAX;
    move |done: usize, total: usize| {
        let percent = done * 100 / total.max(1);
        if percent != last_percent {
            last_percent = percent;
            eprint!("\r{done}/{total} trials ({percent}%)");
            let _ = std::io::stderr().flush();
            if done == total {
                eprintln!();
            }
        }
    }
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<()> {
    let mut config = load_config(args.config.as_ref())?;
    apply_overrides(&mut config, &args.common)?;
    let output = run_benchmark(&config, &mut stderr_progress())?;
    let (trials_path, summary_path) = write_benchmark_csvs(&config.output_dir, &output)?;
    println!("{SUMMARY_CSV_HEADER}");
    for summary in &output.summaries {
        println!("{}", summary_csv_row(summary));
    }
    eprintln!("wrote {} and {}", trials_path.display(), summary_path.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut config = load_config(args.config.as_ref())?;
    apply_overrides(&mut config, &args.common)?;
    if let Some(axis) = &args.axis {
        let axis = SweepAxis::parse(axis)?;
        let values_text = args
            .values
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("--axis requires --values".into()))?;
        let values: Vec<f64> = values_text
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse(format!("bad sweep value '{t}'")))
            })
            .collect::<Result<_>>()?;
        if values.is_empty() {
            return Err(Error::InvalidParams("--values must be non-empty".into()));
        }
        config.sweep = Some((axis, values));
    }
    let (axis, _) = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("sweep needs --axis/--values or a [sweep] config".into()))?
        .clone();
    let outputs = run_sweep(&config, &mut stderr_progress())?;
    let combined = write_sweep_outputs(&config.output_dir, axis, &outputs)?;
    println!("axis,value,{SUMMARY_CSV_HEADER}");
    for out in &outputs {
        for summary in &out.benchmark.summaries {
            println!(
                "{},{},{}",
                axis.as_str(),
                fmt_axis_value(out.value),
                summary_csv_row(summary)
            );
        }
    }
    eprintln!("wrote {}", combined.display());
    Ok(())
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

fn cmd_image(args: ImageArgs) -> Result<()> {
    let mut config = RunConfig::default();
    // Block-pipeline defaults: K=14 coefficients per block from M=32
    // measurements, alpha 0.5.
    config.ensemble.sparsity = 14;
    config.ensemble.obs_len = 32;
    for algo in &mut config.algorithms {
        algo.settings.alpha = 0.5;
    }
    apply_overrides(&mut config, &args.common)?;
    let algo = single_algo(&config)?.clone();
    let k = config.ensemble.sparsity;
    let m = config.ensemble.obs_len;
    if m > BLOCK_LEN {
        return Err(Error::InvalidParams(format!(
            "block observation length {m} exceeds {BLOCK_LEN}"
        )));
    }

    let img = GrayImage::read_pgm(&args.input)?;
    let phi_seed = args.phi_seed.or(args.common.seed).unwrap_or(config.ensemble.seed);
    let mut rng = ensemble_rng(phi_seed, 0);
    let phi = gen_matrix(m, BLOCK_LEN, MatrixKind::Gaussian, config.ensemble.normalize_columns, &mut rng);

    let blocks_total = img.blocks_x() * img.blocks_y();
    let mut done = 0usize;
    let mut progress = stderr_progress();
    let out = reconstruct_image(&img, &phi, k, config.exact_threshold, |problem| {
        let run = run_algorithm(problem, &algo, false)?;
        done += 1;
        progress(done, blocks_total);
        Ok(BlockRecovery {
            coeffs: run.x_hat.as_slice().to_vec(),
            iterations: run.iterations,
            converged: run.converged,
        })
    })?;

    std::fs::create_dir_all(&config.output_dir)?;
    let recon_path = config.output_dir.join("reconstructed.pgm");
    out.reconstructed.write_pgm(&recon_path)?;
    out.preprocessed.write_pgm(&config.output_dir.join("preprocessed.pgm"))?;
    let mut stats_csv = String::from(BLOCK_STATS_CSV_HEADER);
    stats_csv.push('\n');
    for stat in &out.stats {
        stats_csv.push_str(&block_stat_csv_row(stat));
        stats_csv.push('\n');
    }
    std::fs::write(config.output_dir.join("blocks.csv"), stats_csv)?;

    println!("algorithm: {}", algo.id.as_str());
    println!("cost model: {}", describe_model(&algo));
    println!(
        "image: {}x{} ({} blocks), K={k}, M={m}, phi seed {phi_seed}",
        img.width(),
        img.height(),
        blocks_total,
    );
    println!("psnr vs original: {}", fmt_psnr(psnr(&img, &out.reconstructed)?));
    println!(
        "psnr vs preprocessed: {}",
        fmt_psnr(psnr(&out.preprocessed, &out.reconstructed)?)
    );
    let exact_blocks = out.stats.iter().filter(|s| s.exact).count();
    println!("exact blocks: {exact_blocks}/{blocks_total}");
    eprintln!("wrote {}", recon_path.display());
    Ok(())
}
